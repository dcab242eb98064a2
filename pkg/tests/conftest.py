"""Shared fixtures: the expensive scenario solves are done once per session."""

from __future__ import annotations

import time
from types import SimpleNamespace

import pytest
from hypothesis import HealthCheck, settings

from nlslab import (
    build_seed,
    continuation_solve,
    eval_potential,
    export_presets,
    load_preset_text,
    parse_scenario,
)

settings.register_profile(
    "lab",
    max_examples=60,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("lab")


def solve_preset(name: str) -> SimpleNamespace:
    """Run a shipped scenario's solve stage and time it."""
    cfg = parse_scenario(load_preset_text(name), source=f"{name}.toml")
    v = eval_potential(cfg.potential, cfg.grid)
    u0 = build_seed(cfg.grid, cfg.seed)
    t0 = time.perf_counter()
    field, trace = continuation_solve(
        cfg.grid, v, cfg.nonlinearity, u0, cfg.solver.ladder,
        tol=cfg.solver.tol, max_iter=cfg.solver.max_iter,
    )
    return SimpleNamespace(
        cfg=cfg, v=v, field=field, trace=trace,
        seconds=time.perf_counter() - t0,
    )


@pytest.fixture(scope="session")
def free_run():
    return solve_preset("free-soliton")


@pytest.fixture(scope="session")
def harmonic_run():
    return solve_preset("harmonic-trap")


@pytest.fixture(scope="session")
def quartic_run():
    return solve_preset("quartic-trap")


@pytest.fixture(scope="session")
def gap_run():
    return solve_preset("periodic-gap-soliton")


@pytest.fixture(scope="session")
def asym_run():
    return solve_preset("asymptotically-linear")


@pytest.fixture(scope="session")
def presets_dir(tmp_path_factory):
    """All shipped scenario files exported to disk, for CLI-level tests."""
    target = tmp_path_factory.mktemp("presets")
    export_presets(target)
    return target
