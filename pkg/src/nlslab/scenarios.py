"""Scenario configuration: schema, seed profiles, and shipped presets.

A scenario is a TOML document that pins down one end-to-end run:
grid + potential (spectrum stage), nonlinearity + seed + solver
(solve stage), fit windows + verdict branch (decay stage), and an
optional exact-arithmetic bootstrap block.  Parsing is strict — any
unknown table or key is rejected with its path — because scenario
files double as regression fixtures and a silently ignored typo
would quietly change what a fixture tests.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - 3.10 fallback
    import tomli as tomllib

from .errors import ConfigError
from .model import (
    AsymptoticallyLinear,
    ConfiningPower,
    Constant,
    Grid,
    Nonlinearity,
    PeriodicCosine,
    Potential,
    PurePower,
    SaturableScaled,
    Tabulated,
    build_grid,
)
from . import spectral as _spectral
from . import decay as _decay

__all__ = [
    "ScenarioConfig",
    "SpectrumSettings",
    "SolverSettings",
    "FitSettings",
    "VerdictSettings",
    "load_scenario",
    "parse_scenario",
    "build_seed",
    "preset_names",
    "load_preset_text",
    "export_presets",
]

SEED_PROFILES = ("sech", "gaussian", "bloch-modulated", "exp", "zero")


# --------------------------------------------------------------------------
# Strict table walking.


def _check_keys(table: dict, allowed: dict, path: str) -> None:
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key '{path}{key}' (allowed: {sorted(allowed)})")


def _number(table: dict, key: str, path: str, default=None, required=False):
    if key not in table:
        if required:
            raise ConfigError(f"missing required key '{path}{key}'")
        return default
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"'{path}{key}' must be a number, got {v!r}")
    return float(v)


def _integer(table: dict, key: str, path: str, default=None, required=False):
    if key not in table:
        if required:
            raise ConfigError(f"missing required key '{path}{key}'")
        return default
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"'{path}{key}' must be an integer, got {v!r}")
    return v


def _string(table: dict, key: str, path: str, default=None, required=False, choices=None):
    if key not in table:
        if required:
            raise ConfigError(f"missing required key '{path}{key}'")
        return default
    v = table[key]
    if not isinstance(v, str):
        raise ConfigError(f"'{path}{key}' must be a string, got {v!r}")
    if choices is not None and v not in choices:
        raise ConfigError(f"'{path}{key}' must be one of {sorted(choices)}, got {v!r}")
    return v


def _number_list(table: dict, key: str, path: str, default=None, required=False):
    if key not in table:
        if required:
            raise ConfigError(f"missing required key '{path}{key}'")
        return default
    v = table[key]
    if not isinstance(v, list) or not v or any(
        isinstance(e, bool) or not isinstance(e, (int, float)) for e in v
    ):
        raise ConfigError(f"'{path}{key}' must be a nonempty list of numbers")
    return [float(e) for e in v]


def _pair(table: dict, key: str, path: str, default=None, required=False):
    v = _number_list(table, key, path, default=None, required=required)
    if v is None:
        return default
    if len(v) != 2:
        raise ConfigError(f"'{path}{key}' must be a pair [low, high]")
    return (v[0], v[1])


# --------------------------------------------------------------------------
# Section parsers.


def _parse_potential(table: dict) -> Potential:
    kind = _string(table, "kind", "potential.", required=True,
                   choices=("constant", "periodic-cosine", "confining-power", "tabulated"))
    if kind == "constant":
        _check_keys(table, {"kind": 1, "value": 1}, "potential.")
        return Constant(_number(table, "value", "potential.", required=True))
    if kind == "periodic-cosine":
        _check_keys(
            table,
            {"kind": 1, "mean": 1, "amplitudes": 1, "wavenumbers": 1, "period": 1},
            "potential.",
        )
        return PeriodicCosine(
            mean=_number(table, "mean", "potential.", default=0.0),
            amplitudes=tuple(_number_list(table, "amplitudes", "potential.", required=True)),
            wavenumbers=tuple(_number_list(table, "wavenumbers", "potential.", required=True)),
            period=_number(table, "period", "potential.", required=True),
        )
    if kind == "confining-power":
        _check_keys(table, {"kind": 1, "gamma": 1, "beta": 1, "offset": 1}, "potential.")
        return ConfiningPower(
            gamma=_number(table, "gamma", "potential.", default=1.0),
            beta=_number(table, "beta", "potential.", required=True),
            offset=_number(table, "offset", "potential.", default=0.0),
        )
    _check_keys(table, {"kind": 1, "samples": 1, "spectral_class": 1}, "potential.")
    samples = _number_list(table, "samples", "potential.", required=True)
    sc = table.get("spectral_class")
    if not isinstance(sc, list):
        raise ConfigError("'potential.spectral_class' must be a list")
    return Tabulated(samples=tuple(samples), spectral_class=tuple(sc))


def _parse_nonlinearity(table: dict) -> Nonlinearity:
    kind = _string(table, "kind", "nonlinearity.", required=True,
                   choices=("pure-power", "asymptotically-linear", "saturable"))
    if kind == "pure-power":
        _check_keys(table, {"kind": 1, "p": 1}, "nonlinearity.")
        return PurePower(p=_number(table, "p", "nonlinearity.", required=True))
    if kind == "asymptotically-linear":
        _check_keys(table, {"kind": 1}, "nonlinearity.")
        return AsymptoticallyLinear()
    _check_keys(table, {"kind": 1, "amplitude": 1, "saturation": 1}, "nonlinearity.")
    return SaturableScaled(
        amplitude=_number(table, "amplitude", "nonlinearity.", required=True),
        saturation=_number(table, "saturation", "nonlinearity.", required=True),
    )


@dataclass(frozen=True)
class SpectrumSettings:
    num_eigenvalues: int = 8
    eigenvalue_cutoff: float = math.inf
    window: tuple[float, float] = _spectral.DEFAULT_SCAN_WINDOW
    resolution: float = _spectral.DEFAULT_SCAN_RESOLUTION
    steps: int = _spectral.DEFAULT_MONODROMY_STEPS
    spectral_tol: float = 1e-6
    zero_eigenvalue_tol: float = 1e-6


@dataclass(frozen=True)
class SolverSettings:
    mode: str = "newton"  # "newton" | "synthetic"
    ladder: tuple[float, ...] = (1.0,)
    tol: float = 1e-10
    max_iter: int = 100


@dataclass(frozen=True)
class FitSettings:
    window: tuple[float, float] | None = None  # None -> [0.5 L, 0.9 L]
    floor: float = _decay.DEFAULT_FLOOR
    rate_floor: float = 1e-9


@dataclass(frozen=True)
class VerdictSettings:
    branch: str  # "gap" | "discrete" | "power-law"
    windows: tuple[tuple[float, float], ...] = ()
    baseline_kappas: tuple[float, ...] = (1.0,)


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    description: str
    grid: Grid
    potential: Potential
    nonlinearity: Nonlinearity | None
    seed: dict | None
    solver: SolverSettings
    spectrum: SpectrumSettings
    fit: FitSettings
    verdict: VerdictSettings | None
    vanishing_radii: tuple[float, ...]
    bootstrap: dict | None
    sha256: str
    source: str = field(default="<memory>", compare=False)


_TOP_KEYS = {
    "name": 1, "description": 1, "grid": 1, "potential": 1, "nonlinearity": 1,
    "seed": 1, "solver": 1, "spectrum": 1, "fit": 1, "verdict": 1,
    "vanishing": 1, "bootstrap": 1,
}


def parse_scenario(text: str, source: str = "<memory>") -> ScenarioConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: not valid TOML: {exc}") from exc
    _check_keys(doc, _TOP_KEYS, "")

    name = _string(doc, "name", "", required=True)
    description = _string(doc, "description", "", default="")

    for req in ("grid", "potential"):
        if req not in doc or not isinstance(doc[req], dict):
            raise ConfigError(f"{source}: missing required table [{req}]")

    gt = doc["grid"]
    _check_keys(gt, {"half_width": 1, "num_points": 1}, "grid.")
    grid = build_grid(
        _number(gt, "half_width", "grid.", required=True),
        _integer(gt, "num_points", "grid.", required=True),
    )

    potential = _parse_potential(doc["potential"])

    nonlinearity = None
    if "nonlinearity" in doc:
        nonlinearity = _parse_nonlinearity(doc["nonlinearity"])

    seed = None
    if "seed" in doc:
        st = doc["seed"]
        profile = _string(st, "profile", "seed.", required=True, choices=SEED_PROFILES)
        allowed = {
            "sech": {"profile": 1, "scale": 1, "steepness": 1},
            "gaussian": {"profile": 1, "scale": 1, "width": 1},
            "bloch-modulated": {"profile": 1, "scale": 1, "steepness": 1, "depth": 1, "carrier": 1},
            "exp": {"profile": 1, "scale": 1, "rate": 1},
            "zero": {"profile": 1},
        }[profile]
        _check_keys(st, allowed, "seed.")
        seed = {"profile": profile}
        for k in allowed:
            if k != "profile" and k in st:
                seed[k] = _number(st, k, "seed.")

    sv = doc.get("solver", {})
    _check_keys(sv, {"mode": 1, "ladder": 1, "tol": 1, "max_iter": 1}, "solver.")
    solver = SolverSettings(
        mode=_string(sv, "mode", "solver.", default="newton", choices=("newton", "synthetic")),
        ladder=tuple(_number_list(sv, "ladder", "solver.", default=[1.0])),
        tol=_number(sv, "tol", "solver.", default=1e-10),
        max_iter=_integer(sv, "max_iter", "solver.", default=100),
    )

    sp = doc.get("spectrum", {})
    _check_keys(
        sp,
        {"num_eigenvalues": 1, "eigenvalue_cutoff": 1, "window": 1, "resolution": 1,
         "steps": 1, "spectral_tol": 1, "zero_eigenvalue_tol": 1},
        "spectrum.",
    )
    spectrum = SpectrumSettings(
        num_eigenvalues=_integer(sp, "num_eigenvalues", "spectrum.", default=8),
        eigenvalue_cutoff=_number(sp, "eigenvalue_cutoff", "spectrum.", default=math.inf),
        window=_pair(sp, "window", "spectrum.", default=_spectral.DEFAULT_SCAN_WINDOW),
        resolution=_number(sp, "resolution", "spectrum.", default=_spectral.DEFAULT_SCAN_RESOLUTION),
        steps=_integer(sp, "steps", "spectrum.", default=_spectral.DEFAULT_MONODROMY_STEPS),
        spectral_tol=_number(sp, "spectral_tol", "spectrum.", default=1e-6),
        zero_eigenvalue_tol=_number(sp, "zero_eigenvalue_tol", "spectrum.", default=1e-6),
    )

    ft = doc.get("fit", {})
    _check_keys(ft, {"window": 1, "floor": 1, "rate_floor": 1}, "fit.")
    fit = FitSettings(
        window=_pair(ft, "window", "fit.", default=None),
        floor=_number(ft, "floor", "fit.", default=_decay.DEFAULT_FLOOR),
        rate_floor=_number(ft, "rate_floor", "fit.", default=1e-9),
    )

    verdict = None
    if "verdict" in doc:
        vt = doc["verdict"]
        _check_keys(vt, {"branch": 1, "windows": 1, "baseline_kappas": 1}, "verdict.")
        branch = _string(vt, "branch", "verdict.", required=True,
                         choices=("gap", "discrete", "power-law"))
        windows: tuple[tuple[float, float], ...] = ()
        if "windows" in vt:
            raw = vt["windows"]
            if not isinstance(raw, list) or any(not isinstance(w, list) or len(w) != 2 for w in raw):
                raise ConfigError("'verdict.windows' must be a list of [low, high] pairs")
            windows = tuple(
                (float(w[0]), float(w[1])) for w in raw
            )
        verdict = VerdictSettings(
            branch=branch,
            windows=windows,
            baseline_kappas=tuple(_number_list(vt, "baseline_kappas", "verdict.", default=[1.0])),
        )

    vanishing: tuple[float, ...] = ()
    if "vanishing" in doc:
        va = doc["vanishing"]
        _check_keys(va, {"radii": 1}, "vanishing.")
        vanishing = tuple(_number_list(va, "radii", "vanishing.", required=True))

    bootstrap = None
    if "bootstrap" in doc:
        bt = doc["bootstrap"]
        _check_keys(bt, {"n": 1, "p": 1, "eps": 1}, "bootstrap.")
        bootstrap = {
            "n": _integer(bt, "n", "bootstrap.", required=True),
            "p": bt.get("p"),
            "eps": bt.get("eps"),
        }
        if bootstrap["p"] is None:
            raise ConfigError("missing required key 'bootstrap.p'")

    return ScenarioConfig(
        name=name,
        description=description,
        grid=grid,
        potential=potential,
        nonlinearity=nonlinearity,
        seed=seed,
        solver=solver,
        spectrum=spectrum,
        fit=fit,
        verdict=verdict,
        vanishing_radii=vanishing,
        bootstrap=bootstrap,
        sha256=hashlib.sha256(text.encode("utf-8")).hexdigest(),
        source=source,
    )


def load_scenario(path) -> ScenarioConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {p}: {exc}") from exc
    return parse_scenario(text, source=str(p))


# --------------------------------------------------------------------------
# Seed profiles.


def build_seed(grid: Grid, seed: dict) -> np.ndarray:
    """Evaluate a named seed profile on the grid."""
    x = grid.nodes()
    profile = seed["profile"]
    if profile == "zero":
        return np.zeros_like(x)
    if profile == "sech":
        scale = seed.get("scale", 1.0)
        steep = seed.get("steepness", 1.0)
        return scale / np.cosh(steep * x)
    if profile == "gaussian":
        scale = seed.get("scale", 1.0)
        width = seed.get("width", 1.0)
        return scale * np.exp(-(x * x) / (2.0 * width * width))
    if profile == "bloch-modulated":
        scale = seed.get("scale", 1.0)
        steep = seed.get("steepness", 1.0)
        depth = seed.get("depth", 0.5)
        carrier = seed.get("carrier", 2.0)
        return scale / np.cosh(steep * x) * (1.0 + depth * np.cos(carrier * x))
    if profile == "exp":
        scale = seed.get("scale", 1.0)
        rate = seed.get("rate")
        if rate is None:
            raise ConfigError("exp seed profile requires a 'rate'")
        return scale * np.exp(-rate * np.abs(x))
    raise ConfigError(f"unknown seed profile {profile!r}")  # pragma: no cover


# --------------------------------------------------------------------------
# Shipped presets.


def preset_names() -> tuple[str, ...]:
    from importlib import resources

    files = resources.files(__package__).joinpath("presets")
    return tuple(sorted(p.name[: -len(".toml")] for p in files.iterdir()
                        if p.name.endswith(".toml")))


def load_preset_text(name: str) -> str:
    from importlib import resources

    path = resources.files(__package__).joinpath("presets", f"{name}.toml")
    try:
        return path.read_text(encoding="utf-8")
    except (FileNotFoundError, OSError) as exc:
        raise ConfigError(
            f"no preset named {name!r}; available: {', '.join(preset_names())}"
        ) from exc


def export_presets(target_dir) -> list[str]:
    """Copy every packaged scenario file into target_dir; returns the paths."""
    out = Path(target_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in preset_names():
        dest = out / f"{name}.toml"
        dest.write_text(load_preset_text(name), encoding="utf-8")
        written.append(str(dest))
    return written
