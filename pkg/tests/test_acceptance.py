"""Acceptance gate: every shipped guarantee, one test per line of `pytest -v`.

Each test states a user-facing promise about the package — closed-form
agreement, envelope selection, exact ladder arithmetic, failure honesty,
numerical hygiene — and checks it at the advertised tolerance.  These are
deliberately end-to-end: they exercise the same code paths the CLI drives.
"""

import json
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from nlslab import (
    Constant,
    HalfLine,
    PurePower,
    assemble,
    build_W,
    build_grid,
    build_seed,
    cli,
    continuation_solve,
    eval_potential,
    fit_exponential,
    fit_stretched,
    jacobian,
    local_rate,
    lowest_eigenvalues,
    make_problem,
    make_solution_field,
    newton_solve,
    residual,
    run_bootstrap,
    spectral_report,
    verdict,
    verify_gain,
)


def _sech(x):
    return 1.0 / np.cosh(x)


def test_criterion_01_free_soliton_matches_closed_form(free_run):
    """Cubic problem on V = 1 reproduces sqrt(2)/cosh(x) and its unit rate."""
    cfg, field, trace = free_run.cfg, free_run.field, free_run.trace
    assert cfg.grid.half_width == 20.0 and cfg.grid.spacing == 0.01

    assert trace.outcome == "accepted"
    assert trace.iterations <= 20
    exact = math.sqrt(2.0) * _sech(field.grid.nodes())
    assert np.max(np.abs(field.values - exact)) <= 1e-4

    spec = spectral_report(cfg.grid, cfg.potential)
    assert isinstance(spec.essential, HalfLine) and spec.essential.threshold == 1.0
    assert spec.gap_distance == 1.0
    assert spec.hypothesis_ii_ok

    fit = fit_exponential(field, window=(10.0, 18.0))
    assert 0.99 <= fit.rate <= 1.01

    v = verdict("gap", spec, (fit,), cfg.potential)
    assert v.passed
    assert free_run.seconds <= 5.0


def test_criterion_02_harmonic_trap_prefers_gaussian_envelope(harmonic_run):
    """In V = x^2 the exp(-a x^2) envelope must outscore any plain exponential."""
    cfg, field = harmonic_run.cfg, harmonic_run.field
    assert harmonic_run.trace.outcome == "accepted"

    t0 = time.perf_counter()
    window = cfg.fit.window
    gaussian = fit_stretched(field, 2.0, window=window)
    plain = fit_stretched(field, 1.0, window=window)
    assert gaussian.r_squared >= 0.99
    assert gaussian.r_squared > plain.r_squared

    spec = spectral_report(cfg.grid, cfg.potential)
    v = verdict("power-law", spec, (gaussian, plain), cfg.potential)
    assert v.passed
    assert harmonic_run.seconds + (time.perf_counter() - t0) <= 10.0


def test_criterion_03_quartic_trap_steepens_to_cubic_envelope(quartic_run):
    """In V = x^4 the exp(-a |x|^3) envelope beats kappa = 2 and kappa = 1."""
    cfg, field = quartic_run.cfg, quartic_run.field
    assert quartic_run.trace.outcome == "accepted"

    t0 = time.perf_counter()
    window = cfg.fit.window
    cubic = fit_stretched(field, 3.0, window=window)
    gauss = fit_stretched(field, 2.0, window=window)
    plain = fit_stretched(field, 1.0, window=window)
    assert cubic.r_squared > gauss.r_squared
    assert cubic.r_squared > plain.r_squared

    spec = spectral_report(cfg.grid, cfg.potential)
    v = verdict("power-law", spec, (cubic, plain, gauss), cfg.potential)
    assert v.passed
    assert quartic_run.seconds + (time.perf_counter() - t0) <= 10.0


def test_criterion_04_harmonic_rate_climbs_outward(harmonic_run):
    """Faster-than-exponential decay: the local rate grows with |x|."""
    cfg, field = harmonic_run.cfg, harmonic_run.field
    profile = local_rate(field, floor=cfg.fit.rate_floor)
    assert profile.monotone_fraction >= 0.9

    inner = fit_exponential(field, window=(2.0, 4.0))
    outer = fit_exponential(field, window=(4.0, 6.0))
    assert outer.rate >= 1.5 * inner.rate


def test_criterion_05_lattice_gap_soliton(gap_run):
    """Continuation reaches a localized state in the semi-infinite lattice gap."""
    cfg, field, trace = gap_run.cfg, gap_run.field, gap_run.trace
    assert trace.outcome == "accepted"
    assert field.residual_norm <= 1e-9

    t0 = time.perf_counter()
    spec = spectral_report(
        cfg.grid, cfg.potential,
        window=cfg.spectrum.window, resolution=cfg.spectrum.resolution,
        steps=cfg.spectrum.steps,
    )
    assert spec.gap_distance >= 0.2
    assert spec.hypothesis_ii_ok

    fit = fit_exponential(field, window=cfg.fit.window)
    assert fit.rate > 0.0
    assert fit.r_squared >= 0.98

    v = verdict("gap", spec, (fit,), cfg.potential)
    assert v.passed
    assert gap_run.seconds + (time.perf_counter() - t0) <= 30.0


def test_criterion_06_saturating_nonlinearity_converges(asym_run):
    """Linear-growth saturation still yields a localized state with the gap rate."""
    cfg, field = asym_run.cfg, asym_run.field
    assert asym_run.trace.outcome == "accepted"
    assert field.nontrivial

    spec = spectral_report(cfg.grid, cfg.potential)
    assert spec.gap_distance == 0.5
    fit = fit_exponential(field, window=cfg.fit.window)
    assert abs(fit.rate - math.sqrt(0.5)) <= 0.01
    v = verdict("gap", spec, (fit,), cfg.potential)
    assert v.passed


def test_criterion_07_effective_potential_identities(free_run):
    """W = -f/u: tails match 2 sech^2 and (−Δ+V+W)u reproduces the residual."""
    cfg = free_run.cfg
    g = cfg.grid
    nl = cfg.nonlinearity
    v = free_run.v

    # (a) on the exactly sampled closed form the weight tail is 2 sech^2(R)
    exact = make_solution_field(
        g, v, nl, math.sqrt(2.0) * _sech(g.nodes()), origin="synthetic"
    )
    w_exact = build_W(exact, nl)
    for r_test in (5.0, 10.0, 15.0):
        want = 2.0 * _sech(r_test) ** 2
        got = w_exact.tail_sup(r_test)
        assert abs(got - want) <= 1e-6 * want

    # (b) on the computed state the operator identity holds to round-off
    field = free_run.field
    u = field.values
    w = build_W(field, nl)
    h = g.spacing
    interior = (
        (-u[:-2] + 2.0 * u[1:-1] - u[2:]) / (h * h)
        + (v[1:-1] + w.values[1:-1]) * u[1:-1]
    )
    assert abs(float(np.max(np.abs(interior))) - field.residual_norm) <= 1e-12


def test_criterion_08_bootstrap_ladder_exactness():
    """Exact rational ladder: worked examples, the gain identity, and a sweep."""
    cubic = run_bootstrap(make_problem(3, 3))
    assert cubic.k_star == 0
    assert [s.r for s in cubic.states] == [Fraction(6)]

    quintic_prob = make_problem(3, 5, Fraction(1, 2))
    quintic = run_bootstrap(quintic_prob)
    assert [s.r for s in quintic.states] == [Fraction(6), Fraction(12)]
    assert quintic.k_star == 1
    assert verify_gain(quintic_prob, quintic.states[0]) == Fraction(1, 12)

    # gain at the first rung is ((n-2)/2n) * eps, exactly
    for n, p in ((3, 5), (4, 3), (5, 3), (6, Fraction(7, 3))):
        prob = make_problem(n, p)
        run = run_bootstrap(prob)
        assert verify_gain(prob, run.states[0]) == Fraction(n - 2, 2 * n) * prob.eps

    t0 = time.perf_counter()
    rng = random.Random(0)
    for _ in range(200):
        n = rng.randint(3, 10)
        crit = Fraction(2 * n, n - 2)
        p = 2 + (crit - 2) * Fraction(rng.randint(1, 79), 80)
        sup = Fraction(4, n - 2) - (p - 2)
        eps = sup * Fraction(rng.randint(1, 79), 80)
        prob = make_problem(n, p, eps)
        run = run_bootstrap(prob)
        assert run.states[-1].terminated
        assert run.k_star == len(run.states) - 1
        for state in run.states:
            if state.q is not None:
                assert verify_gain(prob, state) > 0
    assert time.perf_counter() - t0 <= 1.0


def test_criterion_09_negative_controls(presets_dir, tmp_path, capsys):
    """Wrong inputs fail loudly: no silent pass on any broken hypothesis."""
    # 0 inside the essential spectrum: scientific failure, exit 1
    code = cli.main([
        "verify",
        "--config", str(presets_dir / "control-zero-in-essential-spectrum.toml"),
        "--out", str(tmp_path / "a"),
    ])
    assert code == 1
    doc = json.loads(
        (tmp_path / "a" / "control-zero-in-essential-spectrum" / "report.json").read_text()
    )
    assert doc["status"]["failed"] == ["hypothesis-ii"]
    assert doc["spectral"]["hypothesis_ii_ok"] is False

    # a tail far too slow for the gap it claims: verdict must fail
    code = cli.main([
        "verify",
        "--config", str(presets_dir / "control-slow-tail.toml"),
        "--out", str(tmp_path / "b"),
    ])
    assert code == 1
    doc = json.loads((tmp_path / "b" / "control-slow-tail" / "report.json").read_text())
    assert "verdict" in doc["status"]["failed"]
    assert doc["verdict"]["passed"] is False
    capsys.readouterr()

    # the zero seed converges instantly but must never count as success
    g = build_grid(20.0, 401)
    v = eval_potential(Constant(1.0), g)
    field, trace = newton_solve(g, v, PurePower(p=4.0), np.zeros(401))
    assert trace.converged
    assert trace.outcome == "trivial"
    assert not field.nontrivial


def test_criterion_10_numerical_hygiene(presets_dir, tmp_path, capsys):
    """Eigensolver agreement, Jacobian consistency, h^2 convergence, stable bytes."""
    # (a) banded path agrees with a dense symmetric eigensolve
    g = build_grid(6.0, 199)
    op = assemble(g, g.nodes() ** 2)
    vals = lowest_eigenvalues(op, 8)
    dense = np.zeros((g.num_points, g.num_points))
    h2 = g.spacing ** 2
    np.fill_diagonal(dense, 2.0 / h2 + g.nodes() ** 2)
    idx = np.arange(g.num_points - 1)
    dense[idx, idx + 1] = dense[idx + 1, idx] = -1.0 / h2
    ref = np.linalg.eigvalsh(dense)[:8]
    assert np.max(np.abs(np.array(vals) - ref)) <= 1e-9

    # (b) the assembled Jacobian is the derivative of the residual
    gj = build_grid(10.0, 501)
    vj = eval_potential(Constant(1.0), gj)
    nl = PurePower(p=4.0)
    u = 1.3 * _sech(gj.nodes())
    rng = np.random.default_rng(11)
    d = np.exp(-(gj.nodes() ** 2) / 8.0) * rng.normal(size=gj.num_points)
    d[0] = d[-1] = 0.0
    jac = jacobian(gj, vj, nl, u)

    def remainder(t):
        lhs = residual(gj, vj, nl, u + t * d)
        rhs = residual(gj, vj, nl, u) + t * jac.apply(d)
        return np.max(np.abs(lhs - rhs)[1:-1])

    ratio = remainder(1e-3) / remainder(1e-4)
    assert 50.0 <= ratio <= 200.0

    # (c) halving h shrinks the closed-form error by ~4 (second order)
    errors = []
    for n in (2001, 4001, 8001):
        gr = build_grid(20.0, n)
        vr = eval_potential(Constant(1.0), gr)
        seed = 1.5 * _sech(gr.nodes())
        fr, _ = continuation_solve(gr, vr, nl, seed, (1.0,))
        errors.append(np.max(np.abs(fr.values - math.sqrt(2.0) * _sech(gr.nodes()))))
    for coarse, fine in zip(errors, errors[1:]):
        assert 3.0 <= coarse / fine <= 5.0

    # (d) two stable-output runs of the same scenario are byte-identical
    outs = []
    for tag in ("x", "y"):
        out = tmp_path / tag
        assert cli.main([
            "verify", "--config", str(presets_dir / "free-soliton.toml"),
            "--out", str(out), "--stable-output",
        ]) == 0
        outs.append(out / "free-soliton")
    capsys.readouterr()
    assert (outs[0] / "report.json").read_bytes() == (outs[1] / "report.json").read_bytes()
    assert (outs[0] / "solution.csv").read_bytes() == (outs[1] / "solution.csv").read_bytes()
