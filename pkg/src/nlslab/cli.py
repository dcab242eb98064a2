"""Command-line front end.

The scenario-driven subcommands share one contract:

    spectrum   spectral stage only: eigenvalues, essential spectrum, gap
    solve      spectral-free solve stage: Newton/continuation or synthetic
    verify     full pipeline: spectrum gate -> solve -> decay verdicts
    bootstrap  exact integrability ladder for (n, p [, eps]); no scenario
    batch      verify every scenario file in a directory, in parallel
    presets    list or export the scenario files shipped with the package

Exit status is part of the interface: 0 means every scientific check
passed, 1 means the run completed but a check failed (bad verdict,
non-convergence, hypothesis rejected), 2 means the configuration or
invocation was unusable.  Scenario commands write a run directory
containing report.json (canonical, byte-stable under --stable-output),
solution.csv, and rendered figures.
"""

from __future__ import annotations

import argparse
import sys
import threading
import time
from fractions import Fraction
from pathlib import Path

from . import report as rep
from .bootstrap import make_problem, run_bootstrap
from .decay import (
    build_W,
    check_vanishing,
    fit_exponential,
    fit_stretched,
    local_rate,
    verdict as decay_verdict,
)
from .errors import (
    ConfigError,
    LabError,
    NonConvergenceError,
    NumericalFailureError,
    SingularJacobianError,
)
from .model import ConfiningPower, eval_potential
from .scenarios import (
    ScenarioConfig,
    build_seed,
    export_presets,
    load_scenario,
    preset_names,
)
from .solver import continuation_solve, make_solution_field
from .spectral import spectral_report

__all__ = ["main"]

EXIT_OK = 0
EXIT_SCIENTIFIC = 1
EXIT_CONFIG = 2

# matplotlib's figure state is process-global; serialize rendering so the
# batch command can run scenarios on a thread pool.
_FIG_LOCK = threading.Lock()


def _version() -> str:
    try:
        from importlib.metadata import version

        return version("nlslab")
    except Exception:  # pragma: no cover - not installed
        return "0.0.0"


def _meta(cfg: ScenarioConfig, command: str) -> dict:
    return {
        "command": command,
        "scenario": cfg.name,
        "description": cfg.description,
        "config_sha256": cfg.sha256,
        "config_file": Path(cfg.source).name,
        "grid": {
            "half_width": cfg.grid.half_width,
            "num_points": cfg.grid.num_points,
            "spacing": cfg.grid.spacing,
        },
        "package_version": _version(),
    }


def _prepare_run_dir(out_dir: str, name: str, force: bool) -> Path:
    run = Path(out_dir) / name
    if (run / "report.json").exists() and not force:
        raise ConfigError(
            f"run directory {run} already holds a report; pass --force to overwrite"
        )
    run.mkdir(parents=True, exist_ok=True)
    return run


def _finish(doc: dict, run_dir: Path, failed: list[str], timings: dict, stable: bool) -> int:
    code = EXIT_OK if not failed else EXIT_SCIENTIFIC
    doc["status"] = {
        "ok": not failed,
        "failed": sorted(failed),
        "exit_code": code,
        "reason": "ok" if not failed else "failed: " + ", ".join(sorted(failed)),
    }
    if not stable:
        doc["timings"] = {k: rep.encode_float(v) for k, v in timings.items()}
    doc["artifacts"] = sorted(p.name for p in run_dir.iterdir() if p.is_file())
    doc["artifacts"].append("report.json")
    doc["artifacts"] = sorted(set(doc["artifacts"]))
    rep.RunReport(doc).write(run_dir / "report.json")
    return code


def _spectral_stage(cfg: ScenarioConfig):
    s = cfg.spectrum
    return spectral_report(
        cfg.grid,
        cfg.potential,
        num_eigenvalues=s.num_eigenvalues,
        eigenvalue_cutoff=s.eigenvalue_cutoff,
        window=s.window,
        resolution=s.resolution,
        steps=s.steps,
        spectral_tol=s.spectral_tol,
        zero_eigenvalue_tol=s.zero_eigenvalue_tol,
    )


def _solve_stage(cfg: ScenarioConfig):
    """Returns (field, trace|None); trace is None exactly in synthetic mode."""
    if cfg.nonlinearity is None:
        raise ConfigError("scenario has no [nonlinearity] table; nothing to solve")
    if cfg.seed is None:
        raise ConfigError("scenario has no [seed] table; nothing to start from")
    v = eval_potential(cfg.potential, cfg.grid)
    u0 = build_seed(cfg.grid, cfg.seed)
    if cfg.solver.mode == "synthetic":
        return make_solution_field(cfg.grid, v, cfg.nonlinearity, u0, origin="synthetic"), None
    return continuation_solve(
        cfg.grid, v, cfg.nonlinearity, u0, cfg.solver.ladder,
        tol=cfg.solver.tol, max_iter=cfg.solver.max_iter,
    )


def _branch_fits(cfg: ScenarioConfig, field):
    """(fits, rate_profile) as prescribed by the scenario's verdict branch."""
    if cfg.verdict is None:
        raise ConfigError("verify needs a [verdict] table in the scenario")
    window = cfg.fit.window
    floor = cfg.fit.floor
    branch = cfg.verdict.branch
    if branch == "gap":
        return (fit_exponential(field, window, floor),), None
    if branch == "discrete":
        if len(cfg.verdict.windows) < 2:
            raise ConfigError(
                "discrete branch needs at least two [verdict] windows ordered outward"
            )
        fits = tuple(fit_exponential(field, w, floor) for w in cfg.verdict.windows)
        profile = local_rate(field, floor=cfg.fit.rate_floor)
        return fits, profile
    # power-law
    if not isinstance(cfg.potential, ConfiningPower):
        raise ConfigError("power-law branch requires a confining-power potential")
    target = cfg.potential.beta / 2.0 + 1.0
    fits = [fit_stretched(field, target, window, floor)]
    fits.extend(fit_stretched(field, k, window, floor) for k in cfg.verdict.baseline_kappas)
    return tuple(fits), None


def _weight_radii(cfg: ScenarioConfig) -> tuple[float, ...]:
    if cfg.vanishing_radii:
        return cfg.vanishing_radii
    L = cfg.grid.half_width
    return (0.25 * L, 0.5 * L, 0.75 * L)


def _render(fn, *args, **kwargs) -> None:
    with _FIG_LOCK:
        fn(*args, **kwargs)


def _run_spectrum(cfg: ScenarioConfig, run_dir: Path, stable: bool):
    doc = {"meta": _meta(cfg, "spectrum")}
    t0 = time.perf_counter()
    spec = _spectral_stage(cfg)
    timings = {"spectrum_s": time.perf_counter() - t0}
    doc["spectral"] = rep.spectral_section(spec)
    _render(
        rep.save_spectrum_figure,
        cfg.potential, spec, run_dir / "spectrum.png",
        f"{cfg.name}: spectral picture",
        window=cfg.spectrum.window, steps=cfg.spectrum.steps,
    )
    failed = [] if spec.hypothesis_ii_ok else ["hypothesis-ii"]
    code = _finish(doc, run_dir, failed, timings, stable)
    return code, doc


def _run_solve(cfg: ScenarioConfig, run_dir: Path, stable: bool):
    doc = {"meta": _meta(cfg, "solve")}
    timings = {}
    t0 = time.perf_counter()
    try:
        field, trace = _solve_stage(cfg)
    except NonConvergenceError as exc:
        timings["solve_s"] = time.perf_counter() - t0
        doc["solution"] = _failure_section(exc)
        code = _finish(doc, run_dir, ["newton-convergence"], timings, stable)
        return code, doc
    except SingularJacobianError as exc:
        timings["solve_s"] = time.perf_counter() - t0
        doc["solution"] = {"origin": "newton", "error": str(exc)}
        code = _finish(doc, run_dir, ["newton-linear-solve"], timings, stable)
        return code, doc
    timings["solve_s"] = time.perf_counter() - t0

    doc["solution"] = rep.solution_section(field, trace)
    w = build_W(field, cfg.nonlinearity)
    x = field.grid.nodes()
    rep.write_csv(run_dir / "solution.csv", x, field.values, w.values)
    _render(rep.save_solution_figure, field, w, run_dir / "solution.png",
            f"{cfg.name}: solution and effective potential")

    failed = []
    if trace is not None and trace.outcome != "accepted":
        failed.append("nontrivial")
    elif trace is None and not field.nontrivial:
        failed.append("nontrivial")
    code = _finish(doc, run_dir, failed, timings, stable)
    return code, doc


def _failure_section(exc: NonConvergenceError) -> dict:
    doc = {"origin": "newton", "error": str(exc)}
    if exc.trace is not None:
        doc["newton"] = {
            "iterations": exc.trace.iterations,
            "converged": exc.trace.converged,
            "outcome": exc.trace.outcome,
            "final_residual": rep.encode_float(exc.trace.residual_history[-1]),
        }
    if exc.ladder_position is not None:
        doc["ladder_position"] = exc.ladder_position
    return doc


def _run_verify(cfg: ScenarioConfig, run_dir: Path, stable: bool):
    doc = {"meta": _meta(cfg, "verify")}
    timings = {}

    t0 = time.perf_counter()
    spec = _spectral_stage(cfg)
    timings["spectrum_s"] = time.perf_counter() - t0
    doc["spectral"] = rep.spectral_section(spec)
    _render(
        rep.save_spectrum_figure,
        cfg.potential, spec, run_dir / "spectrum.png",
        f"{cfg.name}: spectral picture",
        window=cfg.spectrum.window, steps=cfg.spectrum.steps,
    )
    if not spec.hypothesis_ii_ok:
        code = _finish(doc, run_dir, ["hypothesis-ii"], timings, stable)
        return code, doc

    t0 = time.perf_counter()
    try:
        field, trace = _solve_stage(cfg)
    except NonConvergenceError as exc:
        timings["solve_s"] = time.perf_counter() - t0
        doc["solution"] = _failure_section(exc)
        code = _finish(doc, run_dir, ["newton-convergence"], timings, stable)
        return code, doc
    except SingularJacobianError as exc:
        timings["solve_s"] = time.perf_counter() - t0
        doc["solution"] = {"origin": "newton", "error": str(exc)}
        code = _finish(doc, run_dir, ["newton-linear-solve"], timings, stable)
        return code, doc
    timings["solve_s"] = time.perf_counter() - t0
    doc["solution"] = rep.solution_section(field, trace)

    if not field.nontrivial:
        code = _finish(doc, run_dir, ["nontrivial"], timings, stable)
        return code, doc

    t0 = time.perf_counter()
    w = build_W(field, cfg.nonlinearity)
    doc["weight"] = rep.weight_section(w, _weight_radii(cfg))
    vanishing = None
    if cfg.vanishing_radii:
        vanishing = check_vanishing(w, cfg.vanishing_radii)
        doc["vanishing"] = rep.vanishing_section(vanishing)
    fits, profile = _branch_fits(cfg, field)
    doc["fits"] = rep.fits_section(fits)
    if profile is not None:
        doc["rate_profile"] = rep.rate_section(profile)
    v = decay_verdict(cfg.verdict.branch, spec, fits, cfg.potential, profile)
    doc["verdict"] = rep.verdict_section(v)
    timings["decay_s"] = time.perf_counter() - t0

    if cfg.bootstrap is not None:
        prob = make_problem(cfg.bootstrap["n"], cfg.bootstrap["p"], cfg.bootstrap["eps"])
        doc["bootstrap"] = rep.bootstrap_section(run_bootstrap(prob))

    x = field.grid.nodes()
    rep.write_csv(run_dir / "solution.csv", x, field.values, w.values)
    _render(rep.save_solution_figure, field, w, run_dir / "solution.png",
            f"{cfg.name}: solution and effective potential")
    _render(rep.save_decay_figure, field, fits, run_dir / "decay.png",
            f"{cfg.name}: tail envelope ({cfg.verdict.branch} branch)", cfg.fit.floor)

    failed = []
    if not field.boundary_ok:
        failed.append("boundary")
    if vanishing is not None and not vanishing.passed:
        failed.append("vanishing")
    if not v.passed:
        failed.append("verdict")
    code = _finish(doc, run_dir, failed, timings, stable)
    return code, doc


# --------------------------------------------------------------------------
# Subcommand handlers.


def cmd_spectrum(args) -> int:
    cfg = load_scenario(args.config)
    run_dir = _prepare_run_dir(args.out, cfg.name, args.force)
    code, doc = _run_spectrum(cfg, run_dir, args.stable_output)
    sp = doc["spectral"]
    print(f"{cfg.name}: essential spectrum kind={sp['essential']['kind']}, "
          f"dist(0, sigma_ess) = {sp['gap_distance']}, "
          f"hypothesis (ii) {'holds' if sp['hypothesis_ii_ok'] else 'FAILS'}")
    print(f"{cfg.name}: lowest eigenvalues {['%.6g' % e for e in sp['eigenvalues']]}")
    print(f"{cfg.name}: {'PASS' if code == 0 else 'FAIL'} (exit {code}) -> {run_dir}")
    return code


def cmd_solve(args) -> int:
    cfg = load_scenario(args.config)
    run_dir = _prepare_run_dir(args.out, cfg.name, args.force)
    code, doc = _run_solve(cfg, run_dir, args.stable_output)
    sol = doc["solution"]
    if "newton" in sol:
        n = sol["newton"]
        print(f"{cfg.name}: newton {n['outcome']} after {n['iterations']} iterations, "
              f"residual {n['final_residual']}")
    elif "error" in sol:
        print(f"{cfg.name}: {sol['error']}")
    else:
        print(f"{cfg.name}: synthetic field injected, sup norm {sol['sup_norm']}")
    print(f"{cfg.name}: {'PASS' if code == 0 else 'FAIL'} (exit {code}) -> {run_dir}")
    return code


def cmd_verify(args) -> int:
    cfg = load_scenario(args.config)
    run_dir = _prepare_run_dir(args.out, cfg.name, args.force)
    code, doc = _run_verify(cfg, run_dir, args.stable_output)
    sp = doc["spectral"]
    print(f"{cfg.name}: dist(0, sigma_ess) = {sp['gap_distance']}, "
          f"hypothesis (ii) {'holds' if sp['hypothesis_ii_ok'] else 'FAILS'}")
    sol = doc.get("solution")
    if sol and "newton" in sol:
        n = sol["newton"]
        print(f"{cfg.name}: newton {n['outcome']} after {n['iterations']} iterations, "
              f"residual {n['final_residual']}")
    elif sol and "error" in sol:
        print(f"{cfg.name}: {sol['error']}")
    if "verdict" in doc:
        v = doc["verdict"]
        print(f"{cfg.name}: {v['branch']} verdict "
              f"{'PASS' if v['passed'] else 'FAIL'} - {v['detail']}")
    if "bootstrap" in doc:
        b = doc["bootstrap"]
        print(f"{cfg.name}: bootstrap k* = {b['k_star']} ({b['reason']})")
    print(f"{cfg.name}: {'PASS' if code == 0 else 'FAIL'} (exit {code}) -> {run_dir}")
    return code


def _exact(text: str | None, name: str):
    if text is None:
        return None
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse {name}={text!r} as a rational 'a/b'") from exc


def cmd_bootstrap(args) -> int:
    prob = make_problem(args.n, _exact(args.p, "p"), _exact(args.eps, "eps"))
    run = run_bootstrap(prob)
    print(f"dimension n = {prob.n}, growth p = {prob.p}"
          + (f", slack eps = {prob.eps}" if prob.eps is not None else ""))
    if prob.n >= 3:
        print(f"critical exponent 2* = {prob.two_star}, delta = {prob.delta}, "
              f"termination threshold n(p-1)/2 = {prob.threshold}")
        print(f"{'k':>4} {'r':>12} {'s = r/(p-1)':>14} {'q = r/(1-delta)':>16}")
        for st in run.states:
            q = "-" if st.q is None else str(st.q)
            mark = "  <- terminated" if st.terminated else ""
            print(f"{st.k:>4} {str(st.r):>12} {str(st.s):>14} {q:>16}{mark}")
    print(f"k* = {run.k_star} ({run.reason}; "
          f"{'slack used' if run.delta_used else 'slack not needed'})")
    if args.out is not None:
        run_dir = _prepare_run_dir(args.out, "bootstrap", args.force)
        doc = {
            "meta": {"command": "bootstrap", "package_version": _version()},
            "bootstrap": rep.bootstrap_section(run),
            "status": {"ok": True, "failed": [], "exit_code": 0, "reason": "ok"},
        }
        rep.RunReport(doc).write(run_dir / "report.json")
        print(f"bootstrap: PASS (exit 0) -> {run_dir}")
    return EXIT_OK


def cmd_presets(args) -> int:
    if args.export is not None:
        for written in export_presets(args.export):
            print(written)
    else:
        for name in preset_names():
            print(name)
    return EXIT_OK


def _batch_worker(path: Path, out: str, force: bool, stable: bool):
    name = path.stem
    try:
        cfg = load_scenario(path)
        name = cfg.name
        run_dir = _prepare_run_dir(out, cfg.name, force)
        code, doc = _run_verify(cfg, run_dir, stable)
        return name, code, doc["status"]["reason"]
    except ConfigError as exc:
        return name, EXIT_CONFIG, f"config error: {exc}"
    except LabError as exc:
        return name, EXIT_SCIENTIFIC, f"numerical failure: {exc}"


def cmd_batch(args) -> int:
    root = Path(args.config)
    if root.is_dir():
        files = sorted(root.glob("*.toml"))
    elif root.is_file():
        files = [root]
    else:
        raise ConfigError(f"batch target {root} is neither a file nor a directory")
    if not files:
        raise ConfigError(f"no scenario files (*.toml) found under {root}")
    if args.threads < 1:
        raise ConfigError("--threads must be at least 1")

    if args.threads == 1:
        results = [_batch_worker(f, args.out, args.force, args.stable_output) for f in files]
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            results = list(
                pool.map(lambda f: _batch_worker(f, args.out, args.force, args.stable_output), files)
            )

    results.sort(key=lambda t: t[0])
    counts = {"ok": 0, "scientific": 0, "config": 0}
    for name, code, reason in results:
        counts[("ok", "scientific", "config")[code]] += 1
        print(f"{name}: exit {code} ({reason})")
    doc = {
        "meta": {"command": "batch", "package_version": _version()},
        "runs": [
            {"name": n, "exit_code": c, "reason": r} for n, c, r in results
        ],
        "counts": counts,
    }
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rep.RunReport(doc).write(out_dir / "batch.json")
    worst = max(c for _, c, _ in results)
    print(f"batch: {counts['ok']} ok, {counts['scientific']} failed, "
          f"{counts['config']} unusable (exit {worst})")
    return worst


# --------------------------------------------------------------------------
# Parser.


def _add_run_flags(sp, with_threads: bool = False) -> None:
    sp.add_argument("--config", required=True,
                    help="scenario file (TOML); for batch, a directory of them")
    sp.add_argument("--out", default="nlslab-out",
                    help="parent directory for run artifacts (default: nlslab-out)")
    sp.add_argument("--force", action="store_true",
                    help="overwrite a run directory that already holds a report")
    sp.add_argument("--stable-output", action="store_true",
                    help="omit wall-clock timings so identical configs give identical bytes")
    if with_threads:
        sp.add_argument("--threads", type=int, default=1,
                        help="scenario-level parallelism for batch (default: 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlslab",
        description="Numerical laboratory for stationary nonlinear Schrodinger "
                    "equations on a truncated line: spectra, solves, decay verdicts, "
                    "and an exact integrability bootstrap.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="spectral stage only")
    _add_run_flags(sp)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("solve", help="solve stage only (Newton/continuation or synthetic)")
    _add_run_flags(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("verify", help="full pipeline with decay verdict")
    _add_run_flags(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("bootstrap", help="exact integrability ladder for (n, p [, eps])")
    sp.add_argument("n", type=int, help="spatial dimension (integer >= 1)")
    sp.add_argument("p", help="growth exponent, exact: integer or rational like 7/2")
    sp.add_argument("--eps", default=None, help="slack, exact rational (default: half the supremum)")
    sp.add_argument("--out", default=None, help="also write a canonical JSON report here")
    sp.add_argument("--force", action="store_true",
                    help="overwrite a run directory that already holds a report")
    sp.set_defaults(func=cmd_bootstrap)

    sp = sub.add_parser("batch", help="verify every scenario in a directory")
    _add_run_flags(sp, with_threads=True)
    sp.set_defaults(func=cmd_batch)

    sp = sub.add_parser("presets", help="list the shipped scenario presets (or export them)")
    sp.add_argument("--export", default=None, metavar="DIR",
                    help="write the preset TOML files into DIR")
    sp.set_defaults(func=cmd_presets)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors, 0 for --help
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"nlslab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailureError as exc:
        print(f"nlslab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_SCIENTIFIC
    except LabError as exc:  # internal invariants and anything else deliberate
        print(f"nlslab: failure: {exc}", file=sys.stderr)
        return EXIT_SCIENTIFIC


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
