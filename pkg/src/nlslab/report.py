"""Run artifacts: canonical JSON reports, CSV field dumps, figures.

One run produces one machine-readable JSON document with sorted keys,
LF line endings, and UTF-8 encoding; identical configurations must
reproduce identical bytes, so everything nondeterministic (wall-clock
timings) is segregated and dropped under --stable-output.  Numeric
fields rely on Python's shortest round-trip float repr.  Infinities
(an empty essential spectrum has gap distance +inf) are encoded as the
strings "inf"/"-inf" because strict JSON has no spelling for them.

The solution dump is a three-column CSV "x,u,W" at 17 significant
digits — enough to reconstruct every double bit-for-bit — and the
figures are static renderings of the same data (field + effective
potential, tail envelopes against their fits, and the spectral
picture), written next to the CSV so a run directory is self-contained.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .bootstrap import BootstrapRun, verify_gain
from .decay import DecayFit, DecayVerdict, RateProfile, VanishingReport, WeightField
from .model import PeriodicCosine
from .solver import NewtonTrace, SolutionField
from .spectral import Bands, Empty, HalfLine, SpectralReport, _monodromy_trace

__all__ = [
    "RunReport",
    "encode_float",
    "spectral_section",
    "solution_section",
    "fits_section",
    "verdict_section",
    "vanishing_section",
    "rate_section",
    "weight_section",
    "bootstrap_section",
    "write_csv",
    "read_csv",
    "save_solution_figure",
    "save_decay_figure",
    "save_spectrum_figure",
]


def encode_float(v: float):
    """JSON-safe float: finite values pass through, infinities become strings."""
    if isinstance(v, float) and not math.isfinite(v):
        if math.isnan(v):
            return "nan"
        return "inf" if v > 0 else "-inf"
    return float(v)


def _frac(q: Fraction | None) -> str | None:
    return None if q is None else str(q)


@dataclass(frozen=True)
class RunReport:
    """Canonical report document; serialization is the single source of bytes."""

    document: dict

    def to_json(self) -> str:
        return json.dumps(self.document, sort_keys=True, indent=2, allow_nan=False) + "\n"

    def write(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8", newline="\n")


# --------------------------------------------------------------------------
# Section builders.


def spectral_section(rep: SpectralReport) -> dict:
    ess = rep.essential
    if isinstance(ess, Empty):
        ess_doc = {"kind": "empty"}
    elif isinstance(ess, HalfLine):
        ess_doc = {"kind": "half-line", "threshold": encode_float(ess.threshold)}
    else:
        assert isinstance(ess, Bands)
        ess_doc = {
            "kind": "bands",
            "intervals": [[encode_float(a), encode_float(b)] for a, b in ess.intervals],
        }
    return {
        "eigenvalues": [encode_float(v) for v in rep.eigenvalues],
        "eigenvalue_cutoff": encode_float(rep.eigenvalue_cutoff),
        "essential": ess_doc,
        "gap_distance": encode_float(rep.gap_distance),
        "hypothesis_ii_ok": rep.hypothesis_ii_ok,
        "zero_is_eigenvalue": rep.zero_is_eigenvalue,
        "spectral_tol": encode_float(rep.spectral_tol),
        "zero_eigenvalue_tol": encode_float(rep.zero_eigenvalue_tol),
        "window_limited": rep.window_limited,
    }


def solution_section(field: SolutionField, trace: NewtonTrace | None) -> dict:
    x = field.grid.nodes()
    i_max = int(np.argmax(field.values))
    i_min = int(np.argmin(field.values))
    doc = {
        "origin": field.origin,
        "residual_norm": encode_float(field.residual_norm),
        "boundary_leak": encode_float(field.boundary_leak),
        "boundary_ok": field.boundary_ok,
        "sup_norm": encode_float(field.sup_norm),
        "energy_norm": encode_float(field.energy_norm),
        "nontrivial": field.nontrivial,
        "max": {"x": encode_float(x[i_max]), "u": encode_float(field.values[i_max])},
        "min": {"x": encode_float(x[i_min]), "u": encode_float(field.values[i_min])},
    }
    if trace is not None:
        doc["newton"] = {
            "iterations": trace.iterations,
            "converged": trace.converged,
            "outcome": trace.outcome,
            "final_residual": encode_float(trace.residual_history[-1]),
            "dampings_below_one": sum(1 for d in trace.damping_factors if d < 1.0),
        }
    return doc


def fits_section(fits) -> list[dict]:
    out = []
    for f in fits:
        assert isinstance(f, DecayFit)
        out.append(
            {
                "kind": f.kind,
                "kappa": encode_float(f.kappa),
                "rate": encode_float(f.rate),
                "prefactor": encode_float(f.prefactor),
                "window": [encode_float(f.window[0]), encode_float(f.window[1])],
                "r_squared": encode_float(f.r_squared),
                "n_samples": f.n_samples,
                "floor_masked": f.floor_masked,
            }
        )
    return out


def verdict_section(v: DecayVerdict) -> dict:
    return {
        "branch": v.branch,
        "predicted": encode_float(v.predicted),
        "measured": encode_float(v.measured),
        "passed": v.passed,
        "margin": encode_float(v.margin),
        "detail": v.detail,
    }


def vanishing_section(rep: VanishingReport) -> dict:
    return {
        "radii": [encode_float(r) for r in rep.radii],
        "sups": [encode_float(s) for s in rep.sups],
        "final_ratio": encode_float(rep.final_ratio),
        "passed": rep.passed,
    }


def rate_section(profile: RateProfile) -> dict:
    return {
        "monotone_fraction": encode_float(profile.monotone_fraction),
        "n_samples": len(profile.rates),
    }


def weight_section(w: WeightField, radii) -> dict:
    return {
        "tail_sup": [[encode_float(r), encode_float(s)] for r, s in w.tail_table(radii)],
        "sup_norm": encode_float(float(np.max(np.abs(w.values)))),
    }


def bootstrap_section(run: BootstrapRun) -> dict:
    prob = run.problem
    states = []
    for st in run.states:
        entry = {
            "k": st.k,
            "r": _frac(st.r),
            "s": _frac(st.s),
            "q": _frac(st.q),
            "terminated": st.terminated,
        }
        if prob.n >= 3 and st.q is not None:
            entry["gain_gap"] = _frac(verify_gain(prob, st))
        states.append(entry)
    return {
        "n": prob.n,
        "p": _frac(prob.p),
        "eps": _frac(prob.eps),
        "two_star": _frac(prob.two_star),
        "delta": _frac(prob.delta),
        "delta_used": run.delta_used,
        "threshold": _frac(prob.threshold),
        "k_star": run.k_star,
        "reason": run.reason,
        "states": states,
    }


# --------------------------------------------------------------------------
# CSV.


def write_csv(path, x: np.ndarray, u: np.ndarray, w: np.ndarray) -> None:
    lines = ["x,u,W"]
    for xi, ui, wi in zip(x, u, w):
        lines.append(f"{xi:.17g},{ui:.17g},{wi:.17g}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    return data[:, 0], data[:, 1], data[:, 2]


# --------------------------------------------------------------------------
# Figures.  matplotlib is imported lazily so library use and most CLI
# paths never pay for it; the Agg backend keeps rendering headless.


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_solution_figure(field: SolutionField, weight: WeightField, path, title: str) -> None:
    plt = _plt()
    x = field.grid.nodes()
    fig, (ax_u, ax_w) = plt.subplots(2, 1, sharex=True, figsize=(7.0, 5.0))
    ax_u.plot(x, field.values, lw=1.2)
    ax_u.set_ylabel("u(x)")
    ax_u.set_title(title)
    ax_w.plot(x, weight.values, lw=1.2, color="tab:orange")
    ax_w.set_ylabel("W(x)")
    ax_w.set_xlabel("x")
    for ax in (ax_u, ax_w):
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def save_decay_figure(field: SolutionField, fits, path, title: str, floor: float) -> None:
    plt = _plt()
    x = field.grid.nodes()
    mask = np.abs(field.values) > floor
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    ax.semilogy(np.abs(x[mask]), np.abs(field.values[mask]), ".", ms=1.5,
                color="0.45", label="|u| samples")
    r_grid = None
    for f in fits:
        r_lo, r_hi = f.window
        r_grid = np.linspace(r_lo, r_hi, 200)
        ax.semilogy(
            r_grid,
            f.prefactor * np.exp(-f.rate * r_grid**f.kappa),
            lw=1.6,
            label=f"fit kappa={f.kappa:g} (R2={f.r_squared:.4f})",
        )
    if r_grid is not None:
        ax.axvspan(fits[0].window[0], fits[0].window[1], alpha=0.08, color="tab:blue")
    ax.set_xlabel("|x|")
    ax.set_ylabel("|u|")
    ax.set_title(title)
    ax.legend(loc="upper right", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def save_spectrum_figure(potential, rep: SpectralReport, path, title: str,
                         window=None, steps: int = 2000) -> None:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    if isinstance(potential, PeriodicCosine):
        lo, hi = window if window is not None else (-2.0, 12.0)
        energies = np.linspace(lo, hi, 800)
        trace = _monodromy_trace(potential, energies, steps)
        ax.plot(energies, trace, lw=1.2, label="discriminant")
        ax.axhline(2.0, color="0.4", ls="--", lw=0.8)
        ax.axhline(-2.0, color="0.4", ls="--", lw=0.8)
        if isinstance(rep.essential, Bands):
            for a, b in rep.essential.intervals:
                ax.axvspan(a, b, color="tab:green", alpha=0.18)
        ax.set_ylim(-6, 6)
        ax.set_xlabel("energy")
        ax.set_ylabel("trace of period map")
    else:
        for v in rep.eigenvalues:
            ax.axvline(v, color="tab:blue", lw=1.0)
        if isinstance(rep.essential, HalfLine):
            x_hi = max(rep.essential.threshold + 5.0, 1.0)
            ax.axvspan(rep.essential.threshold, x_hi, color="tab:green", alpha=0.18,
                       label="essential spectrum")
            ax.legend(loc="upper right", fontsize=8)
        ax.set_xlabel("energy")
        ax.set_yticks([])
    ax.axvline(0.0, color="tab:red", lw=1.2, ls=":", label=None)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
