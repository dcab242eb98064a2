"""Spectrum of the linear operator H = -d²/dx² + V.

Three distinct jobs live here and it pays to keep them separate in
one's head:

* the *discrete* operator actually assembled on the truncated grid
  (symmetric tridiagonal; its low-lying eigenvalues approximate the
  discrete spectrum of H),

* the *essential spectrum* of the untruncated operator, which any
  truncation destroys (a finite matrix always has discrete spectrum)
  and which is therefore classified per potential family: empty for
  confining potentials, a half-line for (asymptotically) constant
  ones, and a union of bands for periodic ones,

* the *band structure* of periodic potentials, computed from the
  discriminant Δ(E) = u₁(T) + u₂′(T) of the period map of
  u'' = (V - E) u.  An energy lies in a band exactly when |Δ(E)| ≤ 2.

The quantity the decay analysis consumes is d = dist(0, σ_ess): the
hypothesis under test everywhere downstream is that 0 sits outside the
essential spectrum with a positive margin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal

from .errors import ConfigError, NumericalFailureError
from .model import (
    ConfiningPower,
    Constant,
    Grid,
    PeriodicCosine,
    Potential,
    Tabulated,
    eval_potential,
)

__all__ = [
    "DiscreteOperator",
    "Discriminant",
    "Empty",
    "HalfLine",
    "Bands",
    "SpectralReport",
    "assemble",
    "lowest_eigenvalues",
    "hill_discriminant",
    "essential_spectrum",
    "check_hypothesis_ii",
    "spectral_report",
]

DEFAULT_SCAN_WINDOW = (-2.0, 12.0)
DEFAULT_SCAN_RESOLUTION = 2e-3
DEFAULT_MONODROMY_STEPS = 2000
EDGE_TOL = 1e-8


@dataclass(frozen=True)
class DiscreteOperator:
    """Symmetric tridiagonal matrix 2/h² + V_i on the diagonal, -1/h² off it."""

    grid: Grid
    diagonal: np.ndarray
    offdiag: float
    boundary: str = "dirichlet"

    def apply(self, u: np.ndarray) -> np.ndarray:
        """Matrix-vector product with implicit zero ghost nodes outside the grid."""
        u = np.asarray(u, dtype=float)
        out = self.diagonal * u
        out[:-1] += self.offdiag * u[1:]
        out[1:] += self.offdiag * u[:-1]
        return out


def assemble(grid: Grid, v_samples: np.ndarray) -> DiscreteOperator:
    v = np.asarray(v_samples, dtype=float)
    if v.shape != (grid.num_points,):
        raise ConfigError(
            f"potential samples have shape {v.shape}, expected ({grid.num_points},)"
        )
    h = grid.spacing
    diag = 2.0 / h**2 + v
    diag.setflags(write=False)
    return DiscreteOperator(grid=grid, diagonal=diag, offdiag=-1.0 / h**2)


def lowest_eigenvalues(op: DiscreteOperator, k: int) -> np.ndarray:
    """The k smallest eigenvalues, ascending, each certified by its residual.

    Certification recomputes ||H v - λ v|| / ||v|| for every returned pair
    and refuses to hand back anything worse than 1e-8.
    """
    n = len(op.diagonal)
    if not (isinstance(k, int) and 1 <= k <= n):
        raise ConfigError(f"k must satisfy 1 <= k <= {n}, got {k}")
    off = np.full(n - 1, op.offdiag)
    try:
        vals, vecs = eigh_tridiagonal(
            op.diagonal, off, select="i", select_range=(0, k - 1)
        )
    except LinAlgError as exc:  # pragma: no cover - scipy failure path
        raise NumericalFailureError(f"tridiagonal eigensolve failed: {exc}") from exc
    for j in range(k):
        v = vecs[:, j]
        res = np.linalg.norm(op.apply(v) - vals[j] * v) / np.linalg.norm(v)
        if res > 1e-8:
            raise NumericalFailureError(
                f"eigenpair {j} residual {res:.3e} exceeds certificate bound 1e-8"
            )
    vals.setflags(write=False)
    return vals


# --------------------------------------------------------------------------
# Floquet analysis of periodic potentials.


@dataclass(frozen=True)
class Discriminant:
    energy: float
    value: float


def _monodromy_trace(spec: PeriodicCosine, energies: np.ndarray, steps: int) -> np.ndarray:
    """Trace of the period map of u'' = (V - E) u for a batch of energies.

    Classical fixed-step fourth-order integration of the fundamental
    system from (1,0) and (0,1); deterministic by construction.  V is
    evaluated once on the half-step lattice and reused.
    """
    T = spec.period
    h = T / steps
    t_half = np.arange(2 * steps + 1) * (h / 2.0)
    v_half = spec.evaluate(t_half)

    E = np.asarray(energies, dtype=float)
    # Rows: the two initial conditions. u and up have shape (2, nE).
    u = np.zeros((2, E.size))
    up = np.zeros((2, E.size))
    u[0] = 1.0
    up[1] = 1.0
    for i in range(steps):
        a0 = v_half[2 * i] - E
        ah = v_half[2 * i + 1] - E
        a1 = v_half[2 * i + 2] - E
        k1u = up
        k1p = a0 * u
        k2u = up + (h / 2.0) * k1p
        k2p = ah * (u + (h / 2.0) * k1u)
        k3u = up + (h / 2.0) * k2p
        k3p = ah * (u + (h / 2.0) * k2u)
        k4u = up + h * k3p
        k4p = a1 * (u + h * k3u)
        u = u + (h / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
        up = up + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
    return u[0] + up[1]


def hill_discriminant(
    spec: Potential, energy: float, steps: int = DEFAULT_MONODROMY_STEPS
) -> Discriminant:
    if not isinstance(spec, PeriodicCosine):
        raise ConfigError("discriminant is defined only for periodic potentials")
    if steps < 100:
        raise ConfigError("monodromy integration needs at least 100 steps")
    value = float(_monodromy_trace(spec, np.array([energy]), steps)[0])
    return Discriminant(energy=float(energy), value=value)


# --------------------------------------------------------------------------
# Essential spectrum per family.


@dataclass(frozen=True)
class Empty:
    """σ_ess = ∅ (confining potential; spectrum purely discrete)."""


@dataclass(frozen=True)
class HalfLine:
    """σ_ess = [threshold, ∞)."""

    threshold: float


@dataclass(frozen=True)
class Bands:
    """σ_ess = union of closed intervals, sorted and disjoint."""

    intervals: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(
            self,
            "intervals",
            tuple((float(a), float(b)) for a, b in self.intervals),
        )
        prev_hi = -math.inf
        for lo, hi in self.intervals:
            if not (lo <= hi):
                raise ConfigError(f"band [{lo}, {hi}] is inverted")
            if lo < prev_hi:
                raise ConfigError("bands must be sorted and disjoint")
            prev_hi = hi


EssentialSpectrum = Empty | HalfLine | Bands


def _bisect_edge(spec, steps, e_outside, e_inside):
    """Refine a band edge bracketed by an outside and an inside energy."""
    def inside(e):
        return abs(_monodromy_trace(spec, np.array([e]), steps)[0]) <= 2.0

    lo, hi = e_outside, e_inside
    while abs(hi - lo) > EDGE_TOL:
        mid = 0.5 * (lo + hi)
        if inside(mid):
            hi = mid
        else:
            lo = mid
    return hi


def essential_spectrum(
    spec: Potential,
    window: tuple[float, float] = DEFAULT_SCAN_WINDOW,
    resolution: float = DEFAULT_SCAN_RESOLUTION,
    steps: int = DEFAULT_MONODROMY_STEPS,
) -> tuple[EssentialSpectrum, bool]:
    """Classify σ_ess; returns (description, window_limited flag).

    window_limited is only meaningful for the periodic branch: it is set
    when the scan window ends strictly inside a band, i.e. the outermost
    edges were clipped rather than resolved.
    """
    if isinstance(spec, ConfiningPower):
        return Empty(), False
    if isinstance(spec, Constant):
        return HalfLine(spec.value), False
    if isinstance(spec, Tabulated):
        if spec.spectral_class[0] == "confining":
            return Empty(), False
        return HalfLine(spec.spectral_class[1]), False
    if not isinstance(spec, PeriodicCosine):  # pragma: no cover - union is closed
        raise ConfigError(f"unsupported potential family {type(spec).__name__}")

    e_lo, e_hi = float(window[0]), float(window[1])
    if not (e_lo < e_hi):
        raise ConfigError("scan window must be a nonempty interval")
    if not (0.0 < resolution <= (e_hi - e_lo)):
        raise ConfigError("scan resolution must be positive and fit in the window")

    n = int(math.ceil((e_hi - e_lo) / resolution)) + 1
    energies = np.linspace(e_lo, e_hi, n)
    trace = _monodromy_trace(spec, energies, steps)
    inside = np.abs(trace) <= 2.0

    intervals = []
    i = 0
    while i < n:
        if not inside[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and inside[j + 1]:
            j += 1
        lo = energies[i] if i == 0 else _bisect_edge(spec, steps, energies[i - 1], energies[i])
        hi = energies[j] if j == n - 1 else _bisect_edge(spec, steps, energies[j + 1], energies[j])
        intervals.append((float(lo), float(hi)))
        i = j + 1

    window_limited = bool(inside[0] or inside[-1])
    return Bands(tuple(intervals)), window_limited


def _gap_distance(ess: EssentialSpectrum) -> float:
    if isinstance(ess, Empty):
        return math.inf
    if isinstance(ess, HalfLine):
        return max(ess.threshold, 0.0)
    best = math.inf
    for lo, hi in ess.intervals:
        if lo <= 0.0 <= hi:
            return 0.0
        best = min(best, min(abs(lo), abs(hi)))
    return best


# --------------------------------------------------------------------------
# The report consumed by verdicts and the CLI.


@dataclass(frozen=True)
class SpectralReport:
    eigenvalues: tuple[float, ...]
    eigenvalue_cutoff: float
    essential: EssentialSpectrum
    gap_distance: float
    hypothesis_ii_ok: bool
    zero_is_eigenvalue: bool
    spectral_tol: float
    zero_eigenvalue_tol: float
    window_limited: bool


def check_hypothesis_ii(
    report_or_ess, spectral_tol: float = 1e-6
) -> tuple[bool, float]:
    """Is 0 outside the essential spectrum by more than the tolerance?

    Accepts either a SpectralReport or a bare essential-spectrum
    description; returns (flag, gap distance).
    """
    ess = (
        report_or_ess.essential
        if isinstance(report_or_ess, SpectralReport)
        else report_or_ess
    )
    d = _gap_distance(ess)
    return (d > spectral_tol), d


def spectral_report(
    grid: Grid,
    potential: Potential,
    *,
    num_eigenvalues: int = 8,
    eigenvalue_cutoff: float = math.inf,
    window: tuple[float, float] = DEFAULT_SCAN_WINDOW,
    resolution: float = DEFAULT_SCAN_RESOLUTION,
    steps: int = DEFAULT_MONODROMY_STEPS,
    spectral_tol: float = 1e-6,
    zero_eigenvalue_tol: float = 1e-6,
) -> SpectralReport:
    """Assemble, eigensolve, classify, and check the gap hypothesis in one go."""
    op = assemble(grid, eval_potential(potential, grid))
    vals = lowest_eigenvalues(op, num_eigenvalues)
    kept = tuple(float(v) for v in vals if v <= eigenvalue_cutoff)
    ess, limited = essential_spectrum(potential, window, resolution, steps)
    ok, d = check_hypothesis_ii(ess, spectral_tol)
    zero_eig = any(abs(v) <= zero_eigenvalue_tol for v in vals)
    return SpectralReport(
        eigenvalues=kept,
        eigenvalue_cutoff=eigenvalue_cutoff,
        essential=ess,
        gap_distance=d,
        hypothesis_ii_ok=ok,
        zero_is_eigenvalue=zero_eig,
        spectral_tol=spectral_tol,
        zero_eigenvalue_tol=zero_eigenvalue_tol,
        window_limited=limited,
    )
