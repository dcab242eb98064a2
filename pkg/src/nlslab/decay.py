"""Decay analysis: effective potential, envelope fits, and verdicts.

A solution of -u'' + V u = f(x, u) is simultaneously a zero mode of the
*linear* operator -Δ + V + W once the nonlinearity is absorbed into the
effective potential

    W(x) = -f(x, u(x)) / u(x)   where u(x) ≠ 0,    W(x) = 0 elsewhere.

The sign is fixed by the requirement that (-Δ_h + V + W) u literally
reproduce the nonlinear residual F(u), which is the identity every
downstream check leans on.  Because f vanishes superlinearly at 0 and u
vanishes at infinity, |W| decays along the tails — that vanishing, and
the decay envelope of u itself, are what this module measures.

Three envelope regimes are adjudicated:

* gap regime — 0 lies a distance d > 0 from the essential spectrum and
  the tail should be exponential with rate comparable to sqrt(d),
* discrete regime — empty essential spectrum; the local rate
  -d/d|x| log|u| should grow outward (decay beats every exponential),
* power-law regime — V ~ gamma |x|**beta grows polynomially and the
  envelope is exp(-a |x|**(beta/2 + 1)): a stretched fit with that
  exponent must outscore plain exponential baselines.

Fits are least-squares lines over log|u| against |x|**kappa, pooled over
both tails; kappa = 1 *is* the exponential fit — one code path, so the
"reduces bit-for-bit" property holds by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BranchMismatchError, ConfigError, TooFewSamplesError
from .model import ConfiningPower, Grid, Nonlinearity, Potential
from .solver import SolutionField
from .spectral import Empty, SpectralReport

__all__ = [
    "WeightField",
    "DecayFit",
    "VanishingReport",
    "RateProfile",
    "DecayVerdict",
    "build_W",
    "check_vanishing",
    "fit_exponential",
    "fit_stretched",
    "local_rate",
    "verdict",
    "DEFAULT_FLOOR",
]

DEFAULT_FLOOR = 1e-13
VERDICT_R2 = 0.98
GAP_SAFETY = 0.5
MONOTONE_FRACTION = 0.9
MIN_SAMPLES = 10


@dataclass(frozen=True)
class WeightField:
    """Effective potential samples; zero exactly where the solution is zero."""

    grid: Grid
    values: np.ndarray

    def tail_sup(self, radius: float) -> float:
        """max |W| over |x| >= radius."""
        x = self.grid.nodes()
        mask = np.abs(x) >= radius
        if not mask.any():
            raise ConfigError(f"radius {radius} leaves no tail nodes on the grid")
        return float(np.max(np.abs(self.values[mask])))

    def tail_table(self, radii) -> tuple[tuple[float, float], ...]:
        return tuple((float(r), self.tail_sup(r)) for r in radii)


def build_W(u: SolutionField, nl: Nonlinearity) -> WeightField:
    vals = u.values
    x = u.grid.nodes()
    f, _ = nl.f_df(x, vals)
    w = np.zeros_like(vals)
    nz = vals != 0.0
    w[nz] = -f[nz] / vals[nz]
    w.setflags(write=False)
    return WeightField(grid=u.grid, values=w)


@dataclass(frozen=True)
class VanishingReport:
    radii: tuple[float, ...]
    sups: tuple[float, ...]
    final_ratio: float
    passed: bool


def check_vanishing(field, radii) -> VanishingReport:
    """sup of |field| beyond each radius; non-increasing and tiny at the end.

    Works on any sampled field with .grid and .values.  The pipeline runs
    it on the effective potential W, whose vanishing at infinity is the
    structural hypothesis behind every decay estimate here; the final sup
    must drop below 1e-6 of the global one.
    """
    radii = tuple(float(r) for r in radii)
    if any(b <= a for a, b in zip(radii, radii[1:])) or not radii:
        raise ConfigError("radii ladder must be nonempty and increasing")
    if radii[-1] >= field.grid.half_width:
        raise ConfigError("radii must stay inside the grid")
    x = field.grid.nodes()
    vals = np.abs(np.asarray(field.values, dtype=float))
    sups = tuple(float(np.max(vals[np.abs(x) >= r])) for r in radii)
    sup_all = float(vals.max())
    nonincreasing = all(b <= a for a, b in zip(sups, sups[1:]))
    ratio = sups[-1] / sup_all if sup_all > 0 else 0.0
    return VanishingReport(
        radii=radii,
        sups=sups,
        final_ratio=ratio,
        passed=bool(nonincreasing and ratio <= 1e-6),
    )


# --------------------------------------------------------------------------
# Envelope fits.


@dataclass(frozen=True)
class DecayFit:
    kind: str  # "exponential" (kappa == 1) or "stretched"
    rate: float  # alpha for exponential, a for stretched
    prefactor: float
    kappa: float
    window: tuple[float, float]
    r_squared: float
    n_samples: int
    floor_masked: int


def _default_window(grid: Grid) -> tuple[float, float]:
    return (0.5 * grid.half_width, 0.9 * grid.half_width)


def _pooled_fit(u: SolutionField, kappa: float, window, floor: float) -> DecayFit:
    if window is None:
        window = _default_window(u.grid)
    r_in, r_out = float(window[0]), float(window[1])
    if not (0.0 < r_in < r_out <= u.grid.half_width):
        raise ConfigError(f"fit window [{r_in}, {r_out}] must sit inside (0, L]")
    if floor <= 0:
        raise ConfigError("amplitude floor must be positive")
    x = u.grid.nodes()
    in_window = (np.abs(x) >= r_in) & (np.abs(x) <= r_out)
    usable = in_window & (np.abs(u.values) > floor)
    n = int(usable.sum())
    if n < MIN_SAMPLES:
        raise TooFewSamplesError(
            f"only {n} usable samples in window [{r_in}, {r_out}] above floor {floor}"
        )
    X = np.abs(x[usable]) ** kappa
    Y = np.log(np.abs(u.values[usable]))
    xm = X.mean()
    ym = Y.mean()
    sxx = float(np.sum((X - xm) ** 2))
    slope = float(np.sum((X - xm) * (Y - ym)) / sxx)
    intercept = ym - slope * xm
    ss_res = float(np.sum((Y - (intercept + slope * X)) ** 2))
    ss_tot = float(np.sum((Y - ym) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return DecayFit(
        kind="exponential" if kappa == 1.0 else "stretched",
        rate=-slope,
        prefactor=float(np.exp(intercept)),
        kappa=float(kappa),
        window=(r_in, r_out),
        r_squared=r2,
        n_samples=n,
        floor_masked=int(in_window.sum()) - n,
    )


def fit_exponential(u: SolutionField, window=None, floor: float = DEFAULT_FLOOR) -> DecayFit:
    """Least-squares line of log|u| on |x|, both tails pooled."""
    return _pooled_fit(u, 1.0, window, floor)


def fit_stretched(
    u: SolutionField, kappa: float, window=None, floor: float = DEFAULT_FLOOR
) -> DecayFit:
    """Least-squares line of log|u| on |x|**kappa; kappa = 1 is fit_exponential."""
    if not (math.isfinite(kappa) and kappa > 0):
        raise ConfigError("stretch exponent must be positive")
    return _pooled_fit(u, float(kappa), window, floor)


# --------------------------------------------------------------------------
# Local decay rate.


@dataclass(frozen=True)
class RateProfile:
    """Samples of the outward log-derivative alpha(x) = -d log|u| / d|x|."""

    positions: tuple[float, ...]
    rates: tuple[float, ...]
    monotone_fraction: float


def local_rate(u: SolutionField, floor: float = DEFAULT_FLOOR) -> RateProfile:
    """Centered-difference local rate on usable tail samples.

    The derivative is taken with respect to |x| (outward), so a field
    exp(-2|x|) reads alpha ≡ 2 on both tails and exp(-x²/2) reads
    alpha = |x| exactly (centered differences are exact on quadratics).
    The monotone_fraction statistic is the fraction of outward steps on
    which alpha increases, pooled over the two tails.
    """
    x = u.grid.nodes()
    h = u.grid.spacing
    usable = np.abs(u.values) > floor
    with np.errstate(divide="ignore"):  # zeros outside the usable mask are never read
        logs = np.log(np.abs(u.values))

    positions: list[float] = []
    rates: list[float] = []
    increases = 0
    steps = 0
    for side in (+1, -1):
        tail = np.nonzero((np.sign(x) == side) & usable)[0]
        # keep indices whose immediate neighbours are both usable
        tail = tail[(tail > 0) & (tail < len(x) - 1)]
        tail = tail[usable[tail - 1] & usable[tail + 1]]
        if side == -1:
            tail = tail[::-1]  # orient outward (decreasing x on the left tail)
        alpha = -side * (logs[tail + 1] - logs[tail - 1]) / (2.0 * h)
        positions.extend(float(x[i]) for i in tail)
        rates.extend(float(a) for a in alpha)
        if len(alpha) >= 2:
            diffs = np.diff(alpha)
            increases += int(np.sum(diffs > 0))
            steps += len(diffs)
    if len(rates) < MIN_SAMPLES:
        raise TooFewSamplesError(
            f"only {len(rates)} usable local-rate samples above floor {floor}"
        )
    frac = increases / steps if steps else 0.0
    return RateProfile(
        positions=tuple(positions),
        rates=tuple(rates),
        monotone_fraction=float(frac),
    )


# --------------------------------------------------------------------------
# Verdicts.


@dataclass(frozen=True)
class DecayVerdict:
    branch: str  # "gap" | "discrete" | "power-law"
    predicted: float
    measured: float
    passed: bool
    margin: float
    detail: str


def verdict(
    branch: str,
    spectral: SpectralReport,
    fits,
    potential: Potential,
    rate_profile: RateProfile | None = None,
) -> DecayVerdict:
    """Adjudicate a decay branch against spectral data and fitted envelopes.

    gap:       fits = (exponential fit,); passes iff
               alpha >= 0.5 * sqrt(d) and R² >= 0.98.
    discrete:  fits = windowed exponential fits ordered outward (>= 2);
               passes iff monotone_fraction >= 0.9 and window rates
               strictly increase outward.
    power-law: fits = (stretched fit with kappa = beta/2 + 1, then
               baseline fits); passes iff the stretched R² >= 0.98 and
               strictly exceeds every baseline R².
    """
    fits = tuple(fits)
    if branch == "gap":
        d = spectral.gap_distance
        if not (math.isfinite(d) and d > 0):
            raise BranchMismatchError(
                f"gap branch needs finite positive gap distance, got {d}"
            )
        if len(fits) != 1 or fits[0].kappa != 1.0:
            raise ConfigError("gap branch expects exactly one exponential fit")
        fit = fits[0]
        predicted = math.sqrt(d)
        threshold = GAP_SAFETY * predicted
        passed = fit.rate >= threshold and fit.r_squared >= VERDICT_R2
        return DecayVerdict(
            branch=branch,
            predicted=predicted,
            measured=fit.rate,
            passed=bool(passed),
            margin=fit.rate - threshold,
            detail=(
                f"alpha={fit.rate:.6f} vs threshold {threshold:.6f} "
                f"(= {GAP_SAFETY} * sqrt(d), d={d:.6f}); R²={fit.r_squared:.6f}"
            ),
        )

    if branch == "discrete":
        if not isinstance(spectral.essential, Empty):
            raise BranchMismatchError(
                "discrete branch requires an empty essential spectrum"
            )
        if rate_profile is None or len(fits) < 2:
            raise ConfigError(
                "discrete branch needs a rate profile and at least two windowed fits"
            )
        if any(f.kappa != 1.0 for f in fits):
            raise ConfigError("discrete-branch windowed fits must be exponential")
        rates = [f.rate for f in fits]
        outward = all(b > a for a, b in zip(rates, rates[1:]))
        frac = rate_profile.monotone_fraction
        passed = frac >= MONOTONE_FRACTION and outward
        return DecayVerdict(
            branch=branch,
            predicted=MONOTONE_FRACTION,
            measured=frac,
            passed=bool(passed),
            margin=frac - MONOTONE_FRACTION,
            detail=(
                f"monotone fraction {frac:.4f}; windowed rates "
                + " -> ".join(f"{r:.4f}" for r in rates)
                + (" (increasing)" if outward else " (NOT increasing)")
            ),
        )

    if branch == "power-law":
        if not isinstance(potential, ConfiningPower):
            raise BranchMismatchError("power-law branch requires a confining potential")
        if not fits or fits[0].kind != "stretched":
            raise ConfigError("power-law branch expects the stretched fit first")
        target_kappa = potential.beta / 2.0 + 1.0
        stretched = fits[0]
        if abs(stretched.kappa - target_kappa) > 1e-12:
            raise BranchMismatchError(
                f"stretched exponent {stretched.kappa} does not match "
                f"beta/2 + 1 = {target_kappa}"
            )
        baselines = fits[1:]
        if not baselines:
            raise ConfigError("power-law branch needs at least one baseline fit")
        best_baseline = max(f.r_squared for f in baselines)
        passed = stretched.r_squared >= VERDICT_R2 and stretched.r_squared > best_baseline
        return DecayVerdict(
            branch=branch,
            predicted=target_kappa,
            measured=stretched.r_squared,
            passed=bool(passed),
            margin=stretched.r_squared - best_baseline,
            detail=(
                f"stretched(kappa={stretched.kappa:g}) R²={stretched.r_squared:.6f} vs "
                + ", ".join(f"kappa={f.kappa:g}: R²={f.r_squared:.6f}" for f in baselines)
            ),
        )

    raise ConfigError(f"unknown verdict branch {branch!r}")
