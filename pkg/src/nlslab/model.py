"""Grids, potential families, and nonlinearity families.

The equation under study is the stationary problem

    -u''(x) + V(x) u(x) = f(x, u(x))        on [-L, L], u(±L) = 0,

discretized on a uniform grid with an odd number of nodes so that x = 0
is always a node.  This module owns the declarative descriptions of V
and f together with the validation the rest of the pipeline relies on:
V must be bounded below by its stated constant, and f must vanish
superlinearly at u = 0 and respect its declared growth envelope
|f(u)| <= c (1 + |u|**(p-1)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InvalidPotentialError

__all__ = [
    "Grid",
    "Constant",
    "PeriodicCosine",
    "ConfiningPower",
    "Tabulated",
    "Potential",
    "PurePower",
    "AsymptoticallyLinear",
    "SaturableScaled",
    "Nonlinearity",
    "build_grid",
    "eval_potential",
    "eval_nonlinearity",
    "audit_growth",
]

# Node amplitude used for the small-u audit of f(u)/u -> 0, and the bound
# the ratio must satisfy there.  A pure power |u|**(p-2) u passes exactly
# when (1e-8)**(p-2) <= 1e-6, i.e. p >= 2.75; shallower powers are honest
# counterexamples to the superlinear-vanishing requirement and are rejected.
_SMALL_U = 1e-8
_SMALL_U_RATIO = 1e-6


@dataclass(frozen=True)
class Grid:
    """Uniform symmetric grid on [-L, L] with an odd node count."""

    half_width: float
    num_points: int

    def __post_init__(self):
        if not (isinstance(self.num_points, int) and not isinstance(self.num_points, bool)):
            raise ConfigError("num_points must be an integer")
        if self.num_points < 3 or self.num_points % 2 == 0:
            raise ConfigError(
                f"num_points must be odd and >= 3, got {self.num_points}"
            )
        if not (math.isfinite(self.half_width) and self.half_width > 0):
            raise ConfigError(f"half_width must be positive, got {self.half_width}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.num_points - 1)

    def nodes(self) -> np.ndarray:
        # Centered construction: the middle node is 0.0 exactly and the
        # spacing is uniform to the last bit; the endpoints agree with
        # +/-half_width up to one rounding of (N-1)/2 * h.
        mid = (self.num_points - 1) // 2
        x = (np.arange(self.num_points) - mid) * self.spacing
        x.setflags(write=False)
        return x


def build_grid(half_width: float, num_points: int) -> Grid:
    """Validated grid constructor; rejects even counts and non-positive widths."""
    return Grid(float(half_width), num_points)


# --------------------------------------------------------------------------
# Potentials.  Each family evaluates pointwise and knows the constant c0
# with V(x) >= -c0, which downstream code uses both as a sanity bound and
# in the weighted energy norm.


@dataclass(frozen=True)
class Constant:
    """V(x) = value."""

    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ConfigError("constant potential value must be finite")

    @property
    def lower_bound(self) -> float:
        return max(0.0, -self.value)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return np.full_like(np.asarray(x, dtype=float), self.value)


@dataclass(frozen=True)
class PeriodicCosine:
    """V(x) = mean + sum_j amplitudes[j] * cos(wavenumbers[j] * x), period T.

    Every wavenumber must be an integer multiple of 2*pi/T so the stated
    period is genuine.
    """

    mean: float
    amplitudes: tuple[float, ...]
    wavenumbers: tuple[float, ...]
    period: float

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in self.amplitudes))
        object.__setattr__(self, "wavenumbers", tuple(float(k) for k in self.wavenumbers))
        if len(self.amplitudes) != len(self.wavenumbers):
            raise ConfigError("amplitudes and wavenumbers must pair up")
        if not self.amplitudes:
            raise ConfigError("periodic potential needs at least one harmonic")
        if not (math.isfinite(self.period) and self.period > 0):
            raise ConfigError("period must be positive")
        base = 2.0 * math.pi / self.period
        for k in self.wavenumbers:
            ratio = k / base
            if abs(ratio - round(ratio)) > 1e-9:
                raise ConfigError(
                    f"wavenumber {k} is not an integer multiple of 2*pi/period"
                )

    @property
    def lower_bound(self) -> float:
        return max(0.0, -(self.mean - sum(abs(a) for a in self.amplitudes)))

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        v = np.full_like(x, self.mean)
        for a, k in zip(self.amplitudes, self.wavenumbers):
            v += a * np.cos(k * x)
        return v


@dataclass(frozen=True)
class ConfiningPower:
    """V(x) = gamma * |x|**beta - offset with gamma, beta > 0 and offset >= 0."""

    gamma: float
    beta: float
    offset: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ConfigError("gamma must be positive")
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ConfigError("beta must be positive")
        if not (math.isfinite(self.offset) and self.offset >= 0):
            raise ConfigError("offset must be non-negative")

    @property
    def lower_bound(self) -> float:
        return self.offset

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.gamma * np.abs(x) ** self.beta - self.offset


@dataclass(frozen=True)
class Tabulated:
    """Grid samples of V plus an explicit essential-spectrum annotation.

    Classifying the essential spectrum from samples alone is ill-posed
    (any truncated operator has purely discrete spectrum), so tabulated
    potentials must say what they are: "confining" (spectrum discrete)
    or ("asymptotically-constant", v_inf).
    """

    samples: tuple[float, ...]
    spectral_class: tuple

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(float(s) for s in self.samples))
        if len(self.samples) < 3:
            raise ConfigError("tabulated potential needs at least 3 samples")
        if not all(math.isfinite(s) for s in self.samples):
            raise InvalidPotentialError("tabulated samples must be finite")
        if isinstance(self.spectral_class, list):
            object.__setattr__(self, "spectral_class", tuple(self.spectral_class))
        sc = self.spectral_class
        ok = (
            isinstance(sc, tuple)
            and len(sc) >= 1
            and (
                sc[0] == "confining"
                or (sc[0] == "asymptotically-constant" and len(sc) == 2 and math.isfinite(sc[1]))
            )
        )
        if not ok:
            raise ConfigError(
                "spectral_class must be ('confining',) or ('asymptotically-constant', v_inf)"
            )

    @property
    def lower_bound(self) -> float:
        return max(0.0, -min(self.samples))

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (len(self.samples),):
            raise ConfigError(
                f"tabulated potential has {len(self.samples)} samples, grid has {x.shape}"
            )
        return np.array(self.samples, dtype=float)


Potential = Constant | PeriodicCosine | ConfiningPower | Tabulated


def eval_potential(spec: Potential, grid: Grid) -> np.ndarray:
    """Sample V on the grid nodes, checking finiteness and the lower bound."""
    v = spec.evaluate(grid.nodes())
    if not np.all(np.isfinite(v)):
        raise InvalidPotentialError("potential evaluated to a non-finite value")
    if v.min() < -spec.lower_bound - 1e-9:
        raise InvalidPotentialError(
            f"potential dips to {v.min()} below its stated bound {-spec.lower_bound}"
        )
    v.setflags(write=False)
    return v


# --------------------------------------------------------------------------
# Nonlinearities.  The x argument is carried so that x-dependent variants
# slot in without interface churn; the shipped families are autonomous.


def _audit_small_u(spec, name: str) -> None:
    f, _ = spec.f_df(0.0, _SMALL_U)
    if abs(f / _SMALL_U) > _SMALL_U_RATIO:
        raise ConfigError(
            f"{name}: f(u)/u = {abs(f / _SMALL_U):.3e} at |u| = {_SMALL_U}; "
            "the nonlinearity must vanish superlinearly at 0"
        )


@dataclass(frozen=True)
class PurePower:
    """f(u) = |u|**(p-2) u, the homogeneous model nonlinearity."""

    p: float
    growth_constant: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.p) and self.p >= 2):
            raise ConfigError(f"pure-power exponent must be >= 2, got {self.p}")
        if self.growth_constant <= 0:
            raise ConfigError("growth constant must be positive")
        _audit_small_u(self, f"PurePower(p={self.p})")

    @property
    def growth_exponent(self) -> float:
        return self.p

    def f_df(self, x, u):
        au = np.abs(u)
        f = au ** (self.p - 2) * u
        df = (self.p - 1) * au ** (self.p - 2)
        return f, df


@dataclass(frozen=True)
class AsymptoticallyLinear:
    """f(u) = u**3 / (1 + u**2): cubic near zero, linear at infinity (p = 2)."""

    growth_constant: float = 1.0

    @property
    def growth_exponent(self) -> float:
        return 2.0

    def f_df(self, x, u):
        u2 = u * u
        denom = 1.0 + u2
        f = u * u2 / denom
        df = (3.0 * u2 + u2 * u2) / (denom * denom)
        return f, df


@dataclass(frozen=True)
class SaturableScaled:
    """f(u) = amplitude * u**3 / (1 + saturation * u**2); p = 2 like the above."""

    amplitude: float
    saturation: float

    def __post_init__(self):
        if not (math.isfinite(self.amplitude) and self.amplitude > 0):
            raise ConfigError("amplitude must be positive")
        if not (math.isfinite(self.saturation) and self.saturation > 0):
            raise ConfigError("saturation must be positive")
        _audit_small_u(self, "SaturableScaled")

    @property
    def growth_exponent(self) -> float:
        return 2.0

    @property
    def growth_constant(self) -> float:
        # |f(u)| <= (amplitude/saturation) |u|, so this constant certifies
        # the growth envelope with p = 2.
        return self.amplitude / self.saturation

    def f_df(self, x, u):
        u2 = u * u
        denom = 1.0 + self.saturation * u2
        f = self.amplitude * u * u2 / denom
        df = self.amplitude * (3.0 * u2 + self.saturation * u2 * u2) / (denom * denom)
        return f, df


Nonlinearity = PurePower | AsymptoticallyLinear | SaturableScaled


def eval_nonlinearity(spec: Nonlinearity, u, x=0.0):
    """Return (f(x,u), df/du(x,u)); inputs must be finite."""
    if not np.all(np.isfinite(u)):
        raise ConfigError("nonlinearity argument must be finite")
    return spec.f_df(x, u)


def audit_growth(spec: Nonlinearity, samples: np.ndarray) -> float:
    """Worst ratio |f(u)| / (c (1 + |u|**(p-1))) over the samples.

    A compliant nonlinearity keeps this at or below 1 (up to rounding).
    """
    f, _ = spec.f_df(0.0, samples)
    p = spec.growth_exponent
    envelope = spec.growth_constant * (1.0 + np.abs(samples) ** (p - 1.0))
    return float(np.max(np.abs(f) / envelope))
