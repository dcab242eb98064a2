"""Exact-rational integrability bootstrap.

The regularity argument behind the tail analysis upgrades a solution's
integrability through the ladder

    r_0 = 2*,     r_{k+1} = r_k / (1 - delta),
    delta = 4/(n-2) - (p-2) - eps,

where 2* = 2n/(n-2) is the critical Sobolev exponent in dimension
n >= 3 and eps is a small positive slack.  Each rung uses r to control
the nonlinear term in L^{s} with s = r/(p-1), gains back L^{q} with
q = r/(1-delta), and the engine of the whole argument is the strict
Sobolev gain

    1/s - 1/q < 2/n,

whose exact slack at r = 2* is ((n-2)/(2n)) * eps.  The ladder stops as
soon as r_k > n(p-1)/2, at which point s_k > n/2 and boundedness
follows.  Dimensions one and two never need the ladder: in dimension
one membership in the energy space already gives boundedness, and in
dimension two arbitrarily high integrability is available from the
start.

Everything in this module is computed in exact rational arithmetic
(`fractions.Fraction`); floats are deliberately rejected at the door so
no rounding can ever creep into the ladder.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    ConfigError,
    InternalInvariantError,
    SlackError,
    SupercriticalExponentError,
)

__all__ = [
    "BootstrapProblem",
    "BootstrapState",
    "BootstrapRun",
    "make_problem",
    "run_bootstrap",
    "verify_gain",
]

SAFETY_CAP = 10_000

REASON_DIM_ONE = "dimension-1: energy-space membership already bounds the solution"
REASON_DIM_TWO = "dimension-2: arbitrarily high integrability available, no ladder needed"
REASON_LADDER = "ladder-terminated"


def _as_fraction(value, name: str) -> Fraction:
    """Exact conversion; floats are refused to keep the module float-free."""
    if isinstance(value, float):
        raise ConfigError(
            f"{name} must be exact (int, Fraction, or 'a/b' string), not float"
        )
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ConfigError(f"cannot interpret {name}={value!r} as a rational") from exc


@dataclass(frozen=True)
class BootstrapProblem:
    """Dimension, growth exponent, and slack, all exact."""

    n: int
    p: Fraction
    eps: Fraction | None  # None in dimensions 1 and 2 (no ladder, no slack)

    @property
    def two_star(self) -> Fraction | None:
        """Critical exponent 2n/(n-2); None encodes +infinity for n <= 2."""
        if self.n <= 2:
            return None
        return Fraction(2 * self.n, self.n - 2)

    @property
    def delta(self) -> Fraction | None:
        if self.n <= 2:
            return None
        assert self.eps is not None
        return Fraction(4, self.n - 2) - (self.p - 2) - self.eps

    @property
    def threshold(self) -> Fraction:
        """Termination line n(p-1)/2."""
        return Fraction(self.n) * (self.p - 1) / 2


@dataclass(frozen=True)
class BootstrapState:
    k: int
    r: Fraction
    s: Fraction  # r / (p-1)
    q: Fraction | None  # r / (1-delta); None when delta >= 1 (ladder unused)
    terminated: bool


@dataclass(frozen=True)
class BootstrapRun:
    problem: BootstrapProblem
    states: tuple[BootstrapState, ...]
    k_star: int
    reason: str
    delta_used: bool  # False when r_0 already clears the threshold


def make_problem(n: int, p, eps=None) -> BootstrapProblem:
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ConfigError(f"dimension must be an integer >= 1, got {n!r}")
    p = _as_fraction(p, "p")
    if p < 2:
        raise ConfigError(f"growth exponent must satisfy p >= 2, got {p}")

    if n <= 2:
        if eps is not None:
            eps = _as_fraction(eps, "eps")
            if eps <= 0:
                raise SlackError(f"slack must be positive, got {eps}")
        return BootstrapProblem(n=n, p=p, eps=eps)

    two_star = Fraction(2 * n, n - 2)
    if p >= two_star:
        raise SupercriticalExponentError(
            f"p = {p} is at or above the critical exponent 2* = {two_star} "
            f"in dimension {n}"
        )
    sup_eps = Fraction(4, n - 2) - (p - 2)  # positive exactly because p < 2*
    if eps is None:
        eps = sup_eps / 2
    else:
        eps = _as_fraction(eps, "eps")
        if not (0 < eps < sup_eps):
            raise SlackError(
                f"slack must lie strictly between 0 and {sup_eps}, got {eps}"
            )
    return BootstrapProblem(n=n, p=p, eps=eps)


def run_bootstrap(prob: BootstrapProblem) -> BootstrapRun:
    """Exact ladder until r_k > n(p-1)/2; trivial in dimensions one and two."""
    if prob.n == 1:
        return BootstrapRun(prob, states=(), k_star=0, reason=REASON_DIM_ONE, delta_used=False)
    if prob.n == 2:
        return BootstrapRun(prob, states=(), k_star=0, reason=REASON_DIM_TWO, delta_used=False)

    two_star = prob.two_star
    delta = prob.delta
    assert two_star is not None and delta is not None
    threshold = prob.threshold
    grow = delta < 1  # 1/(1-delta) is a genuine growth factor only then

    states: list[BootstrapState] = []
    r = two_star
    for k in range(SAFETY_CAP + 1):
        terminated = r > threshold
        states.append(
            BootstrapState(
                k=k,
                r=r,
                s=r / (prob.p - 1),
                q=(r / (1 - delta)) if grow else None,
                terminated=terminated,
            )
        )
        if terminated:
            return BootstrapRun(
                prob,
                states=tuple(states),
                k_star=k,
                reason=REASON_LADDER,
                delta_used=(k > 0),
            )
        if not grow:
            # Unreachable for admissible problems: r_0 <= n(p-1)/2 forces
            # 4/(n-2) <= p-1 and hence delta <= 1 - eps < 1.
            raise InternalInvariantError(
                f"ladder required but delta = {delta} >= 1; invariant violated"
            )
        r = r / (1 - delta)
    raise InternalInvariantError(
        f"ladder failed to terminate within {SAFETY_CAP} steps; invariant violated"
    )


def verify_gain(prob: BootstrapProblem, state: BootstrapState) -> Fraction:
    """Exact Sobolev-gain slack 2/n - (1/s - 1/q) for an active ladder state.

    Equals ((n-2)/(2n)) * eps at r = 2* and grows with r, so positivity
    of the returned value is precisely the strict gain the ladder needs.
    """
    if prob.n <= 2:
        raise ConfigError("gain verification applies to dimensions n >= 3 only")
    if state.q is None:
        raise ConfigError("state has no active ladder step (delta >= 1, unused)")
    gap = Fraction(2, prob.n) - (1 / state.s - 1 / state.q)
    return gap
