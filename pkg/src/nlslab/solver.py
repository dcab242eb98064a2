"""Damped Newton solver for the discretized stationary problem.

The discrete residual on the uniform Dirichlet grid is

    F(u)_i = -(u_{i+1} - 2 u_i + u_{i-1}) / h² + V_i u_i - f(x_i, u_i)

at interior nodes and 0 at the two clamped ends.  The solver drives
||F(u)||_inf below a tolerance by Newton steps with a halving line
search, and distinguishes three ways a run can end: an accepted
nontrivial solution, the trivial fixed point u = 0 (reported as its own
outcome, never as success), and non-convergence (raised, with the trace
attached).

Continuation wraps the same iteration in a ladder of scale parameters
s increasing to 1.  A rung at scale s multiplies the nonlinearity by
s**(2-p), chosen so that for a homogeneous f of degree p-1 the rung
solution is exactly s times the final one; each converged rung is
rescaled proportionally to seed the next.  The ladder therefore walks
amplitude space in controlled steps where a cold Newton start would
overshoot or fall to zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from .errors import ConfigError, NonConvergenceError, SingularJacobianError
from .model import Grid, Nonlinearity
from .spectral import DiscreteOperator

__all__ = [
    "SolutionField",
    "NewtonTrace",
    "residual",
    "jacobian",
    "newton_solve",
    "continuation_solve",
    "make_solution_field",
    "DEFAULT_TOL",
    "NONTRIVIAL_FLOOR",
]

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100
DAMPING_FLOOR = 1e-4
NONTRIVIAL_FLOOR = 1e-6
BOUNDARY_LEAK_FACTOR = 1e-8


@dataclass(frozen=True)
class SolutionField:
    """A candidate solution with its acceptance diagnostics.

    energy_norm is the discrete form-domain norm
    sqrt( Σ |Δu/h|² h + Σ (V + c0 + 1) u² h ) with c0 = max(0, -min V);
    finite-energy membership is what Dirichlet truncation stands in for,
    and boundary_leak records how consistent that truncation was.
    """

    grid: Grid
    values: np.ndarray
    residual_norm: float
    boundary_leak: float
    sup_norm: float
    energy_norm: float
    origin: str = "newton"

    @property
    def nontrivial(self) -> bool:
        return self.sup_norm >= NONTRIVIAL_FLOOR

    @property
    def boundary_ok(self) -> bool:
        return self.boundary_leak <= BOUNDARY_LEAK_FACTOR * max(self.sup_norm, 1e-300)


@dataclass(frozen=True)
class NewtonTrace:
    iterations: int
    residual_history: tuple[float, ...]
    damping_factors: tuple[float, ...]
    converged: bool
    outcome: str  # "accepted" | "trivial" on return; "stalled" | "budget-exhausted" on raise


def residual(grid: Grid, v_samples: np.ndarray, nl: Nonlinearity, u: np.ndarray) -> np.ndarray:
    """F(u) with the ends clamped to zero before differencing."""
    v = np.asarray(v_samples, dtype=float)
    u = np.array(u, dtype=float)
    if u.shape != v.shape or u.shape != (grid.num_points,):
        raise ConfigError("field, potential, and grid sizes must agree")
    u[0] = 0.0
    u[-1] = 0.0
    h = grid.spacing
    x = grid.nodes()
    f, _ = nl.f_df(x[1:-1], u[1:-1])
    out = np.zeros_like(u)
    out[1:-1] = -(u[2:] - 2.0 * u[1:-1] + u[:-2]) / h**2 + v[1:-1] * u[1:-1] - f
    return out


def jacobian(grid: Grid, v_samples: np.ndarray, nl: Nonlinearity, u: np.ndarray) -> DiscreteOperator:
    """Linearization of F at u: tridiagonal with diagonal 2/h² + V - ∂f/∂u."""
    v = np.asarray(v_samples, dtype=float)
    u = np.asarray(u, dtype=float)
    h = grid.spacing
    _, df = nl.f_df(grid.nodes(), u)
    diag = 2.0 / h**2 + v - df
    diag.setflags(write=False)
    return DiscreteOperator(grid=grid, diagonal=diag, offdiag=-1.0 / h**2)


def _solve_newton_step(grid: Grid, jac: DiscreteOperator, rhs: np.ndarray) -> np.ndarray:
    """Solve the interior block J δ = rhs; Dirichlet ends carry δ = 0."""
    n = grid.num_points - 2
    h = grid.spacing
    ab = np.zeros((3, n))
    ab[0, 1:] = -1.0 / h**2
    ab[1, :] = jac.diagonal[1:-1]
    ab[2, :-1] = -1.0 / h**2
    try:
        # silence the division warning scipy emits on exactly singular
        # pivots; the finiteness check below turns those into our error
        with np.errstate(divide="ignore", invalid="ignore"):
            delta_int = solve_banded((1, 1), ab, rhs[1:-1])
    except (LinAlgError, ValueError) as exc:
        raise SingularJacobianError(
            f"Newton linear system is singular ({exc}); "
            "a continuation ladder usually regularizes the approach"
        ) from exc
    if not np.all(np.isfinite(delta_int)):
        raise SingularJacobianError(
            "Newton step is non-finite; a continuation ladder usually helps"
        )
    delta = np.zeros(grid.num_points)
    delta[1:-1] = delta_int
    return delta


def make_solution_field(
    grid: Grid,
    v_samples: np.ndarray,
    nl: Nonlinearity,
    u: np.ndarray,
    origin: str = "newton",
) -> SolutionField:
    """Package a field with honestly recomputed diagnostics (no caching)."""
    v = np.asarray(v_samples, dtype=float)
    u = np.asarray(u, dtype=float)
    res = float(np.max(np.abs(residual(grid, v, nl, u))))
    leak = float(max(abs(u[0]), abs(u[-1])))
    sup = float(np.max(np.abs(u)))
    h = grid.spacing
    c0 = max(0.0, -float(v.min()))
    grad_sq = float(np.sum(((u[1:] - u[:-1]) / h) ** 2) * h)
    weighted_sq = float(np.sum((v + c0 + 1.0) * u * u) * h)
    frozen = u.copy()
    frozen.setflags(write=False)
    return SolutionField(
        grid=grid,
        values=frozen,
        residual_norm=res,
        boundary_leak=leak,
        sup_norm=sup,
        energy_norm=float(np.sqrt(grad_sq + weighted_sq)),
        origin=origin,
    )


def newton_solve(
    grid: Grid,
    v_samples: np.ndarray,
    nl: Nonlinearity,
    u0: np.ndarray,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[SolutionField, NewtonTrace]:
    """Damped Newton from u0.

    Returns (field, trace) where trace.outcome is "accepted" for a
    nontrivial converged solution and "trivial" when the iteration
    converged to the zero fixed point.  Raises NonConvergenceError
    (trace attached) when the budget runs out or the line search stalls
    at the damping floor, and SingularJacobianError when the linear
    solve breaks down.
    """
    if not (tol > 0):
        raise ConfigError("tolerance must be positive")
    if not (isinstance(max_iter, int) and max_iter >= 1):
        raise ConfigError("max_iter must be a positive integer")
    u = np.array(u0, dtype=float)
    if u.shape != (grid.num_points,):
        raise ConfigError("seed shape does not match the grid")
    if not np.all(np.isfinite(u)):
        raise ConfigError("seed must be finite")
    u[0] = 0.0
    u[-1] = 0.0

    v = np.asarray(v_samples, dtype=float)
    history: list[float] = []
    dampings: list[float] = []

    for iteration in range(max_iter + 1):
        F = residual(grid, v, nl, u)
        r = float(np.max(np.abs(F)))
        history.append(r)
        if r <= tol:
            field = make_solution_field(grid, v, nl, u)
            outcome = "accepted" if field.nontrivial else "trivial"
            trace = NewtonTrace(
                iterations=iteration,
                residual_history=tuple(history),
                damping_factors=tuple(dampings),
                converged=True,
                outcome=outcome,
            )
            return field, trace
        if iteration == max_iter:
            break
        jac = jacobian(grid, v, nl, u)
        delta = _solve_newton_step(grid, jac, -F)
        step = 1.0
        accepted = False
        while step >= DAMPING_FLOOR:
            trial = u + step * delta
            trial_r = float(np.max(np.abs(residual(grid, v, nl, trial))))
            if trial_r < r:
                u = trial
                dampings.append(step)
                accepted = True
                break
            step *= 0.5
        if not accepted:
            trace = NewtonTrace(
                iterations=iteration,
                residual_history=tuple(history),
                damping_factors=tuple(dampings),
                converged=False,
                outcome="stalled",
            )
            raise NonConvergenceError(
                f"line search stalled at the damping floor with residual {r:.3e}",
                trace=trace,
            )

    trace = NewtonTrace(
        iterations=max_iter,
        residual_history=tuple(history),
        damping_factors=tuple(dampings),
        converged=False,
        outcome="budget-exhausted",
    )
    raise NonConvergenceError(
        f"no convergence in {max_iter} iterations (residual {history[-1]:.3e})",
        trace=trace,
    )


@dataclass(frozen=True)
class _ScaledNonlinearity:
    """base nonlinearity multiplied by a positive coupling constant."""

    base: Nonlinearity
    coupling: float

    @property
    def growth_exponent(self) -> float:
        return self.base.growth_exponent

    @property
    def growth_constant(self) -> float:
        return self.coupling * self.base.growth_constant

    def f_df(self, x, u):
        f, df = self.base.f_df(x, u)
        return self.coupling * f, self.coupling * df


def continuation_solve(
    grid: Grid,
    v_samples: np.ndarray,
    nl: Nonlinearity,
    u0: np.ndarray,
    ladder: tuple[float, ...],
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> tuple[SolutionField, NewtonTrace]:
    """Chain newton_solve across a scale ladder increasing to 1.

    The single-rung ladder (1.0,) reduces to a plain newton_solve.  The
    first rung starts from u0; every later rung starts from the previous
    solution rescaled by the ratio of consecutive scales.  The first
    failing rung aborts the ladder with its position attached.
    """
    ladder = tuple(float(s) for s in ladder)
    if not ladder:
        raise ConfigError("continuation ladder must not be empty")
    if any(not np.isfinite(s) or s <= 0 or s > 1 for s in ladder):
        raise ConfigError("ladder scales must lie in (0, 1]")
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ConfigError("ladder scales must be strictly increasing")
    if ladder[-1] != 1.0:
        raise ConfigError("ladder must end at scale 1.0")

    p = nl.growth_exponent
    u_seed = np.array(u0, dtype=float)
    result: tuple[SolutionField, NewtonTrace] | None = None
    for k, s in enumerate(ladder):
        rung_nl = nl if s == 1.0 else _ScaledNonlinearity(nl, s ** (2.0 - p))
        try:
            field, trace = newton_solve(grid, v_samples, rung_nl, u_seed, tol, max_iter)
        except NonConvergenceError as exc:
            exc.ladder_position = k
            raise
        except SingularJacobianError as exc:
            raise SingularJacobianError(f"ladder rung {k} (scale {s}): {exc}") from exc
        if trace.outcome == "trivial" and k < len(ladder) - 1:
            raise NonConvergenceError(
                f"ladder rung {k} (scale {s}) collapsed to the trivial solution; "
                "nothing to rescale for the next rung",
                trace=trace,
                ladder_position=k,
            )
        result = (field, trace)
        if k < len(ladder) - 1:
            u_seed = field.values * (ladder[k + 1] / s)
    assert result is not None
    return result
