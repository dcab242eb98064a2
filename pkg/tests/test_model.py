"""Grid construction, potential families, and nonlinearity contracts."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nlslab import (
    AsymptoticallyLinear,
    ConfigError,
    ConfiningPower,
    Constant,
    Grid,
    InvalidPotentialError,
    PeriodicCosine,
    PurePower,
    SaturableScaled,
    Tabulated,
    audit_growth,
    build_grid,
    eval_nonlinearity,
    eval_potential,
)


# --------------------------------------------------------------------------
# Grid


def test_grid_center_node_is_exactly_zero():
    g = build_grid(20.0, 4001)
    x = g.nodes()
    assert x[2000] == 0.0
    assert x[0] == -x[-1]
    assert g.spacing == pytest.approx(0.01, abs=0)


def test_grid_nodes_are_read_only():
    x = build_grid(1.0, 11).nodes()
    with pytest.raises(ValueError):
        x[0] = 99.0


@pytest.mark.parametrize("n", [2, 4, 100, 0, -3])
def test_grid_rejects_even_or_tiny_counts(n):
    with pytest.raises(ConfigError):
        build_grid(1.0, n)


@pytest.mark.parametrize("L", [0.0, -1.0, math.inf, math.nan])
def test_grid_rejects_bad_half_width(L):
    with pytest.raises(ConfigError):
        build_grid(L, 11)


def test_grid_rejects_bool_count():
    with pytest.raises(ConfigError):
        Grid(1.0, True)


@given(
    L=st.floats(min_value=0.5, max_value=100.0, allow_nan=False),
    half=st.integers(min_value=1, max_value=500),
)
def test_grid_mirror_symmetry_is_exact(L, half):
    g = build_grid(L, 2 * half + 1)
    x = g.nodes()
    # centered construction makes the mirror exact in floating point
    assert np.array_equal(x, -x[::-1])
    assert np.all(np.diff(x) > 0)


# --------------------------------------------------------------------------
# Potentials


def test_constant_potential_evaluates_flat():
    g = build_grid(5.0, 11)
    v = eval_potential(Constant(2.5), g)
    assert np.all(v == 2.5)
    assert Constant(-3.0).lower_bound == 3.0
    assert Constant(3.0).lower_bound == 0.0


def test_periodic_cosine_requires_commensurate_wavenumbers():
    PeriodicCosine(mean=1.0, amplitudes=(-2.0,), wavenumbers=(2.0,), period=math.pi)
    with pytest.raises(ConfigError):
        PeriodicCosine(mean=0.0, amplitudes=(1.0,), wavenumbers=(1.5,), period=math.pi)


def test_periodic_cosine_validation():
    with pytest.raises(ConfigError):
        PeriodicCosine(mean=0.0, amplitudes=(), wavenumbers=(), period=math.pi)
    with pytest.raises(ConfigError):
        PeriodicCosine(mean=0.0, amplitudes=(1.0,), wavenumbers=(2.0, 4.0), period=math.pi)
    with pytest.raises(ConfigError):
        PeriodicCosine(mean=0.0, amplitudes=(1.0,), wavenumbers=(2.0,), period=-1.0)


def test_periodic_cosine_lower_bound_covers_trough():
    spec = PeriodicCosine(mean=1.0, amplitudes=(-2.0,), wavenumbers=(2.0,), period=math.pi)
    g = build_grid(10.0, 2001)
    v = eval_potential(spec, g)
    assert v.min() >= -spec.lower_bound - 1e-12
    assert spec.lower_bound == pytest.approx(1.0)


def test_confining_power_shape_and_validation():
    spec = ConfiningPower(gamma=2.0, beta=4.0, offset=1.0)
    g = build_grid(2.0, 5)
    v = eval_potential(spec, g)
    assert v[0] == pytest.approx(2.0 * 16.0 - 1.0)
    assert v[2] == pytest.approx(-1.0)
    for bad in (dict(gamma=0.0, beta=2.0), dict(gamma=1.0, beta=0.0),
                dict(gamma=1.0, beta=2.0, offset=-0.5)):
        with pytest.raises(ConfigError):
            ConfiningPower(**bad)


def test_tabulated_potential_contract():
    g = build_grid(1.0, 5)
    spec = Tabulated(samples=(1.0, 2.0, 3.0, 2.0, 1.0),
                     spectral_class=("asymptotically-constant", 1.0))
    assert np.array_equal(eval_potential(spec, g), [1.0, 2.0, 3.0, 2.0, 1.0])
    with pytest.raises(ConfigError):
        Tabulated(samples=(1.0, 2.0), spectral_class=("confining",))
    with pytest.raises(InvalidPotentialError):
        Tabulated(samples=(1.0, math.inf, 1.0), spectral_class=("confining",))
    with pytest.raises(ConfigError):
        Tabulated(samples=(1.0, 2.0, 1.0), spectral_class=("mystery",))
    # sample count must match the grid it is evaluated on
    with pytest.raises(ConfigError):
        eval_potential(spec, build_grid(1.0, 7))


def test_eval_potential_output_read_only():
    v = eval_potential(Constant(1.0), build_grid(1.0, 11))
    with pytest.raises(ValueError):
        v[0] = 0.0


# --------------------------------------------------------------------------
# Nonlinearities


def test_pure_power_values():
    nl = PurePower(p=4.0)
    f, df = nl.f_df(0.0, np.array([2.0, -2.0, 0.0]))
    assert np.allclose(f, [8.0, -8.0, 0.0])
    assert np.allclose(df, [12.0, 12.0, 0.0])
    assert nl.growth_exponent == 4.0


def test_pure_power_rejects_nearly_linear_exponents():
    # p just above 2 makes f(u)/u ~ |u|**(p-2) decay too slowly at the
    # audit amplitude; such powers violate superlinear vanishing at 0.
    with pytest.raises(ConfigError):
        PurePower(p=2.5)
    PurePower(p=3.0)  # fine
    with pytest.raises(ConfigError):
        PurePower(p=1.5)


def test_asymptotically_linear_limits():
    nl = AsymptoticallyLinear()
    u = np.array([1e-4, 1e3])
    f, _ = nl.f_df(0.0, u)
    assert f[0] / u[0] ** 3 == pytest.approx(1.0, rel=1e-6)   # cubic near zero
    assert f[1] / u[1] == pytest.approx(1.0, rel=1e-5)        # linear at infinity
    assert nl.growth_exponent == 2.0


def test_saturable_growth_constant_certifies_envelope():
    nl = SaturableScaled(amplitude=3.0, saturation=2.0)
    assert nl.growth_constant == pytest.approx(1.5)
    samples = np.linspace(-50, 50, 2001)
    assert audit_growth(nl, samples) <= 1.0 + 1e-12
    with pytest.raises(ConfigError):
        SaturableScaled(amplitude=0.0, saturation=1.0)
    with pytest.raises(ConfigError):
        SaturableScaled(amplitude=1.0, saturation=-1.0)


@pytest.mark.parametrize("nl", [
    PurePower(p=4.0),
    PurePower(p=3.0),
    AsymptoticallyLinear(),
    SaturableScaled(amplitude=2.0, saturation=0.5),
])
def test_derivative_matches_finite_difference(nl):
    u = np.linspace(-3.0, 3.0, 41)
    _, df = nl.f_df(0.0, u)
    eps = 1e-6
    f_plus, _ = nl.f_df(0.0, u + eps)
    f_minus, _ = nl.f_df(0.0, u - eps)
    fd = (f_plus - f_minus) / (2 * eps)
    assert np.allclose(df, fd, atol=5e-6, rtol=1e-5)


@given(st.floats(min_value=-10, max_value=10, allow_nan=False))
def test_pure_power_is_odd(u):
    f, _ = PurePower(p=4.0).f_df(0.0, np.array([u]))
    f_neg, _ = PurePower(p=4.0).f_df(0.0, np.array([-u]))
    assert f[0] == -f_neg[0]


def test_eval_nonlinearity_rejects_non_finite():
    with pytest.raises(ConfigError):
        eval_nonlinearity(PurePower(p=4.0), np.array([1.0, math.nan]))


def test_audit_growth_pure_power_tight():
    # |u|**(p-1) against c_p (1 + |u|**(p-1)) is always below 1
    nl = PurePower(p=4.0)
    samples = np.linspace(-100, 100, 999)
    assert audit_growth(nl, samples) <= 1.0
