"""Exact-arithmetic regularity ladder.

Everything in here is rational: any float leaking into the ladder is a bug,
so the tests assert types as much as values.
"""

from fractions import Fraction as Fr

import pytest
from hypothesis import given
from hypothesis import strategies as st

from nlslab import (
    BootstrapState,
    ConfigError,
    SlackError,
    SupercriticalExponentError,
    make_problem,
    run_bootstrap,
    verify_gain,
)
from nlslab.bootstrap import REASON_DIM_ONE, REASON_DIM_TWO, REASON_LADDER


def test_critical_exponent_values():
    assert make_problem(3, 3).two_star == Fr(6)
    assert make_problem(4, 3).two_star == Fr(4)
    assert make_problem(5, 3).two_star == Fr(10, 3)
    assert make_problem(2, 9).two_star is None
    assert make_problem(1, 9).two_star is None


def test_cubic_three_dimensions_never_climbs():
    prob = make_problem(3, 3)
    out = run_bootstrap(prob)
    assert out.k_star == 0
    assert out.delta_used is False
    assert [s.r for s in out.states] == [Fr(6)]
    assert out.states[0].terminated
    assert out.reason == REASON_LADDER


def test_quintic_three_dimensions_with_explicit_slack():
    prob = make_problem(3, 5, Fr(1, 2))
    out = run_bootstrap(prob)
    assert prob.delta == Fr(4) - Fr(3) - Fr(1, 2) == Fr(1, 2)
    assert [s.r for s in out.states] == [Fr(6), Fr(12)]
    assert out.k_star == 1
    assert out.delta_used is True
    assert prob.threshold == Fr(3 * 4, 2) == Fr(6)
    assert out.states[0].q == Fr(12)  # the one genuine climb
    assert not out.states[0].terminated and out.states[1].terminated


def test_default_slack_is_half_the_supremum():
    prob = make_problem(5, 3)
    # sup = 4/(n-2) - (p-2) = 4/3 - 1 = 1/3, default eps = 1/6
    assert prob.eps == Fr(1, 6)
    assert prob.delta == Fr(4, 3) - Fr(1) - Fr(1, 6) == Fr(1, 6)
    out = run_bootstrap(prob)
    assert out.k_star >= 1
    assert all(isinstance(s.r, Fr) for s in out.states)


def test_verify_gain_closed_form_at_first_rung():
    # parameter sets chosen so delta < 1 and the first state is active
    for n, p in ((3, 5), (4, 3), (5, 3), (6, Fr(7, 3))):
        prob = make_problem(n, p)
        out = run_bootstrap(prob)
        got = verify_gain(prob, out.states[0])
        assert got == Fr(n - 2, 2 * n) * prob.eps
        assert isinstance(got, Fr)


def test_verify_gain_with_explicit_slack():
    prob = make_problem(3, 5, Fr(1, 2))
    out = run_bootstrap(prob)
    assert verify_gain(prob, out.states[0]) == Fr(1, 6) * Fr(1, 2) == Fr(1, 12)


def test_verify_gain_grows_along_the_ladder():
    # delta = 1/100 forces a dozen rungs before clearing n(p-1)/2 = 27/4
    prob = make_problem(3, Fr(11, 2), Fr(49, 100))
    out = run_bootstrap(prob)
    gains = [verify_gain(prob, s) for s in out.states if s.q is not None]
    assert len(gains) >= 10
    assert all(b > a for a, b in zip(gains, gains[1:]))


def test_supercritical_exponent_rejected():
    with pytest.raises(SupercriticalExponentError):
        make_problem(3, 7)
    with pytest.raises(SupercriticalExponentError):
        make_problem(3, 6)  # critical boundary excluded too
    with pytest.raises(SupercriticalExponentError):
        make_problem(4, 4)


def test_slack_bounds():
    with pytest.raises(SlackError):
        make_problem(3, 5, Fr(0))
    with pytest.raises(SlackError):
        make_problem(3, 5, Fr(1))  # sup is exactly 1 here; eps must be < sup
    with pytest.raises(SlackError):
        make_problem(3, 5, Fr(-1, 4))
    # just inside the open interval is fine
    assert make_problem(3, 5, Fr(999, 1000)).delta == Fr(1, 1000)


def test_input_type_policy():
    with pytest.raises(ConfigError):
        make_problem(0, 3)
    with pytest.raises(ConfigError):
        make_problem(-2, 3)
    with pytest.raises(ConfigError):
        make_problem(True, 3)
    with pytest.raises(ConfigError):
        make_problem(3, 1)  # p must be at least 2
    with pytest.raises(ConfigError):
        make_problem(3, 3.0)  # floats never sneak into exact arithmetic
    with pytest.raises(ConfigError):
        make_problem(3, 3, 0.25)
    with pytest.raises(ConfigError):
        make_problem(3.0, 3)
    with pytest.raises(ConfigError):
        make_problem(3, "not-a-ratio")


def test_low_dimensions_are_terminal():
    one = run_bootstrap(make_problem(1, 5))
    two = run_bootstrap(make_problem(2, 9))
    assert one.k_star == 0 and one.states == ()
    assert two.k_star == 0 and two.states == ()
    assert one.reason == REASON_DIM_ONE
    assert two.reason == REASON_DIM_TWO
    dummy = BootstrapState(k=0, r=Fr(2), s=Fr(1), q=Fr(4), terminated=True)
    with pytest.raises(ConfigError):
        verify_gain(make_problem(2, 9), dummy)
    with pytest.raises(SlackError):
        make_problem(2, 9, Fr(-1, 2))  # slack still validated when given


def test_large_contraction_skips_the_climb():
    # delta >= 1 means no meaningful climb factor; the first rung must
    # already clear the threshold (it does, exactly because sup > 1)
    prob = make_problem(3, Fr(5, 2), Fr(1, 4))
    assert prob.delta == Fr(4) - Fr(1, 2) - Fr(1, 4) == Fr(13, 4)
    out = run_bootstrap(prob)
    assert out.k_star == 0
    assert out.states[0].q is None
    assert out.states[0].terminated
    with pytest.raises(ConfigError):
        verify_gain(prob, out.states[0])


@given(
    n=st.integers(min_value=3, max_value=10),
    t=st.integers(min_value=1, max_value=39),
    e=st.integers(min_value=1, max_value=39),
)
def test_admissible_problems_always_terminate(n, t, e):
    # exact barycentric coordinates inside the admissible open set:
    # p strictly between 2 and 2*, eps strictly between 0 and the slack sup
    crit = Fr(2 * n, n - 2)
    p = 2 + (crit - 2) * Fr(t, 40)
    sup = Fr(4, n - 2) - (p - 2)
    eps = sup * Fr(e, 40)

    prob = make_problem(n, p, eps)
    out = run_bootstrap(prob)

    rs = [s.r for s in out.states]
    assert rs[0] == crit
    assert all(isinstance(r, Fr) for r in rs)
    assert all(b > a for a, b in zip(rs, rs[1:]))
    assert out.states[-1].terminated and rs[-1] > prob.threshold
    assert not any(s.terminated for s in out.states[:-1])
    assert out.k_star == len(rs) - 1
    # every active state gains strictly
    for s in out.states:
        if s.q is not None:
            assert s.q > s.r
            assert verify_gain(prob, s) > 0
