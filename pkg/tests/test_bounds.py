import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cee_rmab.bounds import (ScenarioTruth, bound_constants, bound_curve, corollary_constants, g_of_n,
                             lambda_term, q_index, regret_bound, required_step_length)
from cee_rmab.errors import BoundError, InfeasibleScheduleError
from cee_rmab.policy import StepSchedule

MUS = (0.325, 0.58, 0.85, 0.4, 0.25)


def truth(B=49, k=1, L=2.1, schedule=None):
    return ScenarioTruth(MUS, 6.6, k, L, schedule or StepSchedule.constant(B))


def oracle_single(mus, cp, L, B, q=1):
    """Straight evaluation of the single-arm constants with 80-digit arithmetic."""
    with mpmath.workdps(80):
        mu = sorted(map(mpmath.mpf, map(str, mus)), reverse=True)
        N, L, cp = len(mu), mpmath.mpf(str(L)), mpmath.mpf(str(cp))
        c = cp / B
        root = mpmath.sqrt(L) - mpmath.sqrt(2)
        alpha = lambda w: 1 + int(mpmath.ceil(max(q, (w / root) ** 2)))  # noqa: E731
        a_star = alpha(q * (mu[0] - c))
        a_i = [alpha(q * (m - c) / (m + c) * (m + c - 1)) for m in mu[1:]]
        cand = []
        for a in [a_star] + a_i:
            cand += [(N - 1) * (4 * a + 1) + a, (N - 1) * mpmath.exp(4 * a / L) + a]
        gamma = int(mpmath.ceil(max(cand)))
        coef = [int(mpmath.ceil(L * (1 + (m + c) / (m - c)) ** 2 / (mu[0] - m - 2 * c) ** 2)) for m in mu[1:]]
        gaps = [mu[0] - m for m in mu[1:]]
        tail = gamma + mpmath.pi ** 2 / 3
        Z = (sum(g * k for g, k in zip(gaps, coef)), 3 * cp * sum(coef), tail * sum(gaps) + 1,
             3 * (N - 1) * cp * tail)
        return a_star, a_i, gamma, Z


def test_required_b_for_scenario_s():
    # 2 * 6.6 / (0.85 - 0.58)
    assert required_step_length(truth()) == pytest.approx(48.8888888889, abs=1e-9)
    assert round(required_step_length(truth()), 2) == 48.89


def test_required_b_for_two_plays():
    # 2 * 6.6 / (0.58 - 0.40)
    assert required_step_length(truth(k=2)) == pytest.approx(73.3333333333, abs=1e-9)


def test_constants_against_oracle():
    c = bound_constants(truth())
    a_star, a_i, gamma, Z = oracle_single(MUS, 6.6, 2.1, 49)
    assert c.q == 1 and c.B_q == 49
    assert c.alpha_star == a_star == 421
    assert [c.alpha_i[i] for i in range(2, 6)] == a_i == [27, 45, 43, 29]
    assert mpmath.almosteq(mpmath.mpf(c.gamma), mpmath.mpf(gamma), rel_eps=mpmath.mpf(10) ** -55)
    for ours, ref in zip((c.Z1, c.Z2, c.Z3, c.Z4), Z):
        assert mpmath.almosteq(ours, ref, rel_eps=mpmath.mpf(10) ** -50)


def test_frozen_scenario_s_values():
    c = bound_constants(truth())
    assert float(c.Z1) == pytest.approx(10265025.59, rel=1e-9)
    assert float(c.Z2) == pytest.approx(752745034.8, rel=1e-9)
    assert mpmath.nstr(c.Z3, 8) == "1.3516662e+349"
    assert mpmath.nstr(c.Z4, 8) == "5.8022746e+350"


def test_multi_arm_constants_reduce_to_single_when_k_is_one():
    c = bound_constants(truth())
    assert c.Z5 == c.Z1 and c.Z6 == c.Z2
    assert c.beta_j_star[1] == c.alpha_star and c.beta_i == c.alpha_i
    # the printed gamma' adds (N-1)*beta to both candidates; at this size the
    # difference vanishes next to e^(4 alpha / L)
    assert mpmath.almosteq(c.Z7, c.Z3, rel_eps=mpmath.mpf(10) ** -40)


def test_corollary_uses_ceiled_requirement():
    t = truth(schedule=StepSchedule.logarithmic())
    c = corollary_constants(t)
    assert c.q == 1 and c.B_q == 49
    assert regret_bound(t, 10 ** 6, "corollary1") == regret_bound(truth(), 10 ** 6, "theorem1")


def test_regret_bound_shape():
    t = truth()
    c = bound_constants(t)
    n = 10 ** 6
    expected = c.Z1 * 49 * mpmath.log(n) + c.Z2 * mpmath.log(n) + c.Z3 * 49 + c.Z4
    assert regret_bound(t, n, "corollary1") == expected
    assert mpmath.nstr(expected, 3) == "1.24e+351"


def test_bound_curve_is_increasing():
    rows = bound_curve(truth(), [10, 100, 1000, 10 ** 6])
    values = [r[1] for r in rows]
    assert values == sorted(values)


def test_lambda_term():
    t = truth()
    lam = lambda_term(t, 10 ** 6, 2)
    assert lam == 525211868
    with pytest.raises(BoundError):
        lambda_term(t, 10 ** 6, 1)


def test_infeasible_constant_schedule():
    with pytest.raises(InfeasibleScheduleError) as err:
        q_index(truth(B=48))
    assert err.value.required == 49 and err.value.actual == 48


def test_divergent_schedule_finds_q():
    t = truth(schedule=StepSchedule.logarithmic(scale=10))
    q = q_index(t)
    assert t.schedule(q) >= 49 > t.schedule(q - 1)


def test_tied_means_rejected():
    with pytest.raises(BoundError):
        ScenarioTruth((0.5, 0.5, 0.2), 6.6, 1, 2.1, StepSchedule.constant(49))


def test_k_bounds_on_truth():
    with pytest.raises(BoundError):
        ScenarioTruth(MUS, 6.6, 5, 2.1, StepSchedule.constant(49))


def test_unknown_variant():
    with pytest.raises(ValueError):
        regret_bound(truth(), 100, "theorem3")


schedules = st.one_of(
    st.integers(1, 50).map(StepSchedule.constant),
    st.tuples(st.floats(0.1, 4.0), st.integers(1, 4)).map(lambda t: StepSchedule.logarithmic(*t)),
    st.lists(st.integers(1, 20), min_size=1, max_size=10).map(lambda v: StepSchedule.custom(sorted(v))),
)


@settings(max_examples=1000, deadline=None)
@given(schedules, st.integers(1, 5000))
def test_g_is_monotone_and_below_b_n(schedule, n):
    g = g_of_n(schedule, n)
    assert g <= schedule(n)
    assert g <= g_of_n(schedule, n + 1)
    # definition: B_I for the smallest I whose prefix sum reaches n
    total, i = 0, 0
    while total < n:
        i += 1
        total += schedule(i)
    assert g == schedule(i)
