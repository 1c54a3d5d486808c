"""Closed-form constants of the CEE regret analysis and the resulting bound curves.

Everything is evaluated in arbitrary precision: the exploration constants
involve terms like ``exp(4 * alpha / L)``, which for realistic scenarios are
far outside double range (scenario S gives roughly e^802). Ceilings are applied
exactly where the analysis uses them and nowhere else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import mpmath

from .errors import BoundError, InfeasibleScheduleError
from .policy import StepSchedule

mpmath.mp.dps = 60
PI2_OVER_3 = mpmath.pi ** 2 / 3
_Q_SEARCH_LIMIT = 10 ** 7


@dataclass(frozen=True)
class ScenarioTruth:
    """Fully known scenario: arm means (arm order), C_P, K, L and the schedule.

    ``order`` is the permutation sigma: ``order[0]`` is the arm with the largest
    mean. Tied means are rejected.
    """

    mus: tuple
    c_p: float
    k: int
    L: float
    schedule: StepSchedule
    order: tuple = field(init=False)

    def __post_init__(self):
        mus = tuple(float(m) for m in self.mus)
        object.__setattr__(self, "mus", mus)
        if not 1 <= self.k < len(mus):
            raise BoundError(f"need 1 <= K < N, got K={self.k}, N={len(mus)}")
        order = tuple(sorted(range(len(mus)), key=lambda a: (-mus[a], a)))
        ranked = [mus[a] for a in order]
        if any(b >= a for a, b in zip(ranked, ranked[1:])):
            raise BoundError(f"stationary means must be distinct, got {mus}")
        object.__setattr__(self, "order", order)

    @property
    def n_arms(self) -> int:
        return len(self.mus)

    def mu(self, rank: int) -> float:
        """Mean of the arm of rank ``rank`` (1-based, rank 1 is the best)."""
        return self.mus[self.order[rank - 1]]


def g_of_n(schedule: StepSchedule, n: int) -> int:
    """Step length in force at slot n: B_I for the smallest I with B_1+...+B_I >= n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    total = 0
    i = 0
    while total < n:
        i += 1
        total += schedule(i)
    return schedule(i)


def required_step_length(truth: ScenarioTruth, k: int | None = None) -> float:
    """max{2 C_P / (mu_(k) - mu_(k+1)), C_P / mu_l for all l}, before the ceiling."""
    k = truth.k if k is None else k
    gap = truth.mu(k) - truth.mu(k + 1)
    return max([2 * truth.c_p / gap] + [truth.c_p / m for m in truth.mus])


def _smallest_index(schedule: StepSchedule, needed: int) -> int:
    if schedule.kind == "constant" or (schedule.kind == "custom" and not schedule.divergent):
        for i, b in enumerate(schedule.values, start=1):
            if b >= needed:
                return i
        raise InfeasibleScheduleError(needed, schedule.values[-1])
    for i in range(1, _Q_SEARCH_LIMIT):
        if schedule(i) >= needed:
            return i
    raise BoundError(f"no step length reaches {needed} within {_Q_SEARCH_LIMIT} steps")


def q_index(truth: ScenarioTruth) -> int:
    """Smallest i with B_i >= ceil(required bound) for the single-arm analysis."""
    return _smallest_index(truth.schedule, math.ceil(required_step_length(truth, 1)))


def q_prime_index(truth: ScenarioTruth) -> int:
    """Same search with the gap between ranks K and K+1."""
    return _smallest_index(truth.schedule, math.ceil(required_step_length(truth)))


def _mp(x):
    # read floats through their shortest repr so a configured 2.1 is exactly 2.1
    return mpmath.mpf(repr(float(x)))


def _ceil(x) -> int:
    return int(mpmath.ceil(x))


def _exploration_count(q, w, L) -> int:
    # 1 + ceil(max{q, [w / (sqrt L - sqrt 2)]^2})
    return 1 + _ceil(max(mpmath.mpf(q), (w / (mpmath.sqrt(L) - mpmath.sqrt(2))) ** 2))


def _ratio(mu_j, c):
    if mu_j <= c:
        raise BoundError(f"arm mean {float(mu_j):.6g} <= C_P/B_q = {float(c):.6g}: ratio undefined")
    return (mu_j + c) / (mu_j - c)


def _coefficient(L, mu_i, mu_j, c):
    """L (1 + ratio_j)^2 / (mu_i - mu_j - 2c)^2 without ceiling or ln n."""
    margin = mu_i - mu_j - 2 * c
    if margin <= 0:
        raise BoundError(
            f"gap {float(mu_i - mu_j):.6g} <= 2 C_P/B_q = {float(2 * c):.6g}: bound is vacuous for this schedule"
        )
    return L * (1 + _ratio(mu_j, c)) ** 2 / margin ** 2


@dataclass(frozen=True)
class BoundConstants:
    """Constants of both analyses. Per-rank dicts are keyed by sigma rank (1-based)."""

    q: int
    B_q: int
    w_star: object
    w_i: dict
    alpha_star: int
    alpha_i: dict
    gamma: int
    q_prime: int
    B_q_prime: int
    m_j_star: dict
    m_i: dict
    beta_j_star: dict
    beta_i: dict
    gamma_prime: int
    Z1: object
    Z2: object
    Z3: object
    Z4: object
    Z5: object
    Z6: object
    Z7: object
    Z8: object

    def as_rows(self) -> list:
        rows = [("q", self.q), ("B_q", self.B_q), ("w*", self.w_star)]
        rows += [(f"w^{i}", v) for i, v in self.w_i.items()]
        rows += [("alpha*", self.alpha_star)]
        rows += [(f"alpha^{i}", v) for i, v in self.alpha_i.items()]
        rows += [("gamma", self.gamma), ("q'", self.q_prime), ("B_q'", self.B_q_prime)]
        rows += [(f"m*_{j}", v) for j, v in self.m_j_star.items()]
        rows += [(f"m^{i}", v) for i, v in self.m_i.items()]
        rows += [(f"beta*_{j}", v) for j, v in self.beta_j_star.items()]
        rows += [(f"beta^{i}", v) for i, v in self.beta_i.items()]
        rows += [("gamma'", self.gamma_prime)]
        rows += [(f"Z{i}", getattr(self, f"Z{i}")) for i in range(1, 9)]
        return rows


def _single_arm_part(truth: ScenarioTruth, q: int, B_q: int) -> dict:
    L = _mp(truth.L)
    N = truth.n_arms
    c = _mp(truth.c_p) / B_q
    mu = [None] + [_mp(truth.mu(r)) for r in range(1, N + 1)]
    w_star = q * (mu[1] - c)
    w_i = {i: q * (mu[i] - c) / (mu[i] + c) * (mu[i] + c - 1) for i in range(2, N + 1)}
    alpha_star = _exploration_count(q, w_star, L)
    alpha_i = {i: _exploration_count(q, w, L) for i, w in w_i.items()}

    def terms(a):
        return [(N - 1) * (4 * a + 1) + a, (N - 1) * mpmath.exp(4 * mpmath.mpf(a) / L) + a]

    gamma = _ceil(max(terms(alpha_star) + [t for a in alpha_i.values() for t in terms(a)]))

    coeffs = {j: _ceil(_coefficient(L, mu[1], mu[j], c)) for j in range(2, N + 1)}
    gaps = {j: mu[1] - mu[j] for j in range(2, N + 1)}
    tail = gamma + PI2_OVER_3
    cp = _mp(truth.c_p)
    return dict(
        q=q, B_q=B_q, w_star=w_star, w_i=w_i, alpha_star=alpha_star, alpha_i=alpha_i, gamma=gamma,
        Z1=mpmath.fsum(gaps[j] * coeffs[j] for j in coeffs),
        Z2=3 * cp * sum(coeffs.values()),
        Z3=tail * mpmath.fsum(gaps.values()) + 1,
        Z4=3 * (N - 1) * cp * tail,
    )


def _multi_arm_part(truth: ScenarioTruth, q: int, B_q: int) -> dict:
    L = _mp(truth.L)
    N, K = truth.n_arms, truth.k
    c = _mp(truth.c_p) / B_q
    mu = [None] + [_mp(truth.mu(r)) for r in range(1, N + 1)]
    m_star = {j: q * (mu[j] - c) for j in range(1, K + 1)}
    m_i = {i: q * (mu[i] - c) / (mu[i] + c) * (mu[i] + c - 1) for i in range(K + 1, N + 1)}
    beta_star = {j: _exploration_count(q, m, L) for j, m in m_star.items()}
    beta_i = {i: _exploration_count(q, m, L) for i, m in m_i.items()}

    def terms(b):
        return [(N - 1) * (5 * b + 1) + b, (N - 1) * (mpmath.exp(4 * mpmath.mpf(b) / L) + b) + b]

    gamma_prime = _ceil(max(t for b in list(beta_star.values()) + list(beta_i.values()) for t in terms(b)))

    coeffs = {j: _ceil(_coefficient(L, mu[K], mu[j], c)) for j in range(K + 1, N + 1)}
    tail = gamma_prime + PI2_OVER_3
    cp = _mp(truth.c_p)
    return dict(
        q_prime=q, B_q_prime=B_q, m_j_star=m_star, m_i=m_i, beta_j_star=beta_star, beta_i=beta_i,
        gamma_prime=gamma_prime,
        Z5=mpmath.fsum((mu[1] - mu[j]) * coeffs[j] for j in coeffs),
        Z6=3 * cp * sum(coeffs.values()),
        Z7=tail * mpmath.fsum(mu[K] - mu[j] for j in coeffs) + K,
        Z8=3 * (N - K) * cp * tail,
    )


_SINGLE_FIELDS = ("q", "B_q", "w_star", "w_i", "alpha_star", "alpha_i", "gamma", "Z1", "Z2", "Z3", "Z4")


def _single_or_blank(truth, q_of, b_of):
    # K > 1 scenarios only need the single-arm constants when they exist
    try:
        q = q_of()
        return _single_arm_part(truth, q, b_of(q))
    except (InfeasibleScheduleError, BoundError):
        if truth.k == 1:
            raise
        return dict.fromkeys(_SINGLE_FIELDS)


def bound_constants(truth: ScenarioTruth) -> BoundConstants:
    """Constants for the configured schedule (q and q' searched on it)."""
    qp = q_prime_index(truth)
    single = _single_or_blank(truth, lambda: q_index(truth), truth.schedule)
    return BoundConstants(**single, **_multi_arm_part(truth, qp, truth.schedule(qp)))


def corollary_constants(truth: ScenarioTruth) -> BoundConstants:
    """Constants for the constant schedule B_i = ceil(required bound), so q = q' = 1."""
    b1 = math.ceil(required_step_length(truth, 1))
    bk = math.ceil(required_step_length(truth))
    single = _single_or_blank(truth, lambda: 1, lambda q: b1)
    return BoundConstants(**single, **_multi_arm_part(truth, 1, bk))


def lambda_term(truth: ScenarioTruth, n: int, j: int, i: int | None = None, ceil: bool = True):
    """Suboptimal-play count term for the arm of rank j against rank i.

    i defaults to 1 (single-arm analysis) when K == 1 and to K otherwise; the
    step length used is B_q (K == 1) or B_q' (K > 1).
    """
    K = truth.k
    i = (1 if K == 1 else K) if i is None else i
    if j <= K:
        raise BoundError(f"rank {j} is not suboptimal for K={K}")
    if n < 2:
        raise BoundError("lambda needs n >= 2")
    q = q_index(truth) if K == 1 else q_prime_index(truth)
    c = _mp(truth.c_p) / truth.schedule(q)
    raw = _coefficient(_mp(truth.L), _mp(truth.mu(i)), _mp(truth.mu(j)), c) * mpmath.log(n)
    return _ceil(raw) if ceil else raw


VARIANTS = ("theorem1", "corollary1", "theorem2", "corollary2")


def regret_bound(truth: ScenarioTruth, n: int, variant: str = "theorem1", constants: BoundConstants | None = None):
    """Upper bound on the expected regret after n slots (an mpmath number)."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    if constants is None:
        constants = corollary_constants(truth) if variant.startswith("corollary") else bound_constants(truth)
    ln_n = mpmath.log(n)
    if variant == "theorem1":
        g = g_of_n(truth.schedule, n)
        z = constants.Z1, constants.Z2, constants.Z3, constants.Z4
    elif variant == "corollary1":
        g = constants.B_q
        z = constants.Z1, constants.Z2, constants.Z3, constants.Z4
    elif variant == "theorem2":
        g = g_of_n(truth.schedule, n)
        z = constants.Z5, constants.Z6, constants.Z7, constants.Z8
    else:
        g = constants.B_q_prime
        z = constants.Z5, constants.Z6, constants.Z7, constants.Z8
    return z[0] * g * ln_n + z[1] * ln_n + z[2] * g + z[3]


def bound_curve(truth: ScenarioTruth, points: Sequence[int]) -> list:
    """Rows (n, theorem_bound, corollary_bound) using the K-appropriate variants."""
    multi = truth.k > 1
    th = bound_constants(truth)
    co = corollary_constants(truth)
    tv, cv = ("theorem2", "corollary2") if multi else ("theorem1", "corollary1")
    return [(n, regret_bound(truth, n, tv, th), regret_bound(truth, n, cv, co)) for n in points]
