"""Finite rewarded Markov chains: validation, stationary and spectral quantities,
and single-slot state evolution.

A chain carries an active matrix ``P`` (used in slots where the arm is played),
a passive matrix ``Q`` (all other slots) and one reward per state.  The reward
attached to a slot is the reward of the state occupied during that slot; the
chain steps first, then the occupant's reward is collected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Sequence

import numpy as np

from .errors import ChainValidationError, SolverError

STOCHASTIC_TOL = 1e-12
STATIONARY_TOL = 1e-10
REVERSIBILITY_TOL = 1e-10
DIRECT_SOLVE_MAX_STATES = 500


@dataclass(frozen=True, eq=False)
class RewardedMarkovChain:
    """One arm. Immutable once built; safe to share between runs."""

    active: np.ndarray
    rewards: np.ndarray
    passive: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        P = np.array(self.active, dtype=float)
        r = np.array(self.rewards, dtype=float).ravel()
        Q = P.copy() if self.passive is None else np.array(self.passive, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] == 0:
            raise ChainValidationError("shape", f"active matrix must be square, got {P.shape}")
        if Q.shape != P.shape:
            raise ChainValidationError("shape", f"passive matrix shape {Q.shape} != {P.shape}")
        if r.shape != (P.shape[0],):
            raise ChainValidationError("shape", f"need {P.shape[0]} rewards, got {r.size}")
        for a in (P, Q, r):
            a.setflags(write=False)
        object.__setattr__(self, "active", P)
        object.__setattr__(self, "passive", Q)
        object.__setattr__(self, "rewards", r)

    @property
    def state_count(self) -> int:
        return self.active.shape[0]

    @cached_property
    def active_cumulative(self) -> np.ndarray:
        return np.cumsum(self.active, axis=1)

    @cached_property
    def passive_cumulative(self) -> np.ndarray:
        return np.cumsum(self.passive, axis=1)

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"<RewardedMarkovChain{label} states={self.state_count}>"


def gilbert_elliott(p01, p10, rewards=(0.1, 1.0), name="", passive=None) -> RewardedMarkovChain:
    """Two-state good/bad channel. State 0 is bad, state 1 is good."""
    P = np.array([[1.0 - p01, p01], [p10, 1.0 - p10]])
    return RewardedMarkovChain(P, np.asarray(rewards, dtype=float), passive, name)


@dataclass
class ValidationReport:
    stochastic: bool
    irreducible: bool
    aperiodic: bool
    period: int
    rewards_ok: bool
    reversible: bool
    max_row_error: float
    warnings: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return self.stochastic and self.irreducible and self.aperiodic and self.rewards_ok


def _reachable(adj: np.ndarray, start: int) -> np.ndarray:
    seen = np.zeros(adj.shape[0], dtype=bool)
    seen[start] = True
    frontier = [start]
    while frontier:
        nxt = []
        for u in frontier:
            for v in np.flatnonzero(adj[u] & ~seen):
                seen[v] = True
                nxt.append(int(v))
        frontier = nxt
    return seen


def _period(adj: np.ndarray) -> int:
    """gcd of level[u] + 1 - level[v] over all support edges (BFS levels)."""
    n = adj.shape[0]
    level = np.full(n, -1)
    level[0] = 0
    frontier = [0]
    while frontier:
        nxt = []
        for u in frontier:
            for v in np.flatnonzero(adj[u]):
                if level[v] < 0:
                    level[v] = level[u] + 1
                    nxt.append(int(v))
        frontier = nxt
    us, vs = np.nonzero(adj)
    diffs = np.abs(level[us] + 1 - level[vs])
    return int(reduce(math.gcd, diffs.tolist(), 0))


def _check_stochastic(M: np.ndarray) -> float:
    if np.any(M < 0) or np.any(M > 1):
        return math.inf
    return float(np.max(np.abs(M.sum(axis=1) - 1.0)))


def validate_chain(chain: RewardedMarkovChain, strict_rewards: bool = True) -> ValidationReport:
    """Check stochasticity, irreducibility, aperiodicity and rewards; raise on failure.

    Reversibility is only reported: a non-reversible chain gets a warning entry
    but is accepted. With ``strict_rewards=False`` zero rewards are allowed
    (threshold formulas do not need positivity).
    """
    P, Q, r = chain.active, chain.passive, chain.rewards
    row_err = _check_stochastic(P)
    if row_err > STOCHASTIC_TOL:
        bad = int(np.argmax(np.abs(P.sum(axis=1) - 1.0)))
        raise ChainValidationError(
            "stochastic", f"active row {bad} sums to {P[bad].sum():.12g} or has entries outside [0, 1]"
        )
    q_err = _check_stochastic(Q)
    if q_err > STOCHASTIC_TOL:
        raise ChainValidationError("stochastic", "passive matrix is not row-stochastic")

    lo = 0.0 if not strict_rewards else np.nextafter(0.0, 1.0)
    if np.any(r < lo) or np.any(r > 1.0):
        raise ChainValidationError("rewards", f"rewards must lie in {'(0, 1]' if strict_rewards else '[0, 1]'}, got {r}")

    adj = P > 0
    if not (_reachable(adj, 0).all() and _reachable(adj.T.copy(), 0).all()):
        raise ChainValidationError("irreducible", "active transition graph is not strongly connected")
    period = _period(adj)
    if period != 1:
        raise ChainValidationError("aperiodic", f"active chain has period {period}")

    report = ValidationReport(True, True, True, period, True, True, max(row_err, q_err))
    pi = _solve_stationary(P)
    flow = pi[:, None] * P
    if np.max(np.abs(flow - flow.T)) > REVERSIBILITY_TOL:
        report.reversible = False
        report.warnings.append("active chain is not reversible; regret guarantees assume reversibility")
    return report


@dataclass(frozen=True, eq=False)
class StationaryProfile:
    pi: np.ndarray
    mu: float
    min_pi: float
    reward_sum: float
    residual: float = 0.0


def _solve_stationary(P: np.ndarray) -> np.ndarray:
    n = P.shape[0]
    if n <= DIRECT_SOLVE_MAX_STATES:
        A = P.T - np.eye(n)
        A[-1, :] = 1.0
        b = np.zeros(n)
        b[-1] = 1.0
        pi = np.linalg.solve(A, b)
    else:
        pi = np.full(n, 1.0 / n)
        for _ in range(100_000):
            nxt = pi @ P
            if np.max(np.abs(nxt - pi)) < 1e-14:
                pi = nxt
                break
            pi = nxt
    return pi / pi.sum()


def stationary_distribution(chain: RewardedMarkovChain) -> StationaryProfile:
    """Stationary law of the active matrix and the derived per-arm constants."""
    P = chain.active
    pi = _solve_stationary(P)
    residual = float(np.max(np.abs(pi @ P - pi)))
    if not np.all(np.isfinite(pi)) or residual > STATIONARY_TOL or np.any(pi <= 0):
        raise SolverError(f"stationary solve failed for {chain!r}: residual {residual:.3e}")
    r = chain.rewards
    return StationaryProfile(
        pi=pi,
        mu=float(r @ pi),
        min_pi=float(pi.min()),
        reward_sum=float(r.sum()),
        residual=residual,
    )


def arm_deviation_constant(chain: RewardedMarkovChain) -> float:
    """(min_x pi_x)^-1 * sum of state rewards for one arm."""
    prof = stationary_distribution(chain)
    return prof.reward_sum / prof.min_pi


def chain_constant(chains: Sequence[RewardedMarkovChain]) -> float:
    """The scenario-wide deviation constant C_P: the max of the per-arm constant."""
    if len(chains) == 0:
        raise ValueError("chain_constant needs at least one arm")
    return max(arm_deviation_constant(c) for c in chains)


@dataclass(frozen=True)
class EigenGaps:
    plain: float
    symmetrized: float


def _second_eigenvalue(M: np.ndarray) -> float:
    if M.shape[0] == 1:
        return 0.0
    vals = np.sort(np.real(np.linalg.eigvals(M)))[::-1]
    return float(vals[1])


def time_reversal(chain: RewardedMarkovChain) -> np.ndarray:
    pi = stationary_distribution(chain).pi
    return (chain.active.T * pi[None, :]) / pi[:, None]


def eigen_gaps(chain: RewardedMarkovChain) -> EigenGaps:
    """1 - lambda_2 of P and of its multiplicative symmetrization P~ P.

    Eigenvalues are ordered by real part; the unit eigenvalue comes first.
    """
    P = chain.active
    sym = time_reversal(chain) @ P
    return EigenGaps(plain=1.0 - _second_eigenvalue(P), symmetrized=1.0 - _second_eigenvalue(sym))


def next_state(cumulative_row, u: float) -> int:
    """Inverse-CDF draw: first index whose cumulative mass exceeds ``u``."""
    k = int(np.searchsorted(cumulative_row, u, side="right"))
    return min(k, len(cumulative_row) - 1)


@dataclass
class ArmState:
    """Mutable per-run state of one arm. Owned by exactly one run."""

    current_state: int
    rng: np.random.Generator

    @classmethod
    def start(cls, chain: RewardedMarkovChain, rng: np.random.Generator, initial=None):
        """Draw the starting state from the stationary law unless ``initial`` fixes it.

        One uniform is consumed either way so streams stay aligned.
        """
        u = rng.random()
        if initial is None or initial == "stationary":
            state = next_state(np.cumsum(stationary_distribution(chain).pi), u)
        else:
            state = int(initial)
            if not 0 <= state < chain.state_count:
                raise ValueError(f"initial state {state} out of range")
        return cls(state, rng)


def advance(arm: ArmState, chain: RewardedMarkovChain, played: bool):
    """Step one slot. Returns ``(new_state, reward)``; reward is None when unplayed."""
    cum = chain.active_cumulative if played else chain.passive_cumulative
    arm.current_state = next_state(cum[arm.current_state], arm.rng.random())
    reward = float(chain.rewards[arm.current_state]) if played else None
    return arm.current_state, reward
