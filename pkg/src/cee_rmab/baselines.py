"""Parameter thresholds for the RCA and RUCB baselines, and reconstructions of both.

The reconstructions are comparative stand-ins built from a short prose
description, not faithful ports; every output produced with them carries the
``RECONSTRUCTED`` label.

RCA (regenerative cycles): each arm has a regenerative state, fixed as the
first state observed on that arm. A block on arm i is sub-block 1 (play until
the regenerative state is seen) followed by sub-block 2 (the regenerative cycle
that starts there and ends when the state recurs). Only sub-block 2 rewards
feed the index ``mean_i + sqrt(L ln t2 / T2_i)`` where ``T2_i`` counts arm i's
sub-block 2 slots and ``t2`` all sub-block 2 slots. The slot in which the
state recurs closes the block; its reward is earned but not used.

RUCB (deterministic exploration/exploitation epochs): before each epoch, if the
per-arm exploration time so far, ``(4**e - 1) / 3`` after ``e`` exploration
epochs, is below ``D ln t``, the next epoch explores: arms are played in
round-robin batches of K for ``4**e`` slots each. Otherwise an exploitation
epoch of ``2 * 4**x`` slots (x-th such epoch) plays the K arms with the largest
exploration sample means.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import HandshakeError, PolicyConfigError
from .markov import RewardedMarkovChain, eigen_gaps, stationary_distribution, validate_chain
from .policy import init_batches
from .protocol import Decision, Observation

RECONSTRUCTED = "reconstructed baseline"


@dataclass(frozen=True)
class BaselineThresholds:
    rca_L_min: float
    rucb_L_min: float
    rucb_D_min: float
    rucb_D_at_L: float | None
    chosen_L: float | None
    s_max: int
    r_max: float
    pi_hat_max: float
    eps_min: float
    eps_star: float
    top_gap: float

    def as_rows(self) -> list:
        rows = [
            ("S_max", self.s_max), ("r_max", self.r_max), ("pi_hat_max", self.pi_hat_max),
            ("eps_min (symmetrized gap)", self.eps_min), ("eps_star (plain gap)", self.eps_star),
            ("mu_(1) - mu_(K+1)", self.top_gap),
            ("RCA L_min", self.rca_L_min), ("RUCB L_min", self.rucb_L_min), ("RUCB D_min", self.rucb_D_min),
        ]
        if self.chosen_L is not None:
            rows.append((f"RUCB D_min at L={self.chosen_L:g}", self.rucb_D_at_L))
        return rows


def _inputs(chains):
    for c in chains:
        validate_chain(c, strict_rewards=False)
    profiles = [stationary_distribution(c) for c in chains]
    s_max = max(c.state_count for c in chains)
    r_max = max(float(c.rewards.max()) for c in chains)
    pi_hat = max(float(max(p.pi.max(), (1 - p.pi).max())) for p in profiles)
    gaps = [eigen_gaps(c) for c in chains]
    return profiles, s_max, r_max, pi_hat, gaps


def rca_threshold(chains: Sequence[RewardedMarkovChain]) -> float:
    """112 S_max^2 r_max^2 pi_hat_max^2 / eps_min (eps_min: smallest symmetrized gap)."""
    _, s_max, r_max, pi_hat, gaps = _inputs(chains)
    eps_min = min(g.symmetrized for g in gaps)
    return 112 * s_max ** 2 * r_max ** 2 * pi_hat ** 2 / eps_min


def rucb_thresholds(chains: Sequence[RewardedMarkovChain], k: int = 1, L: float | None = None):
    """(L_min, D_min) with D_min evaluated at L_min; and D at ``L`` when given.

    L_min = (4 * 20 r_max^2 S_max^2 / (3 - 2 sqrt 2) + 10 r_max^2) / eps_star with
    eps_star the smallest plain gap 1 - lambda_2(P); D = 4 L / (mu_(1) - mu_(K+1))^2.
    """
    t = baseline_thresholds(chains, k, L)
    return t.rucb_L_min, t.rucb_D_min


def baseline_thresholds(chains: Sequence[RewardedMarkovChain], k: int = 1, L: float | None = None) -> BaselineThresholds:
    profiles, s_max, r_max, pi_hat, gaps = _inputs(chains)
    mus = sorted((p.mu for p in profiles), reverse=True)
    if not 1 <= k < len(mus):
        raise PolicyConfigError(f"need 1 <= K < N, got K={k}, N={len(mus)}")
    gap = mus[0] - mus[k]
    if gap <= 0:
        raise PolicyConfigError("best and (K+1)-th stationary means coincide")
    eps_min = min(g.symmetrized for g in gaps)
    eps_star = min(g.plain for g in gaps)
    rucb_L = (4 * 20 * r_max ** 2 * s_max ** 2 / (3 - 2 * math.sqrt(2)) + 10 * r_max ** 2) / eps_star
    return BaselineThresholds(
        rca_L_min=112 * s_max ** 2 * r_max ** 2 * pi_hat ** 2 / eps_min,
        rucb_L_min=rucb_L,
        rucb_D_min=4 * rucb_L / gap ** 2,
        rucb_D_at_L=None if L is None else 4 * L / gap ** 2,
        chosen_L=L,
        s_max=s_max, r_max=r_max, pi_hat_max=pi_hat, eps_min=eps_min, eps_star=eps_star, top_gap=gap,
    )


class RcaPolicy:
    """Regenerative-cycle index policy, single play (K = 1). Reconstruction."""

    name = "rca"
    label = RECONSTRUCTED

    def __init__(self, n_arms: int, L: float = 415.0, max_chunk: int = 4096):
        if n_arms < 2:
            raise PolicyConfigError("RCA needs at least two arms")
        self.n_arms = n_arms
        self.L = float(L)
        self.max_chunk = max_chunk
        self.regen_state = [None] * n_arms
        self.sb2_reward = [0.0] * n_arms
        self.sb2_slots = [0] * n_arms
        self.blocks = []  # (arm, first slot, slots) of completed blocks
        self.elapsed = 0
        self._arm = None
        self._phase = None  # None (between blocks) | "sb1" | "sb2"
        self._cycle = []
        self._block_start = 0
        self._next_fresh = 0
        self._pending = None

    @property
    def total_sb2(self) -> int:
        return sum(self.sb2_slots)

    def index_values(self) -> list:
        t2 = self.total_sb2
        ln_t2 = math.log(t2) if t2 > 1 else 0.0
        return [
            self.sb2_reward[a] / n + math.sqrt(self.L * ln_t2 / n) if n > 0 else math.inf
            for a, n in enumerate(self.sb2_slots)
        ]

    def _start_block(self):
        if self._next_fresh < self.n_arms:
            arm = self._next_fresh
            self._next_fresh += 1
        else:
            f = self.index_values()
            arm = min(range(self.n_arms), key=lambda a: (-f[a], a))
        self._arm = arm
        self._block_start = self.elapsed
        self._cycle = []
        self._phase = "sb2" if self.regen_state[arm] is None else "sb1"

    def next_decision(self) -> Decision:
        if self._pending is not None:
            raise HandshakeError("next_decision called twice without a report")
        if self._phase is None:
            self._start_block()
        arm = self._arm
        if self.regen_state[arm] is None:
            d = Decision((arm,), 1)
        else:
            d = Decision((arm,), self.max_chunk, stop_state=self.regen_state[arm], stop_visits=1)
        self._pending = d
        return d

    def observe(self, obs: Observation):
        d = self._pending
        if d is None or obs.arms != d.arms:
            raise HandshakeError("observation does not match the pending decision")
        self._pending = None
        arm = self._arm
        states = obs.states[0].tolist()
        rewards = obs.rewards[0].tolist()
        self.elapsed += len(states)
        if self.regen_state[arm] is None:
            # first ever slot on this arm fixes its regenerative state and opens a cycle
            self.regen_state[arm] = states[0]
            self._cycle = [rewards[0]]
            return
        hit = states[-1] == self.regen_state[arm]
        if self._phase == "sb1":
            if hit:
                self._phase = "sb2"
                self._cycle = [rewards[-1]]
            return
        if not hit:
            self._cycle.extend(rewards)
            return
        self._cycle.extend(rewards[:-1])
        self.sb2_reward[arm] += math.fsum(self._cycle)
        self.sb2_slots[arm] += len(self._cycle)
        self.blocks.append((arm, self._block_start, self.elapsed - self._block_start))
        self._phase = None
        self._cycle = []


class RucbPolicy:
    """Deterministic exploration/exploitation epochs. Reconstruction."""

    name = "rucb"
    label = RECONSTRUCTED

    def __init__(self, n_arms: int, k: int = 1, L: float = 3126.0, D: float = 171520.0):
        if not 1 <= k < n_arms:
            raise PolicyConfigError(f"need 1 <= K < N, got K={k}, N={n_arms}")
        if D <= 0:
            raise PolicyConfigError("D must be positive")
        self.n_arms = n_arms
        self.k = k
        self.L = float(L)
        self.D = float(D)
        self.explore_epochs = 0
        self.exploit_epochs = 0
        self.reward_sum = [0.0] * n_arms
        self.sample_count = [0] * n_arms
        self.elapsed = 0
        self.epochs = []  # (kind, first slot, planned slots)
        self._queue = []
        self._exploring = False
        self._pending = None

    def _begin_epoch(self):
        t = self.elapsed
        explored = (4 ** self.explore_epochs - 1) // 3
        if t == 0 or explored < self.D * math.log(t):
            length = 4 ** self.explore_epochs
            self.explore_epochs += 1
            self._exploring = True
            self._queue = [(arms, length) for arms, _ in init_batches(self.n_arms, self.k)]
            self.epochs.append(("exploration", t, length * len(self._queue)))
        else:
            length = 2 * 4 ** self.exploit_epochs
            self.exploit_epochs += 1
            self._exploring = False
            means = [s / c if c else math.inf for s, c in zip(self.reward_sum, self.sample_count)]
            best = tuple(sorted(range(self.n_arms), key=lambda a: (-means[a], a))[: self.k])
            self._queue = [(best, length)]
            self.epochs.append(("exploitation", t, length))

    def next_decision(self) -> Decision:
        if self._pending is not None:
            raise HandshakeError("next_decision called twice without a report")
        if not self._queue:
            self._begin_epoch()
        arms, length = self._queue[0]
        d = Decision(arms, length)
        self._pending = d
        return d

    def observe(self, obs: Observation):
        d = self._pending
        if d is None or obs.arms != d.arms:
            raise HandshakeError("observation does not match the pending decision")
        self._pending = None
        self.elapsed += obs.length
        if self._exploring:
            for a, row in zip(obs.arms, obs.rewards.tolist()):
                self.reward_sum[a] += math.fsum(row)
                self.sample_count[a] += len(row)
        arms, length = self._queue[0]
        if obs.length >= length:
            self._queue.pop(0)
        else:
            self._queue[0] = (arms, length - obs.length)
