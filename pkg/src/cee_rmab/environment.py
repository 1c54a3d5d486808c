"""Restless multi-channel environment driven by per-arm uniform streams.

Every arm owns one random stream and consumes exactly one uniform per slot,
played or not, so a run is reproducible from its seed and equal in law and in
value to stepping each arm with :func:`cee_rmab.markov.advance`.
"""

from __future__ import annotations

import zlib
from typing import Sequence

import numpy as np

from ._kernels import play_block
from .errors import HandshakeError
from .markov import ArmState, RewardedMarkovChain
from .protocol import Decision, Observation

BUFFER_SLOTS = 1 << 15


def policy_key(name: str) -> int:
    """Stable 32-bit key for a policy name (crc32 of its UTF-8 bytes)."""
    return zlib.crc32(name.encode("utf-8"))


def run_seed_sequence(master_seed: int, policy: str, run: int) -> np.random.SeedSequence:
    """Counter-based stream for run ``run`` of ``policy``.

    ``SeedSequence(master_seed, spawn_key=(crc32(policy), run))`` so any run can
    be regenerated on its own; arm ``a`` then uses child ``a`` of that sequence.
    """
    return np.random.SeedSequence(master_seed, spawn_key=(policy_key(policy), run))


def arm_generators(seq: np.random.SeedSequence, n_arms: int) -> list:
    return [np.random.Generator(np.random.PCG64(child)) for child in seq.spawn(n_arms)]


def _pad_cumulative(chains, attr):
    m = max(c.state_count for c in chains)
    out = np.ones((len(chains), m, m))
    for a, c in enumerate(chains):
        k = c.state_count
        out[a, :k, :k] = getattr(c, attr)
    return out


class ChannelEnvironment:
    """All N arms of one run. Not thread-safe; one instance per run."""

    def __init__(self, chains: Sequence[RewardedMarkovChain], seed, initial=None):
        self.chains = list(chains)
        n = len(self.chains)
        if isinstance(seed, np.random.SeedSequence):
            gens = arm_generators(seed, n)
        else:
            gens = list(seed)
        if initial is None or isinstance(initial, str):
            initial = [initial] * n
        arms = [ArmState.start(c, g, init) for c, g, init in zip(self.chains, gens, initial)]
        self._gens = gens
        self.states = np.array([a.current_state for a in arms], dtype=np.int64)
        self._n_states = np.array([c.state_count for c in self.chains], dtype=np.int64)
        self._cum_active = _pad_cumulative(self.chains, "active_cumulative")
        self._cum_passive = _pad_cumulative(self.chains, "passive_cumulative")
        width = int(self._n_states.max())
        self._reward_table = np.zeros((n, width))
        for a, c in enumerate(self.chains):
            self._reward_table[a, : c.state_count] = c.rewards
        self._arm_sets = {}
        self._buffer = np.empty((n, 0))
        self._pos = 0
        self.elapsed = 0

    @property
    def n_arms(self) -> int:
        return len(self.chains)

    def _ensure(self, slots: int):
        left = self._buffer.shape[1] - self._pos
        if left >= slots:
            return
        size = max(BUFFER_SLOTS, slots)
        fresh = np.empty((self.n_arms, left + size))
        fresh[:, :left] = self._buffer[:, self._pos:]
        for a, g in enumerate(self._gens):
            fresh[a, left:] = g.random(size)
        self._buffer = fresh
        self._pos = 0

    def _prepare(self, arms):
        arms = tuple(int(a) for a in arms)
        if not arms or len(set(arms)) != len(arms) or not all(0 <= a < self.n_arms for a in arms):
            raise HandshakeError(f"invalid arm set {arms}")
        mask = np.zeros(self.n_arms, dtype=np.bool_)
        mask[list(arms)] = True
        played = np.array(arms, dtype=np.int64)
        return arms, mask, played, played[:, None]

    def play(self, decision: Decision, slots: int | None = None) -> Observation:
        """Run one decision for at most ``slots`` slots (defaults to the decision's)."""
        limit = decision.slots if slots is None else min(slots, decision.slots)
        if limit < 1:
            raise HandshakeError(f"decision must cover at least one slot, got {limit}")
        cached = self._arm_sets.get(decision.arms)
        if cached is None:
            cached = self._arm_sets[decision.arms] = self._prepare(decision.arms)
        arms, mask, played, rows = cached
        self._ensure(limit)
        out = np.empty((len(arms), limit), dtype=np.int64)
        length = play_block(
            self._cum_active, self._cum_passive, self._n_states, self.states, mask, played,
            self._buffer, self._pos, limit, arms[0], decision.stop_state, decision.stop_visits, out,
        )
        self._pos += length
        self.elapsed += length
        states = out[:, :length]
        rewards = self._reward_table[rows, states]
        return Observation(arms, states, rewards)
