"""Continuous exploration and exploitation (CEE) for K-of-N restless arms.

The engine never touches an environment. A driver asks for the next decision
(an arm set and a step length), plays it, and reports back one sample mean per
played arm. ``K == 1`` is the single-arm algorithm; ``K > 1`` initializes in
batches of K and then plays the K largest indices each step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import HandshakeError, PolicyConfigError, ScheduleError
from .protocol import Decision, Observation


@dataclass(frozen=True)
class StepSchedule:
    """Non-decreasing step lengths B_1, B_2, ... (1-indexed).

    ``constant``: B_i = B.  ``logarithmic``: B_i = offset + ceil(scale * ln(i + 1)).
    ``custom``: an explicit prefix; past its end the last value is held, so it
    only counts as divergent when the caller attests it.
    """

    kind: str
    values: tuple = ()
    scale: float = 1.0
    offset: int = 1
    attested_divergent: bool = False

    def __post_init__(self):
        if self.kind not in ("constant", "logarithmic", "custom"):
            raise ScheduleError(f"unknown schedule kind {self.kind!r}")
        if self.kind in ("constant", "custom"):
            if len(self.values) == 0:
                raise ScheduleError("empty schedule")
            if any(int(v) != v or v < 1 for v in self.values):
                raise ScheduleError(f"step lengths must be positive integers, got {self.values}")
            if any(b < a for a, b in zip(self.values, self.values[1:])):
                raise ScheduleError("step lengths must be non-decreasing")
        if self.kind == "constant" and len(self.values) != 1:
            raise ScheduleError("constant schedule takes exactly one value")
        if self.kind == "logarithmic" and (self.scale <= 0 or self.offset < 1):
            raise ScheduleError("logarithmic schedule needs scale > 0 and offset >= 1")

    @classmethod
    def constant(cls, B: int) -> "StepSchedule":
        return cls("constant", (int(B),))

    @classmethod
    def logarithmic(cls, scale: float = 1.0, offset: int = 1) -> "StepSchedule":
        return cls("logarithmic", scale=float(scale), offset=int(offset))

    @classmethod
    def custom(cls, values: Sequence[int], divergent: bool = False) -> "StepSchedule":
        return cls("custom", tuple(int(v) for v in values), attested_divergent=divergent)

    @property
    def divergent(self) -> bool:
        return self.kind == "logarithmic" or self.attested_divergent

    def __call__(self, i: int) -> int:
        if i < 1:
            raise IndexError("step indices start at 1")
        if self.kind == "constant":
            return self.values[0]
        if self.kind == "logarithmic":
            return self.offset + math.ceil(self.scale * math.log(i + 1))
        return self.values[min(i, len(self.values)) - 1]

    def prefix(self, count: int) -> list:
        return [self(i) for i in range(1, count + 1)]

    def describe(self) -> str:
        if self.kind == "constant":
            return f"constant B={self.values[0]}"
        if self.kind == "logarithmic":
            return f"logarithmic B_i={self.offset}+ceil({self.scale:g}*ln(i+1))"
        return f"custom {list(self.values)}"


def init_batches(n_arms: int, k: int) -> list:
    """Initialization arm sets: K fresh arms per batch, the last one padded
    with the lowest-indexed arms already initialized. Returns (arms, fresh)."""
    batches = []
    for start in range(0, n_arms, k):
        fresh = tuple(range(start, min(start + k, n_arms)))
        pad = tuple(a for a in range(start) if a not in fresh)[: k - len(fresh)]
        batches.append((fresh + pad, fresh))
    return batches


class CeePolicy:
    """State: per-arm sums of step sample means ``x_hat``, step counts ``plays``,
    the global step index ``step`` (i) and the elapsed slot count ``elapsed`` (n).
    """

    name = "cee"

    def __init__(self, n_arms: int, k: int = 1, L: float = 2.1, schedule: StepSchedule | None = None,
                 *, unsafe: bool = False, count_padded: bool = True):
        if schedule is None:
            raise PolicyConfigError("a step schedule is required")
        if not 1 <= k < n_arms:
            raise PolicyConfigError(f"need 1 <= K < N, got K={k}, N={n_arms}")
        if L <= 2 and not unsafe:
            raise PolicyConfigError(f"L must exceed 2 (got {L}); pass unsafe=True to override")
        self.n_arms = n_arms
        self.k = k
        self.L = float(L)
        self.schedule = schedule
        self.count_padded = count_padded
        self.x_hat = [0.0] * n_arms
        self.plays = [0] * n_arms
        self.step = 1
        self.elapsed = 0
        self.main_steps = 0
        self._batches = init_batches(n_arms, k)
        self._batch = 0
        self._pending = None

    @property
    def phase(self) -> str:
        return "initializing" if self._batch < len(self._batches) else "main-loop"

    def _log_n(self) -> float:
        return math.log(self.elapsed) if self.elapsed > 1 else 0.0

    def index_values(self) -> np.ndarray:
        """F(j) = x_hat_j / i_j + sqrt(L ln n / i_j) at the current elapsed n."""
        ln_n = self._log_n()
        return np.array([
            x / i + math.sqrt(self.L * ln_n / i) if i > 0 else math.inf
            for x, i in zip(self.x_hat, self.plays)
        ])

    def top_k(self) -> tuple:
        """Arms with the K largest indices; ties go to the lowest arm id."""
        f = self.index_values().tolist()
        order = sorted(range(self.n_arms), key=lambda j: (-f[j], j))
        return tuple(order[: self.k])

    def next_decision(self) -> Decision:
        if self._pending is not None:
            raise HandshakeError("next_decision called twice without a report")
        if self.phase == "initializing":
            arms = self._batches[self._batch][0]
        else:
            arms = self.top_k()
        decision = Decision(arms, self.schedule(self.step))
        self._pending = decision
        return decision

    def report_step(self, arms, sample_means, slots: int | None = None):
        """Record one step. ``slots`` is the number actually played (truncation)."""
        pending = self._pending
        if pending is None:
            raise HandshakeError("report without a pending decision")
        if tuple(arms) != pending.arms:
            raise HandshakeError(f"reported arms {tuple(arms)} != decided arms {pending.arms}")
        played = pending.slots if slots is None else int(slots)
        if not 1 <= played <= pending.slots:
            raise HandshakeError(f"played {played} slots of a {pending.slots}-slot step")
        means = [float(m) for m in sample_means]
        if len(means) != len(arms):
            raise HandshakeError("one sample mean per played arm is required")
        if any(not 0.0 <= m <= 1.0 for m in means):
            raise HandshakeError(f"sample means must lie in [0, 1], got {means}")

        counted = arms
        if self.phase == "initializing":
            if not self.count_padded:
                counted = self._batches[self._batch][1]
            self._batch += 1
        else:
            self.main_steps += 1
        for a, m in zip(arms, means):
            if a in counted:
                self.x_hat[a] += m
                self.plays[a] += 1
        self.step += 1
        self.elapsed += played
        self._pending = None

    def observe(self, obs: Observation):
        """Harness adapter: reduce an observation to per-arm sample means."""
        means = [math.fsum(row) / obs.length for row in obs.rewards.tolist()]
        self.report_step(obs.arms, means, obs.length)
