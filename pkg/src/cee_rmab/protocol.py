"""The decision/report handshake shared by every policy and the harness."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Decision:
    """Play ``arms`` for up to ``slots`` slots.

    When ``stop_visits > 0`` the environment ends the block early, right after
    ``arms[0]`` has been observed in ``stop_state`` that many times.
    """

    arms: tuple
    slots: int
    stop_state: int = -1
    stop_visits: int = 0


@dataclass(frozen=True, eq=False)
class Observation:
    """What the player sees: states and rewards of the played arms only."""

    arms: tuple
    states: np.ndarray
    rewards: np.ndarray

    @property
    def length(self) -> int:
        return self.states.shape[1]
