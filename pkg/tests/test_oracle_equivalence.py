"""The engine's full decision/counter trace equals the straight-line interpreter."""

import pytest

from cee_rmab.environment import ChannelEnvironment, run_seed_sequence
from cee_rmab.policy import CeePolicy, StepSchedule

from conftest import five_chains, toy_chains
from oracles import SlotEnvironment, arm_streams, cee_reference

SEEDS = range(100)
HORIZON = 1000


def engine_trace(chains, k, L, schedule, seed, initial, horizon, count_padded=True):
    env = ChannelEnvironment(chains, run_seed_sequence(seed, "cee", 0), initial)
    pol = CeePolicy(len(chains), k, L, schedule, count_padded=count_padded)
    trace = []
    while env.elapsed < horizon:
        i, n = pol.step, pol.elapsed
        obs = env.play(pol.next_decision(), horizon - env.elapsed)
        pol.observe(obs)
        trace.append((i, obs.arms, obs.length, n, tuple(pol.plays), tuple(pol.x_hat)))
    return trace


def reference_trace(chains, k, L, schedule, seed, initial, horizon, count_padded=True):
    env = SlotEnvironment([c.active for c in chains], [c.passive for c in chains],
                          [c.rewards for c in chains], arm_streams(seed, "cee", 0, len(chains)), initial)
    return cee_reference(env, len(chains), k, L, schedule, horizon, count_padded)


def _compare(chains, k, schedule, initial, count_padded=True):
    for seed in SEEDS:
        ours = engine_trace(chains, k, 2.1, schedule, seed, initial, HORIZON, count_padded)
        ref = reference_trace(chains, k, 2.1, schedule, seed, initial, HORIZON, count_padded)
        assert ours == ref, f"seed {seed}: traces diverge"


def test_single_arm_selection_matches_reference():
    _compare(toy_chains(), 1, StepSchedule.logarithmic(), [0, 2])


def test_single_arm_constant_schedule_matches_reference():
    _compare(toy_chains(), 1, StepSchedule.constant(7), [1, 0])


def test_multi_arm_selection_matches_reference():
    _compare(five_chains(), 2, StepSchedule.logarithmic(), [0, 1, 0, 1, 0])


@pytest.mark.parametrize("count_padded", [True, False])
def test_padding_choice_matches_reference(count_padded):
    chains = five_chains()
    for seed in range(10):
        args = (chains, 2, 2.5, StepSchedule.constant(3), seed, [1, 1, 0, 0, 1], 400, count_padded)
        assert engine_trace(*args) == reference_trace(*args)
