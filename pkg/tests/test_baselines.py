import math

import numpy as np
import pytest

from cee_rmab.baselines import RECONSTRUCTED, RcaPolicy, RucbPolicy, baseline_thresholds, rca_threshold, rucb_thresholds
from cee_rmab.environment import ChannelEnvironment, run_seed_sequence
from cee_rmab.errors import HandshakeError, PolicyConfigError
from cee_rmab.markov import gilbert_elliott
from cee_rmab.protocol import Observation

from conftest import five_chains, toy_chains
from oracles import SlotEnvironment, arm_streams, rca_reference


def drive(policy, chains, seed, horizon, name):
    env = ChannelEnvironment(chains, run_seed_sequence(seed, name, 0), [0] * len(chains))
    while env.elapsed < horizon:
        policy.observe(env.play(policy.next_decision(), horizon - env.elapsed))
    return env


def test_thresholds_from_two_state_closed_forms(table_chains):
    t = baseline_thresholds(table_chains, 1, 3126)
    # S_max = 2, r_max = 1, pi_hat = 5/6 (ch.3), symmetrized gap min = 1 - 0.5^2 (ch.2)
    assert t.s_max == 2 and t.r_max == 1.0
    assert t.pi_hat_max == pytest.approx(5 / 6, abs=1e-12)
    assert t.eps_min == pytest.approx(0.75, abs=1e-12)
    assert t.eps_star == pytest.approx(0.6, abs=1e-12)
    assert t.rca_L_min == pytest.approx(112 * 4 * 25 / 36 / 0.75, rel=1e-12)
    L_min = (320 / (3 - 2 * math.sqrt(2)) + 10) / 0.6
    assert t.rucb_L_min == pytest.approx(L_min, rel=1e-12)
    assert t.rucb_D_min == pytest.approx(4 * L_min / 0.27 ** 2, rel=1e-9)
    assert t.rucb_D_at_L == pytest.approx(4 * 3126 / 0.27 ** 2, rel=1e-9)
    assert rca_threshold(table_chains) == t.rca_L_min
    assert rucb_thresholds(table_chains) == (t.rucb_L_min, t.rucb_D_min)


def test_thresholds_need_distinct_gap():
    chains = [gilbert_elliott(0.3, 0.6), gilbert_elliott(0.3, 0.6)]
    with pytest.raises(PolicyConfigError):
        baseline_thresholds(chains)


@pytest.mark.parametrize("seed", range(20))
def test_rca_matches_slot_level_reference(seed):
    chains = toy_chains()
    horizon = 3000
    pol = RcaPolicy(2, L=3.0, max_chunk=7)
    drive(pol, chains, seed, horizon, "rca")
    env = SlotEnvironment([c.active for c in chains], [c.passive for c in chains],
                          [c.rewards for c in chains], arm_streams(seed, "rca", 0, 2), [0, 0])
    blocks, r2, n2, regen = rca_reference(env, 2, 3.0, horizon)
    assert pol.blocks == blocks
    assert pol.sb2_reward == r2 and pol.sb2_slots == n2 and pol.regen_state == regen


def test_rca_hand_trace():
    # observations are fed by hand so every state is chosen
    pol = RcaPolicy(2, L=2.0)
    d = pol.next_decision()
    assert d.arms == (0,) and d.slots == 1
    pol.observe(Observation((0,), np.array([[1]]), np.array([[0.9]])))
    assert pol.regen_state == [1, None]
    d = pol.next_decision()
    assert d.stop_state == 1 and d.stop_visits == 1
    pol.observe(Observation((0,), np.array([[0, 0, 1]]), np.array([[0.1, 0.1, 0.9]])))
    # block: 0.9 (opening slot), 0.1, 0.1; the recurrence slot closes it unused
    assert pol.sb2_slots == [3, 0] and pol.sb2_reward[0] == pytest.approx(1.1)
    assert pol.blocks == [(0, 0, 4)]
    d = pol.next_decision()
    assert d.arms == (1,) and d.slots == 1
    pol.observe(Observation((1,), np.array([[0]]), np.array([[0.2]])))
    d = pol.next_decision()
    pol.observe(Observation((1,), np.array([[0]]), np.array([[0.2]])))
    assert pol.blocks[-1] == (1, 4, 2) and pol.sb2_slots == [3, 1]
    # index: mean + sqrt(L ln t2 / T2)
    f = pol.index_values()
    assert f[0] == pytest.approx(1.1 / 3 + math.sqrt(2.0 * math.log(4) / 3))
    assert f[1] == pytest.approx(0.2 + math.sqrt(2.0 * math.log(4) / 1))
    # next block opens on the larger index with sub-block 1
    d = pol.next_decision()
    assert d.arms == (1,) and d.stop_state == 0


def test_rca_blocks_partition_completed_time():
    chains = five_chains()
    pol = RcaPolicy(5, L=10.0)
    drive(pol, chains, 4, 20_000, "rca")
    t = 0
    for arm, start, length in pol.blocks:
        assert start == t and length >= 1
        t += length
    assert t <= 20_000


def test_rca_handshake_guard():
    pol = RcaPolicy(2)
    pol.next_decision()
    with pytest.raises(HandshakeError):
        pol.next_decision()
    with pytest.raises(HandshakeError):
        pol.observe(Observation((1,), np.array([[0]]), np.array([[0.1]])))


def test_rucb_epoch_structure():
    pol = RucbPolicy(3, 1, L=10, D=2.0)
    drive(pol, toy_chains() + [gilbert_elliott(0.5, 0.5)], 0, 3000, "rucb")
    kinds = [e[0] for e in pol.epochs]
    assert kinds[0] == "exploration"
    explore = [e for e in pol.epochs if e[0] == "exploration"]
    exploit = [e for e in pol.epochs if e[0] == "exploitation"]
    assert [e[2] for e in explore] == [3 * 4 ** i for i in range(len(explore))]
    assert [e[2] for e in exploit[:-1]] == [2 * 4 ** i for i in range(len(exploit) - 1)]
    # epochs tile the horizon in order
    starts = [e[1] for e in pol.epochs]
    assert starts == sorted(starts) and starts[0] == 0
    # exploration decision rule
    for kind, t, _ in pol.epochs[1:]:
        e = sum(1 for k, s, _ in pol.epochs if k == "exploration" and s < t)
        assert (kind == "exploration") == ((4 ** e - 1) / 3 < 2.0 * math.log(t))


def test_rucb_round_robin_and_exploitation_choice():
    pol = RucbPolicy(3, 2, L=10, D=0.5)
    seen = []
    rewards = {0: 0.2, 1: 0.9, 2: 0.5}
    for _ in range(3):
        d = pol.next_decision()
        seen.append((d.arms, d.slots))
        pol.observe(Observation(d.arms, np.zeros((2, d.slots), dtype=np.int64),
                                np.array([[rewards[a]] * d.slots for a in d.arms])))
    assert seen[:2] == [((0, 1), 1), ((2, 0), 1)]
    assert seen[2] == ((1, 2), 2)
    assert pol.sample_count == [2, 1, 1]


def test_rucb_only_exploration_samples_count():
    pol = RucbPolicy(2, 1, L=10, D=0.01)
    for _ in range(3):
        d = pol.next_decision()
        pol.observe(Observation(d.arms, np.zeros((1, d.slots), dtype=np.int64), np.full((1, d.slots), 0.5)))
    assert pol.epochs[-1][0] == "exploitation"
    assert sum(pol.sample_count) == 2


def test_rucb_config_errors():
    with pytest.raises(PolicyConfigError):
        RucbPolicy(2, 2)
    with pytest.raises(PolicyConfigError):
        RucbPolicy(3, 1, D=0)


def test_reconstruction_label():
    assert RcaPolicy.label == RucbPolicy.label == RECONSTRUCTED
