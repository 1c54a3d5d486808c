"""Restless multi-armed bandits with block-based index policies."""

from .baselines import RECONSTRUCTED, RcaPolicy, RucbPolicy, baseline_thresholds, rca_threshold, rucb_thresholds
from .bounds import (ScenarioTruth, bound_constants, bound_curve, corollary_constants, g_of_n, lambda_term,
                     regret_bound, required_step_length)
from .concentration import (CheckReport, TailCheckSpec, check_chernoff, check_drifted_chernoff,
                            check_markov_deviation, default_suite)
from .environment import ChannelEnvironment, run_seed_sequence
from .errors import *  # noqa: F401,F403
from .harness import EpisodeResult, GeniePolicy, RegretTrace, estimate_regret, export, read_trace_csv, run_episode, run_many
from .markov import (RewardedMarkovChain, chain_constant, eigen_gaps, gilbert_elliott, stationary_distribution,
                     validate_chain)
from .policy import CeePolicy, StepSchedule
from .protocol import Decision, Observation
from .scenario import ScenarioConfig, load_scenario, scenario_from_dict

__version__ = "0.1.0"
