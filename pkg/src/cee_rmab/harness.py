"""Seeded multi-run experiments: drive a policy through the handshake slot by
slot, record cumulative reward, and estimate regret against the top-K genie.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .baselines import RECONSTRUCTED, RcaPolicy, RucbPolicy
from .environment import ChannelEnvironment, run_seed_sequence
from .errors import ExportError, HandshakeError, ScenarioError
from .policy import CeePolicy
from .protocol import Decision
from .scenario import ScenarioConfig

log = logging.getLogger(__name__)

CSV_COLUMNS = ("n", "mean_reward", "regret", "regret_over_ln_n", "reward_variance")


class GeniePolicy:
    """Plays the K arms with the highest stationary means forever."""

    name = "genie"

    def __init__(self, best_arms, chunk: int = 4096):
        self.arms = tuple(best_arms)
        self.chunk = chunk

    def next_decision(self) -> Decision:
        return Decision(self.arms, self.chunk)

    def observe(self, obs):
        pass


def make_policy(cfg: ScenarioConfig, name: str):
    if name == "genie":
        return GeniePolicy(cfg.best_arms())
    params = cfg.policy_spec(name).params
    if name == "cee":
        return CeePolicy(cfg.n_arms, cfg.k, params["L"], cfg.policy_spec("cee").schedule(),
                         unsafe=params.get("unsafe", False), count_padded=params.get("count_padded", True))
    if name == "rca":
        if cfg.k != 1:
            raise ScenarioError("the RCA reconstruction supports K = 1 only")
        return RcaPolicy(cfg.n_arms, params["L"])
    if name == "rucb":
        return RucbPolicy(cfg.n_arms, cfg.k, params["L"], params["D"])
    raise ScenarioError(f"unknown policy {name!r}")


def display_name(name: str) -> str:
    return f"{name.upper()} ({RECONSTRUCTED})" if name in ("rca", "rucb") else name.upper()


@dataclass(frozen=True, eq=False)
class EpisodeResult:
    """One run. ``steps`` rows are (first slot, slots, main-loop flag, arm_1..arm_K)."""

    policy: str
    run: int
    sample_points: tuple
    cumulative: np.ndarray
    steps: np.ndarray
    horizon: int

    def late_fraction(self, target_arms, tail: float = 0.1) -> float:
        """Share of main-loop steps starting in the last ``tail`` of the horizon
        whose arm set equals ``target_arms``."""
        s = self.steps
        late = (s[:, 2] == 1) & (s[:, 0] >= (1 - tail) * self.horizon)
        if not late.any():
            return math.nan
        sets = np.sort(s[late, 3:], axis=1)
        return float(np.all(sets == np.sort(np.asarray(target_arms)), axis=1).mean())


def run_episode(cfg: ScenarioConfig, run: int, policy_name: str | None = None, policy=None,
                record_steps: bool = True) -> EpisodeResult:
    """Simulate ``cfg.horizon`` slots of one run; every arm advances every slot."""
    name = policy_name or cfg.policy
    if policy is None:
        policy = make_policy(cfg, name)
    env = ChannelEnvironment(cfg.arms, run_seed_sequence(cfg.seed, name, run), cfg.initial)
    points = list(cfg.sample_points)
    n_points = len(points)
    cumulative = np.empty(n_points)
    steps = []
    p = 0
    total = 0.0
    t = 0
    while t < cfg.horizon:
        main = getattr(policy, "phase", "main-loop") == "main-loop"
        decision = policy.next_decision()
        obs = env.play(decision, cfg.horizon - t)
        policy.observe(obs)
        length = obs.length
        if record_steps:
            steps.append((t, length, int(main), *obs.arms))
        rewards = obs.rewards
        if p < n_points and points[p] <= t + length:
            running = total + np.cumsum(rewards.sum(axis=0))
            while p < n_points and points[p] <= t + length:
                cumulative[p] = running[points[p] - t - 1]
                p += 1
        total += float(rewards.sum())
        t += length
    if t != cfg.horizon:
        raise HandshakeError(f"slot accounting broke: {t} != {cfg.horizon}")
    width = 3 + cfg.k
    step_arr = np.array(steps, dtype=np.int64).reshape(-1, width) if steps else np.empty((0, width), np.int64)
    return EpisodeResult(name, run, tuple(points), cumulative, step_arr, cfg.horizon)


def _episode_job(args):
    cfg, run, name, record = args
    return run_episode(cfg, run, name, record_steps=record)


def run_many(cfg: ScenarioConfig, policy_name: str | None = None, workers: int = 1,
             record_steps: bool = True) -> list:
    """All ``cfg.runs`` runs, in run order regardless of ``workers``."""
    name = policy_name or cfg.policy
    jobs = [(cfg, r, name, record_steps) for r in range(cfg.runs)]
    if workers <= 1:
        return [_episode_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_episode_job, jobs))


@dataclass(frozen=True, eq=False)
class RegretTrace:
    policy: str
    genie_rate: float
    n: np.ndarray
    mean_reward: np.ndarray
    regret: np.ndarray
    regret_over_ln_n: np.ndarray
    reward_variance: np.ndarray
    per_run: np.ndarray | None = None

    @property
    def label(self) -> str:
        return display_name(self.policy)


def _regret_columns(n, mean, genie_rate):
    regret = n * genie_rate - mean
    with np.errstate(divide="ignore", invalid="ignore"):
        per_ln = np.where(n >= 2, regret / np.log(np.maximum(n, 2)), np.nan)
    return regret, per_ln


def estimate_regret(cfg: ScenarioConfig, results: Sequence[EpisodeResult]) -> RegretTrace:
    """Across-run mean cumulative reward, regret n*sum(top-K mu) - mean, and variance."""
    if not results:
        raise ValueError("need at least one run")
    per_run = np.vstack([r.cumulative for r in results]) if results[0].cumulative.size else np.empty((len(results), 0))
    n = np.asarray(cfg.sample_points, dtype=float)
    mean = per_run.mean(axis=0) if per_run.size else np.empty(0)
    var = per_run.var(axis=0, ddof=1) if len(results) > 1 else np.zeros_like(mean)
    regret, per_ln = _regret_columns(n, mean, cfg.genie_rate)
    return RegretTrace(results[0].policy, cfg.genie_rate, n.astype(np.int64), mean, regret, per_ln, var, per_run)


def bootstrap_regret_ci(trace: RegretTrace, index: int = -1, resamples: int = 10_000,
                        level: float = 0.95, seed: int = 0) -> tuple:
    """Percentile bootstrap CI of regret / ln n at one sample point, over runs."""
    if trace.per_run is None or trace.per_run.shape[0] < 2:
        raise ValueError("bootstrap needs per-run rewards from at least two runs")
    rewards = trace.per_run[:, index]
    n = float(trace.n[index])
    rng = np.random.default_rng(seed)
    picks = rng.integers(0, rewards.size, size=(resamples, rewards.size))
    stats = (n * trace.genie_rate - rewards[picks].mean(axis=1)) / math.log(n)
    lo, hi = np.quantile(stats, [(1 - level) / 2, (1 + level) / 2])
    return float(lo), float(hi)


def _fmt(x) -> str:
    return "" if isinstance(x, float) and math.isnan(x) else repr(float(x))


def trace_to_csv(trace: RegretTrace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in zip(trace.n, trace.mean_reward, trace.regret, trace.regret_over_ln_n, trace.reward_variance):
        w.writerow([int(row[0])] + [_fmt(float(v)) for v in row[1:]])
    return buf.getvalue()


def write_trace_csv(trace: RegretTrace, path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(trace_to_csv(trace))
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc}") from exc
    return path


def read_trace_csv(path, policy: str = "", genie_rate: float = math.nan) -> RegretTrace:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise ExportError(f"{path}: header must be {','.join(CSV_COLUMNS)}")
    body = rows[1:]
    col = lambda i: np.array([float(r[i]) if r[i] else math.nan for r in body])  # noqa: E731
    n = np.array([int(r[0]) for r in body], dtype=np.int64)
    return RegretTrace(policy or Path(path).stem.split(".")[0], genie_rate, n, col(1), col(2), col(3), col(4))


def output_name(policy: str) -> str:
    return f"{policy}-reconstructed" if policy in ("rca", "rucb") else policy


def export(traces: Sequence[RegretTrace], out_dir, plots: bool = True) -> list:
    """One CSV per policy and, when ``plots``, one SVG per metric with a series per policy."""
    out_dir = Path(out_dir)
    written = [write_trace_csv(t, out_dir / f"{output_name(t.policy)}.csv") for t in traces]
    if plots:
        from .plotting import plot_metrics

        written += plot_metrics(traces, out_dir)
    return written
