"""Monte Carlo checks of the concentration inequalities the analysis relies on.

Each check compares an empirical frequency (or mean) with its analytic bound
and passes when ``empirical <= bound + 3 * mc_sigma``. Reports always carry
the empirical value, the bound and the Monte Carlo standard error.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from ._kernels import markov_advance
from .markov import RewardedMarkovChain, stationary_distribution, validate_chain

SLACK_SIGMAS = 3.0
CHUNK = 10_000
SLAB = 256
GENERATORS = ("iid", "alternating", "drift_up", "drift_down", "markov")


@dataclass(frozen=True)
class TailCheckSpec:
    """Sum of ``n`` variables in ``[0, b]`` whose conditional means stay within
    ``C`` of ``mu``; deviation ``a``; ``replications`` independent sums."""

    n: int
    b: float
    C: float
    mu: float
    a: float
    replications: int = 100_000
    generator: str = "iid"
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.replications < 1:
            raise ValueError("n and replications must be positive")
        if self.b <= 0 or self.a < 0 or self.C < 0:
            raise ValueError("need b > 0, a >= 0, C >= 0")
        if not 0 < self.mu <= self.b:
            raise ValueError("mu must lie in (0, b]")
        if self.C >= self.mu:
            raise ValueError(f"drift C={self.C} must be below mu={self.mu}")
        if self.mu + self.C > self.b:
            raise ValueError("mu + C exceeds the range bound b")
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}; choose from {GENERATORS}")
        if self.generator == "markov" and not math.isclose(self.mu, self.b / 2):
            raise ValueError("the markov generator is the symmetric {0, b} chain and needs mu = b/2")


@dataclass(frozen=True)
class CheckReport:
    check: str
    label: str
    empirical: float
    bound: float
    mc_sigma: float
    replications: int
    extrapolated: bool = False

    @property
    def passed(self) -> bool:
        return self.empirical <= self.bound + SLACK_SIGMAS * self.mc_sigma

    def row(self) -> dict:
        return {
            "check": self.check, "case": self.label, "empirical": self.empirical, "bound": self.bound,
            "mc_sigma": self.mc_sigma, "replications": self.replications,
            "extrapolated": self.extrapolated, "pass": self.passed,
        }


def _seq(seed: int, name: str) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(zlib.crc32(name.encode()),))


def _conditional_means(spec: TailCheckSpec) -> np.ndarray:
    t = np.arange(spec.n)
    if spec.generator == "iid":
        return np.full(spec.n, spec.mu)
    if spec.generator == "alternating":
        return spec.mu + spec.C * np.where(t % 2 == 0, 1.0, -1.0)
    if spec.generator == "drift_up":
        return np.full(spec.n, spec.mu + spec.C)
    return np.full(spec.n, spec.mu - spec.C)


def simulate_sums(spec: TailCheckSpec) -> np.ndarray:
    """``replications`` draws of S_n under the configured generator (reproducible).

    Variables take values in {0, b}. For ``markov`` the sequence is the
    symmetric two-state chain with switch probability 1/2 - C/b started from
    its uniform stationary law, so conditional means are exactly mu +- C.
    """
    chunks = -(-spec.replications // CHUNK)
    seqs = _seq(spec.seed, "tail-sums").spawn(chunks)
    out = np.empty(spec.replications)
    for c, ss in enumerate(seqs):
        rng = np.random.Generator(np.random.PCG64(ss))
        lo = c * CHUNK
        reps = min(CHUNK, spec.replications - lo)
        if spec.generator == "markov":
            switch = 0.5 - spec.C / spec.b
            x = rng.random(reps) < 0.5
            total = x.astype(float)
            for _ in range(1, spec.n):
                x = np.where(rng.random(reps) < switch, ~x, x)
                total += x
        else:
            p = _conditional_means(spec) / spec.b
            total = (rng.random((reps, spec.n)) < p).sum(axis=1).astype(float)
        out[lo:lo + reps] = spec.b * total
    return out


def _frequency(hits: np.ndarray) -> tuple:
    p = float(hits.mean())
    return p, math.sqrt(p * (1 - p) / hits.size)


def check_chernoff(spec: TailCheckSpec) -> list:
    """Both tails of S_n around n*mu against exp(-2 (a/b)^2 / n). Needs C = 0."""
    if spec.C != 0:
        raise ValueError("check_chernoff needs C = 0; use check_drifted_chernoff")
    s = simulate_sums(spec)
    bound = math.exp(-2 * (spec.a / spec.b) ** 2 / spec.n)
    label = f"{spec.generator} n={spec.n} a={spec.a:g}"
    up, up_sd = _frequency(s >= spec.n * spec.mu + spec.a)
    dn, dn_sd = _frequency(s <= spec.n * spec.mu - spec.a)
    return [
        CheckReport("chernoff-upper", label, up, bound, up_sd, spec.replications),
        CheckReport("chernoff-lower", label, dn, bound, dn_sd, spec.replications),
    ]


def drifted_bounds(spec: TailCheckSpec) -> tuple:
    """(upper-tail bound, lower-tail bound) for drift C."""
    mu, C, a, b, n = spec.mu, spec.C, spec.a, spec.b, spec.n
    upper = math.exp(-2 * (a * (mu - C) / (b * (mu + C))) ** 2 / n)
    lower = math.exp(-2 * (a / b) ** 2 / n)
    return upper, lower


def check_drifted_chernoff(spec: TailCheckSpec) -> list:
    """Upper tail above n(mu + C) + a and lower tail below n(mu - C) - a."""
    s = simulate_sums(spec)
    ub, lb = drifted_bounds(spec)
    label = f"{spec.generator} n={spec.n} a={spec.a:g} C={spec.C:g}"
    up, up_sd = _frequency(s >= spec.n * (spec.mu + spec.C) + spec.a)
    dn, dn_sd = _frequency(s <= spec.n * (spec.mu - spec.C) - spec.a)
    return [
        CheckReport("drifted-upper", label, up, ub, up_sd, spec.replications),
        CheckReport("drifted-lower", label, dn, lb, dn_sd, spec.replications),
    ]


def deviation_sums(chain: RewardedMarkovChain, horizons: Sequence[int], replications: int,
                   seed: int, initial="stationary") -> np.ndarray:
    """Per replication and horizon T: sum_{t=1..T} s(t) - mu T (s(t): occupied reward)."""
    horizons = np.array(sorted(set(int(h) for h in horizons)), dtype=np.int64)
    prof = stationary_distribution(chain)
    name = f"markov-deviation/{chain.name}/{initial}"
    chunks = -(-replications // CHUNK)
    seqs = _seq(seed, name).spawn(chunks)
    out = np.empty((replications, horizons.size))
    cum = chain.active_cumulative
    for c, ss in enumerate(seqs):
        lo = c * CHUNK
        reps = min(CHUNK, replications - lo)
        rng = np.random.Generator(np.random.PCG64(ss))
        if initial == "stationary":
            starts = np.minimum(np.searchsorted(np.cumsum(prof.pi), rng.random(reps), side="right"),
                                chain.state_count - 1)
        else:
            starts = np.full(reps, int(initial))
        block = np.empty((reps, horizons.size))
        states = starts.astype(np.int64)
        totals = chain.rewards[states].astype(float)
        h = 0
        if horizons[0] == 1:
            block[:, 0] = totals
            h = 1
        t = 1
        while t < horizons[-1]:
            width = min(SLAB, int(horizons[-1]) - t)
            h = markov_advance(cum, chain.rewards, states, totals, rng.random((reps, width)), t, horizons, h, block)
            t += width
        out[lo:lo + reps] = block - prof.mu * horizons[None, :]
    return out


def check_markov_deviation(chain: RewardedMarkovChain, horizons: Sequence[int],
                           replications: int = 100_000, seed: int = 0) -> list:
    """Expected cumulative deviation from mu T against (min pi)^-1 * sum of rewards.

    Runs a stationary start and the worst single-state start (the highest
    reward state). The mirrored lower deviation mu T - E[sum] is also checked,
    from stationary and from the lowest-reward state, and flagged extrapolated.
    """
    validate_chain(chain)
    prof = stationary_distribution(chain)
    bound = prof.reward_sum / prof.min_pi
    horizons = sorted(set(int(h) for h in horizons))
    hi = int(np.argmax(chain.rewards))
    lo = int(np.argmin(chain.rewards))
    runs = {"stationary": deviation_sums(chain, horizons, replications, seed, "stationary")}
    runs[hi] = runs["stationary"] if chain.state_count == 1 else deviation_sums(chain, horizons, replications, seed, hi)
    runs[lo] = runs[hi] if lo == hi else deviation_sums(chain, horizons, replications, seed, lo)
    reports = []
    cases = [("stationary", 1, False), (hi, 1, False), ("stationary", -1, True), (lo, -1, True)]
    for init, sign, extrapolated in cases:
        dev = sign * runs[init]
        means = dev.mean(axis=0)
        sds = dev.std(axis=0, ddof=1) / math.sqrt(replications) if replications > 1 else np.zeros(len(horizons))
        start = "stationary" if init == "stationary" else f"state {init}"
        check = "markov-deviation" + ("-mirrored" if extrapolated else "")
        for T, m, sd in zip(horizons, means, sds):
            reports.append(CheckReport(check, f"{chain.name or 'chain'} start={start} T={T}",
                                       float(m), bound, float(sd), replications, extrapolated))
    return reports


def default_suite(chains: Sequence[RewardedMarkovChain], seed: int = 0, replications: int = 100_000,
                  horizons=(10, 100, 1000, 10_000)) -> list:
    """The full validation run used by the CLI and the acceptance tests."""
    reports = []
    base = TailCheckSpec(n=100, b=1.0, C=0.0, mu=0.5, a=20, replications=replications, seed=seed)
    reports += check_chernoff(base)
    reports += check_chernoff(replace(base, a=0))
    reports += check_chernoff(replace(base, n=200, a=30, generator="markov"))
    for C in (0.0, 0.05, 0.2):
        spec = TailCheckSpec(n=200, b=1.0, C=C, mu=0.5, a=30, replications=replications, seed=seed)
        for gen in ("alternating", "drift_up", "drift_down", "markov"):
            reports += check_drifted_chernoff(replace(spec, generator=gen))
    for chain in chains:
        reports += check_markov_deviation(chain, horizons, replications, seed)
    return reports
