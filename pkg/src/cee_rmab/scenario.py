"""Scenario files: arms, K, horizon, runs, seed and per-policy parameters.

The on-disk format is TOML; docs/scenario-format.md documents the schema.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from .bounds import ScenarioTruth, required_step_length
from .errors import CeeError, ScenarioError
from .markov import RewardedMarkovChain, chain_constant, gilbert_elliott, stationary_distribution, validate_chain
from .policy import StepSchedule, init_batches

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

POLICY_NAMES = ("cee", "rca", "rucb")
BUNDLED = {"S": "scenario_s.toml", "scenario-S": "scenario_s.toml"}

_POLICY_DEFAULTS = {
    "cee": {"L": 2.1, "schedule": {"kind": "constant", "B": 49}, "count_padded": True, "unsafe": False},
    "rca": {"L": 415.0},
    "rucb": {"L": 3126.0, "D": 171520.0},
}


@dataclass(frozen=True)
class PolicySpec:
    name: str
    params: dict

    def schedule(self) -> StepSchedule:
        return parse_schedule(self.params["schedule"], f"policies.{self.name}.schedule")


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    name: str
    arms: tuple
    k: int
    horizon: int
    runs: int
    seed: int
    policy: str
    policies: dict
    sample_points: tuple
    initial: tuple
    geometric_points: bool = True
    warnings: tuple = ()
    mus: tuple = field(init=False)
    c_p: float = field(init=False)
    genie_rate: float = field(init=False)

    def __post_init__(self):
        mus = tuple(stationary_distribution(c).mu for c in self.arms)
        object.__setattr__(self, "mus", mus)
        object.__setattr__(self, "c_p", chain_constant(self.arms))
        object.__setattr__(self, "genie_rate", math.fsum(sorted(mus, reverse=True)[: self.k]))

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    def policy_spec(self, name: str | None = None) -> PolicySpec:
        name = name or self.policy
        if name not in self.policies:
            raise ScenarioError(f"policy {name!r} is not configured; known: {sorted(self.policies)}")
        return self.policies[name]

    def truth(self, L: float | None = None) -> ScenarioTruth:
        cee = self.policy_spec("cee")
        return ScenarioTruth(self.mus, self.c_p, self.k, L or cee.params["L"], cee.schedule())

    def best_arms(self) -> tuple:
        order = sorted(range(self.n_arms), key=lambda a: (-self.mus[a], a))
        return tuple(sorted(order[: self.k]))

    def with_policy_params(self, name: str, **params) -> "ScenarioConfig":
        spec = self.policy_spec(name)
        policies = {**self.policies, name: PolicySpec(name, {**spec.params, **params})}
        cfg = replace(self, policies=policies)
        _check_run_shape(cfg)
        return cfg

    def with_overrides(self, horizon=None, runs=None, seed=None, policy=None, k=None) -> "ScenarioConfig":
        horizon = self.horizon if horizon is None else int(horizon)
        points = self.sample_points
        if self.geometric_points and horizon != self.horizon:
            points = geometric_points(horizon)
        points = tuple(p for p in points if p <= horizon)
        cfg = replace(self, horizon=horizon, sample_points=points,
                      runs=self.runs if runs is None else int(runs),
                      seed=self.seed if seed is None else int(seed),
                      policy=self.policy if policy is None else policy,
                      k=self.k if k is None else int(k))
        _check_run_shape(cfg)
        return cfg


def geometric_points(horizon: int) -> tuple:
    """10^2, 10^2.5, 10^3, ... below the horizon, then the horizon itself."""
    points = []
    e = 2.0
    while round(10 ** e) < horizon:
        points.append(int(round(10 ** e)))
        e += 0.5
    points.append(int(horizon))
    return tuple(points)


def parse_schedule(raw, where="schedule") -> StepSchedule:
    if isinstance(raw, int):
        return StepSchedule.constant(raw)
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ScenarioError(f"{where}: expected a table with a 'kind' key")
    kind = raw["kind"]
    try:
        if kind == "constant":
            return StepSchedule.constant(_req(raw, "B", where))
        if kind == "logarithmic":
            return StepSchedule.logarithmic(raw.get("scale", 1.0), raw.get("offset", 1))
        if kind == "custom":
            return StepSchedule.custom(_req(raw, "values", where), raw.get("divergent", False))
    except CeeError as exc:
        raise ScenarioError(f"{where}: {exc}") from exc
    raise ScenarioError(f"{where}.kind: unknown schedule kind {kind!r}")


def _req(table, key, where):
    if key not in table:
        raise ScenarioError(f"{where}.{key}: missing required field")
    return table[key]


def _parse_arm(raw, idx) -> tuple:
    where = f"arms[{idx}]"
    if not isinstance(raw, dict):
        raise ScenarioError(f"{where}: expected a table")
    name = str(raw.get("name", f"arm{idx + 1}"))
    rewards = _req(raw, "rewards", where)
    try:
        if "p01" in raw or "p10" in raw:
            chain = gilbert_elliott(float(_req(raw, "p01", where)), float(_req(raw, "p10", where)),
                                    rewards, name, raw.get("passive"))
        else:
            chain = RewardedMarkovChain(_req(raw, "active", where), rewards, raw.get("passive"), name)
        validate_chain(chain)
    except CeeError as exc:
        raise ScenarioError(f"{where} ({name}): {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{where} ({name}): malformed numbers: {exc}") from exc
    initial = raw.get("initial")
    if initial is not None and initial != "stationary":
        if not isinstance(initial, int) or not 0 <= initial < chain.state_count:
            raise ScenarioError(f"{where}.initial: must be 'stationary' or a state index")
    return chain, initial


def _check_run_shape(cfg: ScenarioConfig):
    if not 1 <= cfg.k < cfg.n_arms:
        raise ScenarioError(f"K: need 1 <= K < N = {cfg.n_arms}, got {cfg.k}")
    if cfg.runs < 1:
        raise ScenarioError("runs: must be >= 1")
    if cfg.horizon < 1:
        raise ScenarioError("horizon: must be >= 1")
    if list(cfg.sample_points) != sorted(set(cfg.sample_points)) or any(p < 1 for p in cfg.sample_points):
        raise ScenarioError("sample_points: must be strictly increasing positive slot counts")
    if cfg.sample_points and cfg.sample_points[-1] > cfg.horizon:
        raise ScenarioError("sample_points: must not exceed the horizon")
    if cfg.policy not in cfg.policies:
        raise ScenarioError(f"policy: {cfg.policy!r} has no parameters in [policies]")
    if "cee" in cfg.policies:
        sched = cfg.policies["cee"].schedule()
        init = sum(sched(i) for i in range(1, len(init_batches(cfg.n_arms, cfg.k)) + 1))
        if cfg.horizon < init:
            raise ScenarioError(f"horizon: {cfg.horizon} is shorter than the CEE initialization ({init} slots)")


def scenario_from_dict(data: dict, source: str = "<dict>") -> ScenarioConfig:
    arms_raw = data.get("arms")
    if not isinstance(arms_raw, list) or len(arms_raw) < 2:
        raise ScenarioError("arms: need a list of at least two [[arms]] tables")
    parsed = [_parse_arm(a, i) for i, a in enumerate(arms_raw)]
    arms = tuple(c for c, _ in parsed)
    default_init = data.get("initial", "stationary")
    initial = tuple(init if init is not None else default_init for _, init in parsed)

    k = data.get("K", 1)
    if not isinstance(k, int) or not 1 <= k < len(arms):
        raise ScenarioError(f"K: need an integer with 1 <= K < N = {len(arms)}, got {k!r}")
    horizon = int(data.get("horizon", 1_000_000))

    policies = {}
    raw_policies = data.get("policies", {})
    unknown = set(raw_policies) - set(POLICY_NAMES)
    if unknown:
        raise ScenarioError(f"policies: unknown policy tables {sorted(unknown)}")
    for name in POLICY_NAMES:
        params = {**_POLICY_DEFAULTS[name], **raw_policies.get(name, {})}
        policies[name] = PolicySpec(name, params)
    policy = data.get("policy", "cee")

    raw_points = data.get("sample_points", "geometric")
    if raw_points == "geometric":
        points, geometric = geometric_points(horizon), True
    elif isinstance(raw_points, list):
        points, geometric = tuple(int(p) for p in raw_points), False
    else:
        raise ScenarioError("sample_points: expected 'geometric' or a list of slot counts")

    cfg = ScenarioConfig(
        name=str(data.get("name", Path(source).stem)), arms=arms, k=k, horizon=horizon,
        runs=int(data.get("runs", 20)), seed=int(data.get("seed", 0)), policy=policy,
        policies=policies, sample_points=points, initial=initial, geometric_points=geometric,
    )
    _check_run_shape(cfg)

    warnings = []
    sched = cfg.policies["cee"].schedule()
    try:
        needed = required_step_length(cfg.truth(), cfg.k)
    except CeeError as exc:
        warnings.append(f"bounds unavailable: {exc}")
    else:
        if sched.kind == "constant" and sched(1) < math.ceil(needed):
            warnings.append(
                f"constant step length B={sched(1)} is below the logarithmic-regret bound "
                f"{needed:.2f} (need B >= {math.ceil(needed)})"
            )
    return replace(cfg, warnings=tuple(warnings))


def load_scenario(path) -> ScenarioConfig:
    """Read and fully validate a scenario file. ``"S"`` names the bundled scenario S."""
    if str(path) in BUNDLED:
        text = resources.files("cee_rmab.data").joinpath(BUNDLED[str(path)]).read_text()
        source = BUNDLED[str(path)]
    else:
        p = Path(path)
        if not p.is_file():
            raise ScenarioError(f"scenario file not found: {p}")
        text, source = p.read_text(), str(p)
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"{source}: {exc}") from exc
    return scenario_from_dict(data, source)
