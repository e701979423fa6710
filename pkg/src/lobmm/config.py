"""Experiment configuration: flat ``key=value`` text files.

Keys are matched after normalisation (lower case, punctuation and
parenthesised symbols dropped, spaces to underscores), so the long parameter
names such as ``Discount factor (γ) = 0.97`` or ``Trace parameter (λ)=0.96``
work as well as the short forms ``gamma`` and ``trace_lambda``.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field, fields

from .errors import ConfigError
from .feed import SyntheticParams
from .learn import AlgoKind, AlgoSpec, ExplorationSpec
from .reward import RewardKind, RewardSpec
from .strategy import InventoryBounds

ALIASES = {
    "training_episodes": "episodes",
    "training_sample_size": "train_days",
    "testing_sample_size": "test_days",
    "memory_size": "memory_size",
    "number_of_tilings": "num_tilings",
    "m": "num_tilings",
    "weights_for_linear_combination_of_tile_codings": "lctc_weights",
    "learning_rate": "alpha",
    "step_size_r_learning": "beta",
    "step_size": "beta",
    "discount_factor": "gamma",
    "trace_parameter": "trace_lambda",
    "lambda": "trace_lambda",
    "exploration_rate": "epsilon",
    "epsilon_floor": "epsilon_floor",
    "epsilon_t": "epsilon_t",
    "order_size": "order_size",
    "min_inventory": "min_inventory",
    "max_inventory": "max_inventory",
    "damping_factor": "eta",
    "reward_function": "reward",
    "algorithm": "algo",
    "state": "state_mode",
}


def normalise_key(key: str) -> str:
    k = key.strip().replace("ε", "epsilon").replace("ϵ", "epsilon")
    k = re.sub(r"\([^)]*\)|\[[^\]]*\]", " ", k)
    k = re.sub(r"[^0-9a-zA-Z]+", "_", k).strip("_").lower()
    return ALIASES.get(k, k)


@dataclass
class ExperimentConfig:
    # data
    data_dir: str = ""
    synthetic_seed: int = 7
    synthetic_days: int = 160
    syn_n_events: int = 2000
    syn_limit_rate: float = 1.0
    syn_cancel_rate: float = 0.5
    syn_market_rate: float = 0.3
    syn_drift: float = 0.0
    syn_drift_random_sign: bool = True
    train_days: int = 120
    test_days: int = 40
    # learning
    episodes: int = 1000
    algo: str = "sarsa"
    alpha: float = 0.001
    beta: float = 0.005
    gamma: float = 0.97
    trace_lambda: float = 0.96
    min_trace: float = 1e-4
    epsilon: float = 0.7
    epsilon_floor: float = 0.0001
    epsilon_t: int = 1000
    epsilon_schedule: str = "exponential"
    reward: str = "asymmetric"
    eta: float = 0.6
    reward_scale: float = 1.0
    # representation
    state_mode: str = "lctc"
    lctc_weights: tuple = (0.6, 0.1, 0.3)
    num_tilings: int = 32
    tiles_per_dim: int = 8
    memory_size: int = 10_000_000
    hash_seed: int = 0
    lookback: int = 100
    rsi_period: int = 14
    imbalance_depth: int = 1
    signed_volume_bound: float = 20_000.0
    # strategy
    order_size: int = 1000
    min_inventory: int = -10_000
    max_inventory: int = 10_000
    clear_fraction: float = 1.0
    spread_window: int = 1000
    cancellation: str = "expected"
    # benchmarks / sweep
    benchmark: str = "fixed:1"
    mw_learning_rate: float = 0.1
    sweep_etas: tuple = tuple(round(0.05 * i, 2) for i in range(21))
    rolling_window: int = 50
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self):
        try:
            self.algo_spec()
            self.exploration_spec()
            self.reward_spec()
        except ValueError as e:
            raise ConfigError(str(e)) from None
        if abs(sum(self.lctc_weights) - 1.0) > 1e-9:
            raise ConfigError("lctc_weights must sum to 1")
        if self.min_inventory >= 0 or self.max_inventory <= 0:
            raise ConfigError("inventory bounds must straddle zero")
        if self.order_size <= 0:
            raise ConfigError("order_size must be positive")
        if self.cancellation not in ("expected", "sample"):
            raise ConfigError("cancellation must be 'expected' or 'sample'")
        if self.train_days < 1 or self.test_days < 0:
            raise ConfigError("need at least one training day")

    # derived specs ------------------------------------------------------
    def algo_spec(self) -> AlgoSpec:
        return AlgoSpec(AlgoKind.parse(self.algo), self.alpha, self.gamma, self.trace_lambda, self.beta,
                        self.min_trace)

    def exploration_spec(self) -> ExplorationSpec:
        return ExplorationSpec(self.epsilon, self.epsilon_floor, self.epsilon_t, self.epsilon_schedule)

    def reward_spec(self) -> RewardSpec:
        return RewardSpec(RewardKind.parse(self.reward), self.eta)

    def bounds(self) -> InventoryBounds:
        return InventoryBounds(self.min_inventory, self.max_inventory, self.order_size, self.clear_fraction)

    def synthetic_params(self) -> SyntheticParams:
        return SyntheticParams(n_events=self.syn_n_events, limit_rate=self.syn_limit_rate,
                               cancel_rate=self.syn_cancel_rate, market_rate=self.syn_market_rate,
                               drift=self.syn_drift)

    def replace(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw)

    # text form -----------------------------------------------------------
    @classmethod
    def from_mapping(cls, raw: dict) -> "ExperimentConfig":
        kinds = {f.name: f for f in fields(cls)}
        values = {}
        for key, text in raw.items():
            name = normalise_key(key)
            if name not in kinds:
                raise ConfigError(f"unknown config key {key!r}")
            values[name] = _coerce(name, kinds[name], text)
        try:
            return cls(**values)
        except TypeError as e:
            raise ConfigError(str(e)) from None

    @classmethod
    def parse(cls, text: str) -> "ExperimentConfig":
        raw = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key=value")
            key, value = line.split("=", 1)
            raw[key] = value.strip()
        return cls.from_mapping(raw)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.parse(fh.read())

    def dumps(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"


def _coerce(name, f, text):
    text = str(text).strip()
    default = f.default if f.default is not dataclasses.MISSING else None
    try:
        if isinstance(default, bool):
            return text.lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(float(text)) if re.fullmatch(r"[-+]?\d+(\.0*)?([eE]\+?\d+)?", text) else int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, tuple):
            return tuple(float(x) for x in text.replace("(", "").replace(")", "").split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"bad value {text!r} for {name}") from None
    return text
