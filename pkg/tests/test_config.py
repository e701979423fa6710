import pytest

from lobmm.config import ExperimentConfig, normalise_key
from lobmm.errors import ConfigError
from lobmm.learn import AlgoKind
from lobmm.reward import RewardKind


@pytest.mark.parametrize("raw,key", [
    ("Discount factor (γ)", "gamma"),
    ("Trace parameter (λ)", "trace_lambda"),
    ("Learning rate (α)", "alpha"),
    ("Step-size [R-learning] (β)", "beta"),
    ("Exploration rate (ε)", "epsilon"),
    ("ε_Floor", "epsilon_floor"),
    ("ε_T", "epsilon_t"),
    ("Number of tilings (M)", "num_tilings"),
    ("Weights for linear combination of tile codings [agent, market, full] (λ_i)", "lctc_weights"),
    ("Memory size", "memory_size"),
    ("Min inventory (min Y)", "min_inventory"),
    ("Max inventory (max Y)", "max_inventory"),
    ("Order size (ω)", "order_size"),
    ("Training episodes", "episodes"),
    ("gamma", "gamma"),
])
def test_key_normalisation(raw, key):
    assert normalise_key(raw) == key


def test_parse_defaults_and_overrides():
    cfg = ExperimentConfig.parse("""
        # comment
        gamma=0.9
        trace_lambda = 0.5
        lctc_weights=0.5,0.25,0.25
        Memory size = 1e5
        algo = q-learning
        reward = symmetric
        """)
    assert cfg.gamma == 0.9 and cfg.trace_lambda == 0.5
    assert cfg.lctc_weights == (0.5, 0.25, 0.25)
    assert cfg.memory_size == 100_000
    assert cfg.algo_spec().kind is AlgoKind.Q_LEARNING
    assert cfg.reward_spec().kind is RewardKind.SYMMETRIC
    assert cfg.episodes == 1000 and cfg.eta == 0.6


def test_dumps_round_trip():
    cfg = ExperimentConfig(eta=0.35, syn_drift_random_sign=False, seed=12)
    assert ExperimentConfig.parse(cfg.dumps()) == cfg


@pytest.mark.parametrize("text", [
    "no_such_key=1",
    "gamma=1.5",
    "lctc_weights=0.5,0.5,0.5",
    "min_inventory=5",
    "cancellation=random",
    "alpha=abc",
    "just a line",
    "algo=policy_gradient",
])
def test_rejects_bad_config(text):
    with pytest.raises(ConfigError):
        ExperimentConfig.parse(text)
