"""Benchmark strategies: fixed symmetric quoting, uniform random actions, and
meta-strategies that pick one fixed-spread expert per period by
multiplicative weights or follow-the-leader."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .strategy import CLEAR, N_ACTIONS


@dataclass(frozen=True)
class SpreadStrategy:
    theta: int

    def __post_init__(self):
        if self.theta not in range(1, 6):
            raise ValueError("theta must be in 1..5")

    @property
    def action_id(self) -> int:
        # the symmetric rows of the action table are ids 0..4
        return self.theta - 1


class FixedPolicy:
    """Always quote at ``theta`` scale units each side; clear with a market order at the bounds."""

    def __init__(self, theta: int, min_inv: int = -10_000, max_inv: int = 10_000):
        self.strategy = SpreadStrategy(theta)
        self.min_inv = min_inv
        self.max_inv = max_inv

    def act(self, inventory: int) -> int:
        if inventory >= self.max_inv or inventory <= self.min_inv:
            return CLEAR
        return self.strategy.action_id

    def __repr__(self):
        return f"FixedPolicy(theta={self.strategy.theta})"


def fixed_policy(theta: int, min_inv: int = -10_000, max_inv: int = 10_000) -> FixedPolicy:
    return FixedPolicy(theta, min_inv, max_inv)


class RandomPolicy:
    """Uniform over all actions. ``clear_at_bounds`` forces action 9 once a bound is hit."""

    def __init__(self, rng: np.random.Generator, min_inv: int = -10_000, max_inv: int = 10_000,
                 clear_at_bounds: bool = True):
        self.rng = rng
        self.min_inv = min_inv
        self.max_inv = max_inv
        self.clear_at_bounds = clear_at_bounds

    def act(self, inventory: int = 0) -> int:
        a = int(self.rng.integers(N_ACTIONS))
        if self.clear_at_bounds and (inventory >= self.max_inv or inventory <= self.min_inv):
            return CLEAR
        return a


def random_policy(rng: np.random.Generator, **kw) -> RandomPolicy:
    return RandomPolicy(rng, **kw)


@dataclass
class MetaLearner:
    """Chooses one expert per period.

    ``"mw"`` keeps multiplicative weights over experts, scaling each period's
    payoff by the largest absolute payoff seen so far; ``"ftl"`` follows the
    expert with the best cumulative payoff (ties go to the tighter spread).
    """

    experts: list[SpreadStrategy]
    mode: str = "mw"
    learning_rate: float = 0.1
    rng: np.random.Generator = field(default_factory=lambda: np.random.default_rng(0))
    weights: np.ndarray = None
    cumulative: np.ndarray = None
    scale: float = 0.0
    chosen: int = 0

    def __post_init__(self):
        if self.mode not in ("mw", "ftl"):
            raise ValueError("mode must be 'mw' or 'ftl'")
        # FTL ties resolve to the first index, so keep experts ordered by spread
        self.experts = sorted(self.experts, key=lambda e: e.theta)
        k = len(self.experts)
        if k == 0:
            raise ValueError("need at least one expert")
        self.weights = np.full(k, 1.0 / k)
        self._logw = np.zeros(k)
        self.cumulative = np.zeros(k)
        self.chosen = self._choose()

    def _choose(self) -> int:
        if self.mode == "ftl":
            return int(np.argmax(self.cumulative))
        return int(self.rng.choice(len(self.experts), p=self.weights))

    @property
    def expert(self) -> SpreadStrategy:
        return self.experts[self.chosen]

    def meta_step(self, payoffs) -> int:
        """Feed one period's per-expert payoffs, return the expert index for the next period."""
        p = np.asarray(payoffs, dtype=float)
        if p.shape != self.weights.shape or not np.all(np.isfinite(p)):
            raise ValueError("need one finite payoff per expert")
        self.cumulative += p
        if self.mode == "mw":
            self.scale = max(self.scale, float(np.abs(p).max()))
            if self.scale > 0:
                self._logw = self._logw + self.learning_rate * p / self.scale
                w = np.exp(self._logw - self._logw.max())
                self.weights = w / w.sum()
        else:
            best = np.flatnonzero(self.cumulative == self.cumulative.max())
            w = np.zeros_like(self.weights)
            w[best[0]] = 1.0
            self.weights = w
        self.chosen = self._choose()
        return self.chosen


def meta_step(meta: MetaLearner, payoffs) -> int:
    return meta.meta_step(payoffs)
