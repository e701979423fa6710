"""Temporal-difference control with eligibility traces.

All algorithms share one update skeleton: compute a TD error from the
current weights, decay the traces, mark the active tiles of (s, a), move the
weights along the traces. They differ in the bootstrap target, whether
traces are cut after exploratory actions, and (for the R-learning family)
in learning an average-reward baseline instead of discounting.

Off-policy methods (Q-learning, double Q, R-learning, double R) use
Watkins-style trace cutting. "On-policy R-learning" and "double
R-learning" are not textbook algorithms; here they are the minimal
on-policy and double-estimator analogues of Schwartz's R-learning.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .features import LctcValue


class AlgoKind(enum.Enum):
    Q_LEARNING = "q_learning"
    SARSA = "sarsa"
    EXPECTED_SARSA = "expected_sarsa"
    DOUBLE_Q = "double_q"
    R_LEARNING = "r_learning"
    ON_POLICY_R = "on_policy_r"
    DOUBLE_R = "double_r"

    @classmethod
    def parse(cls, text: str) -> "AlgoKind":
        t = text.strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {"ql": "q_learning", "q": "q_learning", "qlearning": "q_learning",
                   "esarsa": "expected_sarsa", "doubleq": "double_q", "double_q_learning": "double_q",
                   "r": "r_learning", "rlearning": "r_learning", "on_policy_r_learning": "on_policy_r",
                   "onpolicyr": "on_policy_r", "double_r_learning": "double_r", "doubler": "double_r"}
        return cls(aliases.get(t, t))

    @property
    def off_policy(self) -> bool:
        return self in (AlgoKind.Q_LEARNING, AlgoKind.DOUBLE_Q, AlgoKind.R_LEARNING, AlgoKind.DOUBLE_R)

    @property
    def average_reward(self) -> bool:
        return self in (AlgoKind.R_LEARNING, AlgoKind.ON_POLICY_R, AlgoKind.DOUBLE_R)

    @property
    def double(self) -> bool:
        return self in (AlgoKind.DOUBLE_Q, AlgoKind.DOUBLE_R)


@dataclass(frozen=True)
class AlgoSpec:
    kind: AlgoKind = AlgoKind.SARSA
    alpha: float = 0.001
    gamma: float = 0.97
    trace_lambda: float = 0.96
    beta: float = 0.005
    min_trace: float = 1e-4

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")
        if not 0 <= self.gamma <= 1 or not 0 <= self.trace_lambda <= 1:
            raise ValueError("gamma and trace_lambda must lie in [0, 1]")

    @property
    def trace_decay(self) -> float:
        # average-reward methods are undiscounted
        g = 1.0 if self.kind.average_reward else self.gamma
        return g * self.trace_lambda


@dataclass(frozen=True)
class ExplorationSpec:
    epsilon: float = 0.7
    floor: float = 0.0001
    horizon: int = 1000
    schedule: str = "exponential"

    def __post_init__(self):
        if not 0 <= self.floor <= self.epsilon <= 1:
            raise ValueError("need 0 <= floor <= epsilon <= 1")
        if self.schedule not in ("exponential", "linear"):
            raise ValueError("schedule must be 'exponential' or 'linear'")


def decay_epsilon(episode: int, spec: ExplorationSpec) -> float:
    if episode < 0:
        raise ValueError("episode index must be non-negative")
    if episode >= spec.horizon or spec.epsilon == spec.floor:
        return spec.floor
    frac = episode / spec.horizon
    if spec.schedule == "linear":
        return spec.epsilon + (spec.floor - spec.epsilon) * frac
    if spec.floor == 0.0:
        return spec.epsilon * (1.0 - frac)
    return max(spec.floor, spec.epsilon * (spec.floor / spec.epsilon) ** frac)


def greedy_set(q: np.ndarray) -> np.ndarray:
    return np.flatnonzero(q == q.max())


def select_action(q_values, epsilon: float, rng: np.random.Generator) -> int:
    """Epsilon-greedy with uniformly random tie-breaking."""
    q = np.asarray(q_values, dtype=float)
    if rng.random() < epsilon:
        return int(rng.integers(q.size))
    best = greedy_set(q)
    return int(best[0]) if best.size == 1 else int(rng.choice(best))


def egreedy_probs(q: np.ndarray, epsilon: float) -> np.ndarray:
    best = greedy_set(q)
    p = np.full(q.size, epsilon / q.size)
    p[best] += (1.0 - epsilon) / best.size
    return p


class Learner:
    """TD control agent over one (or, for double methods, two) LCTC value functions.

    ``make_value`` builds a fresh value function; double methods call it
    twice. ``table_chooser`` overrides the coin flip that picks which double
    estimator to update (returns 0 or 1).
    """

    def __init__(self, spec: AlgoSpec, make_value: Callable[[], LctcValue],
                 rng: np.random.Generator | None = None,
                 table_chooser: Callable[[], int] | None = None):
        self.spec = spec
        self.rng = rng if rng is not None else np.random.default_rng(0)
        n = 2 if spec.kind.double else 1
        self.values = [make_value() for _ in range(n)]
        self.avg_reward = 0.0
        self.epsilon = 0.0
        self.table_chooser = table_chooser
        self.last_td_error = 0.0

    @property
    def value(self) -> LctcValue:
        return self.values[0]

    def encode(self, x) -> list:
        """Per-estimator tile indices for state ``x`` (estimators share a layout, so encode once)."""
        return self.values[0].encode(x)

    def q(self, enc) -> np.ndarray:
        if len(self.values) == 1:
            return self.values[0].values(enc)
        return 0.5 * (self.values[0].values(enc) + self.values[1].values(enc))

    def act(self, enc, rng: np.random.Generator | None = None) -> int:
        return select_action(self.q(enc), self.epsilon, rng or self.rng)

    def begin_episode(self):
        for v in self.values:
            v.clear_traces()

    def step_update(self, enc_s, a: int, r: float, enc_next=None, a_next: int | None = None) -> float:
        """One TD step for transition (s, a, r, s', a'). ``enc_next=None`` marks a terminal step."""
        spec = self.spec
        kind = spec.kind
        terminal = enc_next is None
        gamma = 1.0 if kind.average_reward else spec.gamma

        k = 0
        if kind.double:
            k = self.table_chooser() if self.table_chooser else int(self.rng.integers(2))
        est = self.values[k]
        q_sa = est.values(enc_s)[a]

        if terminal:
            boot = 0.0
            q_next = None
        else:
            q_next = self.q(enc_next)
            if kind is AlgoKind.SARSA or kind is AlgoKind.ON_POLICY_R:
                boot = q_next[a_next]
            elif kind is AlgoKind.EXPECTED_SARSA:
                qn = est.values(enc_next)
                boot = float(egreedy_probs(qn, self.epsilon) @ qn)
            elif kind.double:
                own = est.values(enc_next)
                a_star = int(greedy_set(own)[0])
                boot = self.values[1 - k].values(enc_next)[a_star]
            else:
                boot = est.values(enc_next).max()

        if kind.average_reward:
            delta = (r - self.avg_reward + boot) - q_sa
        else:
            delta = (r + gamma * boot) - q_sa
        delta = float(delta)

        if kind.average_reward:
            if kind is AlgoKind.ON_POLICY_R:
                self.avg_reward += spec.beta * delta
            elif a in greedy_set(self.q(enc_s)):
                self.avg_reward += spec.beta * delta

        decay = spec.trace_decay
        for v in self.values:
            v.mark(enc_s, a, decay, spec.min_trace)
        est.apply(spec.alpha * delta)

        if terminal:
            for v in self.values:
                v.clear_traces()
        elif kind.off_policy and a_next is not None and a_next not in greedy_set(q_next):
            for v in self.values:
                v.clear_traces()
        self.last_td_error = delta
        return delta

