"""Per-step reward: execution PnL relative to the mid, inventory mark-to-market, damping.

The functions are plain arithmetic and work with ints, floats, Decimals or
Fractions. The simulator feeds them integer half-tick prices so that PnL
accounting stays exact.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from decimal import Decimal

from .lob import Fill, Side


class RewardKind(enum.Enum):
    PNL = "pnl"
    SYMMETRIC = "symmetric"
    ASYMMETRIC = "asymmetric"

    @classmethod
    def parse(cls, text: str) -> "RewardKind":
        t = text.strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {"pnl": cls.PNL, "symm": cls.SYMMETRIC, "symmetric": cls.SYMMETRIC,
                   "symmetric_damped": cls.SYMMETRIC, "asymm": cls.ASYMMETRIC,
                   "asymmetric": cls.ASYMMETRIC, "asymmetric_damped": cls.ASYMMETRIC}
        if t not in aliases:
            raise ValueError(f"unknown reward variant {text!r}")
        return aliases[t]


@dataclass(frozen=True)
class RewardSpec:
    kind: RewardKind = RewardKind.ASYMMETRIC
    eta: float = 0.6

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("damping factor must be non-negative")


@dataclass
class StepFills:
    """Agent executions since the previous decision, per side.

    Sells (ask-side fills, including clearing sells) and buys are kept apart
    together with their notional, so the volume-weighted prices are exact.
    """

    matched_ask: int = 0
    matched_bid: int = 0
    notional_ask: object = 0
    notional_bid: object = 0

    def add(self, fill: Fill, price_scale: int = 1):
        if fill.side is Side.ASK:
            self.matched_ask += fill.volume
            self.notional_ask += fill.volume * fill.price * price_scale
        else:
            self.matched_bid += fill.volume
            self.notional_bid += fill.volume * fill.price * price_scale

    @classmethod
    def single(cls, matched_ask=0, vwap_ask=0, matched_bid=0, vwap_bid=0) -> "StepFills":
        return cls(matched_ask, matched_bid, matched_ask * vwap_ask, matched_bid * vwap_bid)

    @property
    def vwap_ask(self):
        return self.notional_ask / self.matched_ask if self.matched_ask else None

    @property
    def vwap_bid(self):
        return self.notional_bid / self.matched_bid if self.matched_bid else None

    @property
    def net_volume(self) -> int:
        """Inventory change: buys minus sells."""
        return self.matched_bid - self.matched_ask


def psi(fills: StepFills, m) -> tuple:
    """Money made on the step's executions relative to the mid ``m``."""
    psi_a = fills.notional_ask - fills.matched_ask * m
    psi_b = fills.matched_bid * m - fills.notional_bid
    return psi_a, psi_b


def incremental_pnl(psi_a, psi_b, inventory, mid_move):
    return psi_a + psi_b + inventory * mid_move


def reward(spec: RewardSpec, pnl, inventory, mid_move):
    if spec.kind is RewardKind.PNL:
        return pnl
    exposure = inventory * mid_move
    eta = Decimal(str(spec.eta)) if isinstance(exposure, Decimal) else spec.eta
    speculative = eta * exposure
    if spec.kind is RewardKind.SYMMETRIC:
        return pnl - speculative
    return pnl - max(0, speculative)
