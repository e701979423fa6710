"""Market-making action space, quote pricing, order sizing and inventory limits.

Action ids are a stable contract: 0-8 quote one order per side at
``theta * scale`` ticks away from the mid, 9 sends a market order that
flattens (a fraction of) the inventory.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from decimal import ROUND_CEILING, ROUND_FLOOR, ROUND_HALF_UP, Decimal
from fractions import Fraction

from .errors import ZeroInventory


@dataclass(frozen=True)
class Action:
    id: int
    theta_ask: int | None
    theta_bid: int | None

    @property
    def clears(self) -> bool:
        return self.theta_ask is None


_THETAS = [(1, 1), (2, 2), (3, 3), (4, 4), (5, 5), (1, 3), (3, 1), (2, 5), (5, 2)]
ACTIONS: tuple[Action, ...] = tuple(Action(i, a, b) for i, (a, b) in enumerate(_THETAS)) + (Action(9, None, None),)
N_ACTIONS = len(ACTIONS)
CLEAR = 9


def action(a) -> Action:
    return a if isinstance(a, Action) else ACTIONS[int(a)]


def quote_ticks(a, mid2: int, scale_ticks: int) -> tuple[int, int]:
    """Ask and bid prices in ticks for a quoting action.

    ``mid2`` is twice the mid in ticks. The ask rounds up and the bid rounds
    down onto the grid, so rounding never narrows the quote.
    """
    act = action(a)
    if act.clears:
        raise ValueError("action 9 does not quote")
    # ceil(n / 2) == -((-n) // 2)
    p_a = -((-(mid2 + 2 * act.theta_ask * scale_ticks)) // 2)
    p_b = (mid2 - 2 * act.theta_bid * scale_ticks) // 2
    return p_a, p_b


def quote_prices(a, rho, scale, tick) -> tuple[Decimal, Decimal]:
    """Price-unit version of :func:`quote_ticks`. ``scale`` must be a tick multiple."""
    act = action(a)
    if act.clears:
        raise ValueError("action 9 does not quote")
    rho, scale, tick = Decimal(str(rho)), Decimal(str(scale)), Decimal(str(tick))
    p_a = ((rho + act.theta_ask * scale) / tick).to_integral_value(ROUND_CEILING) * tick
    p_b = ((rho - act.theta_bid * scale) / tick).to_integral_value(ROUND_FLOOR) * tick
    return p_a, p_b


def spread_scale(half_spreads, window: int, tick) -> Decimal:
    """Moving average of the half-spread, rounded to the nearest tick multiple (at least one tick)."""
    hist = list(half_spreads)[-window:]
    if not hist:
        raise ValueError("empty half-spread history")
    tick = Decimal(str(tick))
    mean = sum(Decimal(str(h)) for h in hist) / len(hist)
    n = (mean / tick).to_integral_value(ROUND_HALF_UP)
    return max(int(n), 1) * tick


class SpreadScale:
    """Streaming :func:`spread_scale` over market spreads in ticks (integer arithmetic)."""

    def __init__(self, window: int = 1000):
        self.window = window
        self._hist: deque[int] = deque()
        self._sum = 0

    def push(self, spread_ticks: int):
        self._hist.append(spread_ticks)
        self._sum += spread_ticks
        if len(self._hist) > self.window:
            self._sum -= self._hist.popleft()

    def ticks(self) -> int:
        n = len(self._hist)
        if n == 0:
            raise ValueError("no spreads observed")
        # round-half-up of (sum / n) / 2
        return max((self._sum + n) // (2 * n), 1)


def clear_order_size(inventory: int, alpha: float = 1.0, lot: int = 1) -> int:
    """Signed market order size that moves inventory towards zero.

    Negative means sell. The magnitude ``alpha * |Y|`` is rounded up to a
    whole number of lots, so it is never zero.
    """
    if inventory == 0:
        raise ZeroInventory("nothing to clear")
    target = Fraction(str(alpha)) * abs(inventory)
    lots = max(math.ceil(target / lot), 1)
    return -lots * lot if inventory > 0 else lots * lot


@dataclass(frozen=True)
class InventoryBounds:
    min_inv: int = -10_000
    max_inv: int = 10_000
    order_size: int = 1000
    clear_fraction: float = 1.0


@dataclass(frozen=True)
class EffectiveOrders:
    """Orders an action turns into once inventory limits are applied."""

    bid: bool
    ask: bool
    market: int = 0  # signed clearing volume, 0 for none


def constrain(a, inventory: int, bounds: InventoryBounds, lot: int = 1) -> EffectiveOrders:
    act = action(a)
    if act.clears:
        if inventory == 0:
            return EffectiveOrders(False, False, 0)
        return EffectiveOrders(False, False, clear_order_size(inventory, bounds.clear_fraction, lot))
    return EffectiveOrders(bid=inventory < bounds.max_inv, ask=inventory > bounds.min_inv)
