"""Aggregated five-level limit order book.

Prices are integer tick counts throughout. The mid-price of an integer-tick
book may fall on a half tick, so the hot path works with ``mid2`` (twice the
mid in ticks, always an integer). The module-level query functions convert
to exact :class:`~decimal.Decimal` prices using the book's tick size.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from decimal import Decimal
from typing import Iterable, Sequence

from .errors import EmptySide, MalformedLevels


class Side(enum.Enum):
    BID = "bid"
    ASK = "ask"

    @property
    def opposite(self) -> "Side":
        return Side.ASK if self is Side.BID else Side.BID

    @property
    def sign(self) -> int:
        """+1 for buying (bid), -1 for selling (ask)."""
        return 1 if self is Side.BID else -1

    @classmethod
    def parse(cls, text: str) -> "Side":
        t = text.strip().lower()
        if t in ("bid", "buy", "b"):
            return cls.BID
        if t in ("ask", "sell", "s", "a"):
            return cls.ASK
        raise ValueError(f"unknown side {text!r}")


@dataclass(frozen=True)
class PriceLevel:
    price: int
    volume: int


@dataclass(frozen=True)
class Fill:
    """An execution. ``side`` is the direction of the filled order: BID bought, ASK sold."""

    price: int
    volume: int
    side: Side
    timestamp: int = 0

    def __post_init__(self):
        if self.volume <= 0:
            raise ValueError("fill volume must be positive")


DepthDelta = dict  # price (ticks) -> signed volume change


class OrderBook:
    def __init__(self, tick_size: Decimal | str | float = Decimal("0.01"), depth_limit: int = 5):
        self.tick_size = Decimal(str(tick_size))
        self.depth_limit = depth_limit
        self.bids: list[PriceLevel] = []
        self.asks: list[PriceLevel] = []

    def __repr__(self):
        fmt = lambda lv: ", ".join(f"{self.to_price(l.price)}x{l.volume}" for l in lv)
        return f"OrderBook(bids=[{fmt(self.bids)}], asks=[{fmt(self.asks)}])"

    def copy(self) -> "OrderBook":
        other = OrderBook(self.tick_size, self.depth_limit)
        other.bids = list(self.bids)
        other.asks = list(self.asks)
        return other

    def levels(self, side: Side) -> list[PriceLevel]:
        return self.bids if side is Side.BID else self.asks

    def to_price(self, ticks: int) -> Decimal:
        return ticks * self.tick_size

    def to_ticks(self, price) -> int:
        q = Decimal(str(price)) / self.tick_size
        if q != q.to_integral_value():
            raise ValueError(f"price {price} is not a multiple of tick {self.tick_size}")
        return int(q)

    def volume_at(self, side: Side, price: int) -> int:
        for lv in self.levels(side):
            if lv.price == price:
                return lv.volume
        return 0

    def covers(self, side: Side, price: int) -> bool:
        """True if ``price`` lies inside (or better than) the tracked depth on ``side``.

        Outside the tracked window the public queue at ``price`` is unknown.
        """
        lv = self.levels(side)
        if len(lv) < self.depth_limit:
            return True
        worst = lv[-1].price
        return price >= worst if side is Side.BID else price <= worst

    def total_volume(self, side: Side | None = None) -> int:
        if side is None:
            return self.total_volume(Side.BID) + self.total_volume(Side.ASK)
        return sum(lv.volume for lv in self.levels(side))

    # hot-path integer accessors
    def best(self, side: Side) -> PriceLevel | None:
        lv = self.levels(side)
        return lv[0] if lv else None

    def mid2(self) -> int:
        if not self.bids or not self.asks:
            raise EmptySide("mid-price needs both sides")
        return self.bids[0].price + self.asks[0].price

    def spread_ticks(self) -> int:
        if not self.bids or not self.asks:
            raise EmptySide("spread needs both sides")
        return self.asks[0].price - self.bids[0].price

    def is_crossed(self) -> bool:
        return bool(self.bids and self.asks and self.bids[0].price >= self.asks[0].price)


def best_bid(book: OrderBook) -> PriceLevel | None:
    return book.best(Side.BID)


def best_ask(book: OrderBook) -> PriceLevel | None:
    return book.best(Side.ASK)


def mid_price(book: OrderBook) -> Decimal:
    return book.mid2() * book.tick_size / 2


def market_spread(book: OrderBook) -> Decimal:
    return book.spread_ticks() * book.tick_size


def match_market_order(book: OrderBook, side: Side, volume: int, timestamp: int = 0) -> tuple[list[Fill], int]:
    """Walk the opposite side of ``book`` best price first.

    ``side`` is the aggressor direction (BID = buy). The book is depleted in
    place. Returns the fills and the volume left unfilled; nothing is filled
    beyond the tracked depth.
    """
    if volume <= 0:
        raise ValueError("market order volume must be positive")
    resting = book.levels(side.opposite)
    fills = []
    remaining = volume
    while remaining > 0 and resting:
        lv = resting[0]
        take = min(remaining, lv.volume)
        fills.append(Fill(lv.price, take, side, timestamp))
        remaining -= take
        if take == lv.volume:
            resting.pop(0)
        else:
            resting[0] = PriceLevel(lv.price, lv.volume - take)
    return fills, remaining


def _validate(book: OrderBook, side: Side, levels: Sequence[PriceLevel]):
    if len(levels) > book.depth_limit:
        raise MalformedLevels(f"{len(levels)} levels exceeds depth limit {book.depth_limit}")
    for lv in levels:
        if lv.volume <= 0:
            raise MalformedLevels(f"non-positive volume {lv.volume} at {lv.price}")
        if lv.price <= 0:
            raise MalformedLevels(f"non-positive price {lv.price}")
    prices = [lv.price for lv in levels]
    for a, b in zip(prices, prices[1:]):
        if (side is Side.BID and a <= b) or (side is Side.ASK and a >= b):
            raise MalformedLevels(f"{side.value} levels not strictly sorted: {prices}")
    other = book.levels(side.opposite)
    if levels and other:
        top, opp = levels[0].price, other[0].price
        if (side is Side.BID and top >= opp) or (side is Side.ASK and top <= opp):
            raise MalformedLevels(f"{side.value} snapshot crosses the book ({top} vs {opp})")


def apply_depth_snapshot(book: OrderBook, side: Side, levels: Iterable[PriceLevel]) -> DepthDelta:
    """Replace one side of ``book`` and return the per-price volume changes."""
    levels = list(levels)
    _validate(book, side, levels)
    old = {lv.price: lv.volume for lv in book.levels(side)}
    new = {lv.price: lv.volume for lv in levels}
    delta = {p: new.get(p, 0) - old.get(p, 0) for p in old.keys() | new.keys()}
    if side is Side.BID:
        book.bids = levels
    else:
        book.asks = levels
    return delta
