"""Simulated exchange: the agent's resting orders on top of a replayed book.

The replayed market is never modified by the agent. Agent orders carry an
estimate of the public volume queued ahead of and behind them at their price
level; public trades consume that queue FIFO, and depth decreases that trades
do not explain are treated as cancellations spread uniformly over the queue.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DuplicateSide, UnknownOrder
from .lob import Fill, OrderBook, PriceLevel, Side, apply_depth_snapshot, match_market_order


@dataclass
class AgentOrder:
    id: int
    side: Side
    price: int
    volume_remaining: int
    volume_ahead: float
    volume_behind: float = 0.0

    def exposed_to(self, trade_price: int) -> int:
        """0 if a trade at ``trade_price`` hits this level, 1 if it trades through, -1 if it misses."""
        if trade_price == self.price:
            return 0
        through = trade_price < self.price if self.side is Side.BID else trade_price > self.price
        return 1 if through else -1


class Exchange:
    """Book plus at most one live agent order per side.

    ``cancellation`` selects how unexplained depth decreases are split between
    the volume ahead and behind an agent order: ``"expected"`` applies the
    expected value of the uniform model (fractional volumes), ``"sample"`` draws
    the split from a hypergeometric distribution using ``rng``.
    """

    def __init__(self, book: OrderBook, lot: int = 1, cancellation: str = "expected",
                 rng: np.random.Generator | None = None):
        if cancellation not in ("expected", "sample"):
            raise ValueError("cancellation must be 'expected' or 'sample'")
        self.book = book
        self.lot = lot
        self.cancellation = cancellation
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.orders: dict[int, AgentOrder] = {}
        self.pending_fills: list[Fill] = []
        self._ids = itertools.count(1)
        # queue volume removed by trades since the last snapshot, per (side, price)
        self._absorbed: dict[tuple[Side, int], float] = {}

    # ------------------------------------------------------------ queries
    def order(self, side: Side) -> AgentOrder | None:
        for o in self.orders.values():
            if o.side is side:
                return o
        return None

    @property
    def live_orders(self) -> list[AgentOrder]:
        return list(self.orders.values())

    def drain_fills(self) -> list[Fill]:
        out, self.pending_fills = self.pending_fills, []
        return out

    # ------------------------------------------------------------ agent actions
    def place_limit(self, side: Side, price: int, volume: int, timestamp: int = 0) -> int:
        if volume <= 0 or volume % self.lot:
            raise ValueError(f"volume {volume} is not a positive multiple of lot {self.lot}")
        if self.order(side) is not None:
            raise DuplicateSide(f"agent already has a live {side.value} order")
        oid = next(self._ids)
        remaining = volume
        opp = self.book.best(side.opposite)
        crosses = opp is not None and (price >= opp.price if side is Side.BID else price <= opp.price)
        if crosses:
            # marketable part executes against a scratch copy: the agent never moves the market
            scratch = self.book.copy()
            fills, _ = match_market_order(scratch, side, volume, timestamp)
            for f in fills:
                worse = f.price > price if side is Side.BID else f.price < price
                if worse:
                    break
                self.pending_fills.append(f)
                remaining -= f.volume
            if remaining == 0:
                return oid
            ahead = 0.0
        else:
            ahead = float(self.book.volume_at(side, price))
        self.orders[oid] = AgentOrder(oid, side, price, remaining, ahead, 0.0)
        return oid

    def cancel(self, oid: int):
        if oid not in self.orders:
            raise UnknownOrder(f"no live order {oid}")
        del self.orders[oid]

    def cancel_all(self):
        self.orders.clear()

    def market_order(self, side: Side, volume: int, timestamp: int = 0) -> tuple[list[Fill], int]:
        """Agent market order walked against a copy of the book; fills become pending."""
        fills, unfilled = match_market_order(self.book.copy(), side, volume, timestamp)
        self.pending_fills.extend(fills)
        return fills, unfilled

    # ------------------------------------------------------------ market events
    def on_public_trade(self, aggressor: Side, price: int, volume: int, timestamp: int = 0) -> list[Fill]:
        """Advance the queue of any agent order exposed to a public trade.

        The trade removes public volume ahead of the agent first; whatever is
        left fills the agent. Public volume behind the agent shrinks by the same
        leftover, since in the recorded market that volume really traded.
        """
        o = self.order(aggressor.opposite)
        if o is None:
            return []
        where = o.exposed_to(price)
        if where < 0:
            return []
        if where == 0:
            from_ahead = min(o.volume_ahead, volume)
            o.volume_ahead -= from_ahead
            rest = volume - from_ahead
            from_behind = min(o.volume_behind, rest)
            o.volume_behind -= from_behind
            key = (o.side, price)
            self._absorbed[key] = self._absorbed.get(key, 0.0) + from_ahead + from_behind
        else:
            # the aggressor walked through our level, so the whole public queue there is gone
            o.volume_ahead = 0.0
            o.volume_behind = 0.0
            rest = volume
        qty = int(min(o.volume_remaining, rest))
        if qty <= 0:
            return []
        return [self._fill(o, qty, timestamp)]

    def on_depth_delta(self, side: Side, price: int, delta: float, concurrent_trade_volume: float = 0.0):
        """Apply a depth change at the agent's level.

        ``concurrent_trade_volume`` is the queue volume already removed by
        trades since the previous snapshot; only the decrease it does not
        explain counts as cancellation.
        """
        o = self.order(side)
        if o is None or o.price != price:
            return
        net = delta + concurrent_trade_volume
        if net > 0:
            o.volume_behind += net
            return
        c = -net
        if c <= 0:
            return
        total = o.volume_ahead + o.volume_behind
        if c >= total:
            o.volume_ahead = 0.0
            o.volume_behind = 0.0
            return
        if self.cancellation == "sample":
            ahead_i, behind_i = int(round(o.volume_ahead)), int(round(o.volume_behind))
            n = min(int(round(c)), ahead_i + behind_i)
            k = int(self.rng.hypergeometric(ahead_i, behind_i, n)) if n > 0 else 0
            o.volume_ahead = float(ahead_i - k)
            o.volume_behind = float(behind_i - (n - k))
        else:
            o.volume_ahead -= c * (o.volume_ahead / total)
            o.volume_behind -= c * (o.volume_behind / total)
            o.volume_ahead = max(o.volume_ahead, 0.0)
            o.volume_behind = max(o.volume_behind, 0.0)

    def on_snapshot(self, side: Side, levels, timestamp: int = 0) -> dict:
        """Replace one book side, reconcile the agent queue there and fill crossed agent orders."""
        delta = apply_depth_snapshot(self.book, side, levels)
        o = self.order(side)
        if o is not None and self.book.covers(side, o.price):
            absorbed = self._absorbed.get((side, o.price), 0.0)
            self.on_depth_delta(side, o.price, delta.get(o.price, 0), absorbed)
        self._absorbed = {k: v for k, v in self._absorbed.items() if k[0] is not side}
        # resting agent order on the other side now crossed by this side's quotes
        other = self.order(side.opposite)
        if other is not None:
            avail = 0
            for lv in self.book.levels(side):
                crossing = lv.price <= other.price if side is Side.ASK else lv.price >= other.price
                if not crossing:
                    break
                avail += lv.volume
            qty = min(other.volume_remaining, avail)
            if qty > 0:
                other.volume_ahead = 0.0
                self._fill(other, qty, timestamp)
        return delta

    def _fill(self, o: AgentOrder, qty: int, timestamp: int) -> Fill:
        f = Fill(o.price, qty, o.side, timestamp)
        self.pending_fills.append(f)
        o.volume_remaining -= qty
        if o.volume_remaining == 0:
            del self.orders[o.id]
        return f
