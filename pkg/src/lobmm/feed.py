"""Market event streams: CSV ingestion, synthetic generation and replay.

Event file format, one event per line::

    #tick=0.01 #lot=100 #symbol=SYN #date=2010-01-04
    1000,D,bid,100.00,500,99.99,300,...      (up to five price/volume pairs)
    1000,D,ask,100.01,400,...
    1012,T,sell,100.00,200                    (aggressor side, price, volume)

Blank lines are ignored. Header tokens may be spread over several ``#`` lines.
"""

from __future__ import annotations

import datetime as dt
import enum
import io
import os
from dataclasses import dataclass, field, replace
from decimal import Decimal, InvalidOperation
from typing import Callable, Iterator

import numpy as np

from .errors import InvalidParams, LobError, OrderingError, ParseError
from .lob import OrderBook, PriceLevel, Side, apply_depth_snapshot


class EventKind(enum.Enum):
    DEPTH = "D"
    TRADE = "T"


@dataclass(frozen=True)
class MarketEvent:
    timestamp: int
    kind: EventKind
    side: Side
    levels: tuple[PriceLevel, ...] = ()
    price: int = 0
    volume: int = 0

    @classmethod
    def depth(cls, ts: int, side: Side, levels) -> "MarketEvent":
        return cls(ts, EventKind.DEPTH, side, tuple(levels))

    @classmethod
    def trade(cls, ts: int, aggressor: Side, price: int, volume: int) -> "MarketEvent":
        if volume <= 0:
            raise ValueError("trade volume must be positive")
        return cls(ts, EventKind.TRADE, aggressor, price=price, volume=volume)


@dataclass(frozen=True)
class Instrument:
    symbol: str = "SYN"
    tick: Decimal = Decimal("0.01")
    lot: int = 100


@dataclass
class TradingDay:
    date: dt.date
    events: list[MarketEvent]
    instrument: Instrument = field(default_factory=Instrument)

    def new_book(self, depth_limit: int = 5) -> OrderBook:
        return OrderBook(self.instrument.tick, depth_limit)


# --------------------------------------------------------------------- CSV I/O


def _parse_header(line: str, meta: dict, lineno: int):
    for tok in line.replace("#", " #").split():
        if not tok.startswith("#"):
            continue
        key, sep, value = tok[1:].partition("=")
        if not sep:
            continue
        meta[key.strip().lower()] = value.strip()


def _ticks(text: str, tick: Decimal, lineno: int) -> int:
    try:
        q = Decimal(text) / tick
    except InvalidOperation:
        raise ParseError(f"bad price {text!r}", lineno) from None
    if q != q.to_integral_value():
        raise ParseError(f"price {text} is off the {tick} tick grid", lineno)
    return int(q)


def _int(text: str, lineno: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"bad integer {text!r}", lineno) from None


def parse_events(lines, source: str = "<stream>") -> TradingDay:
    meta: dict[str, str] = {}
    raw: list[tuple[int, list[str]]] = []
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            _parse_header(line, meta, lineno)
            continue
        raw.append((lineno, [f.strip() for f in line.split(",")]))

    try:
        tick = Decimal(meta.get("tick", "0.01"))
        lot = int(meta.get("lot", "1"))
    except (InvalidOperation, ValueError):
        raise ParseError(f"bad instrument metadata {meta}") from None
    if tick <= 0 or lot <= 0:
        raise ParseError("tick and lot must be positive")
    instrument = Instrument(meta.get("symbol", os.path.basename(source)), tick, lot)
    date = dt.date.fromisoformat(meta["date"]) if "date" in meta else dt.date(1970, 1, 1)

    if not raw:
        raise ParseError("no events: missing initial depth snapshot")

    events = []
    last_ts = None
    seen = set()
    book = OrderBook(tick)
    for lineno, f in raw:
        if len(f) < 3:
            raise ParseError("expected at least timestamp,kind,side", lineno)
        ts = _int(f[0], lineno)
        if last_ts is not None and ts < last_ts:
            raise OrderingError(f"line {lineno}: timestamp {ts} < previous {last_ts}")
        last_ts = ts
        kind = f[1].upper()
        try:
            side = Side.parse(f[2])
        except ValueError as e:
            raise ParseError(str(e), lineno) from None
        if kind == "D":
            body = [x for x in f[3:] if x != ""]
            if len(body) % 2:
                raise ParseError("depth line needs price,volume pairs", lineno)
            levels = tuple(
                PriceLevel(_ticks(body[i], tick, lineno), _int(body[i + 1], lineno))
                for i in range(0, len(body), 2)
            )
            ev = MarketEvent.depth(ts, side, levels)
            try:
                apply_depth_snapshot(book, side, levels)
            except LobError as e:
                raise ParseError(str(e), lineno) from None
            seen.add(side)
        elif kind == "T":
            if len(f) != 5:
                raise ParseError("trade line is timestamp,T,side,price,volume", lineno)
            if len(seen) < 2:
                raise ParseError("trade before initial depth snapshot of both sides", lineno)
            vol = _int(f[4], lineno)
            if vol <= 0:
                raise ParseError("trade volume must be positive", lineno)
            ev = MarketEvent.trade(ts, side, _ticks(f[3], tick, lineno), vol)
        else:
            raise ParseError(f"unknown event kind {f[1]!r}", lineno)
        if not events and kind != "D":
            raise ParseError("first event must be a depth snapshot", lineno)
        events.append(ev)
    if len(seen) < 2:
        raise ParseError("missing initial depth snapshot for both sides")
    return TradingDay(date, events, instrument)


def load_day(path) -> TradingDay:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_events(fh, str(path))


def format_day(day: TradingDay) -> str:
    inst = day.instrument
    tick = inst.tick
    out = io.StringIO()
    out.write(f"#tick={tick} #lot={inst.lot} #symbol={inst.symbol} #date={day.date.isoformat()}\n")
    for ev in day.events:
        if ev.kind is EventKind.DEPTH:
            body = "".join(f",{lv.price * tick},{lv.volume}" for lv in ev.levels)
            out.write(f"{ev.timestamp},D,{ev.side.value}{body}\n")
        else:
            aggr = "buy" if ev.side is Side.BID else "sell"
            out.write(f"{ev.timestamp},T,{aggr},{ev.price * tick},{ev.volume}\n")
    return out.getvalue()


def write_day(day: TradingDay, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_day(day))


def replay(day: TradingDay, observer: Callable[[MarketEvent], object]):
    for ev in day.events:
        observer(ev)


def iter_events(day: TradingDay) -> Iterator[MarketEvent]:
    return iter(day.events)


# ----------------------------------------------------------- synthetic flow


@dataclass(frozen=True)
class SyntheticParams:
    """Zero-intelligence Poisson order flow.

    Rates are relative intensities of limit arrivals, cancellations and
    market orders. ``drift`` in [-1, 1] tilts market-order direction and the
    side on which limit orders improve the touch, giving the mid a trend.
    """

    n_events: int = 2000
    limit_rate: float = 1.0
    cancel_rate: float = 0.5
    market_rate: float = 0.3
    drift: float = 0.0
    start_price: int = 10_000  # ticks
    tick: Decimal = Decimal("0.01")
    lot: int = 100
    symbol: str = "SYN"
    placement_p: float = 0.45  # geometric parameter for distance from the touch
    limit_lots: float = 6.0  # mean limit order size in lots
    market_lots: float = 8.0
    initial_lots: float = 25.0  # mean depth per level at start and on replenishment
    internal_levels: int = 10
    mean_gap_ms: float = 50.0

    def validate(self):
        rates = (self.limit_rate, self.cancel_rate, self.market_rate)
        if any(r < 0 for r in rates) or self.limit_rate <= 0 or self.cancel_rate < 0:
            raise InvalidParams("intensities must be non-negative and limit_rate positive")
        if sum(rates) <= 0:
            raise InvalidParams("total intensity must be positive")
        if self.n_events < 1:
            raise InvalidParams("n_events must be positive")
        if not -1.0 <= self.drift <= 1.0:
            raise InvalidParams("drift must lie in [-1, 1]")
        if not 0 < self.placement_p <= 1:
            raise InvalidParams("placement_p must lie in (0, 1]")
        if min(self.limit_lots, self.market_lots, self.initial_lots) < 1:
            raise InvalidParams("mean sizes must be at least one lot")
        if self.internal_levels < 5 or self.lot <= 0 or self.start_price <= 1000:
            raise InvalidParams("need >= 5 internal levels, positive lot, start price > 1000 ticks")


class _ZiBook:
    """Full-depth book used by the generator; sides are price -> volume dicts."""

    def __init__(self, p: SyntheticParams, rng: np.random.Generator):
        self.p = p
        self.rng = rng
        self.side = {Side.BID: {}, Side.ASK: {}}
        mid = p.start_price
        for k in range(p.internal_levels):
            self.side[Side.BID][mid - 1 - k] = self._lots(p.initial_lots) * p.lot
            self.side[Side.ASK][mid + 1 + k] = self._lots(p.initial_lots) * p.lot

    def _lots(self, mean: float) -> int:
        return int(self.rng.geometric(1.0 / mean))

    def prices(self, s: Side) -> list[int]:
        return sorted(self.side[s], reverse=(s is Side.BID))

    def best(self, s: Side) -> int:
        d = self.side[s]
        return max(d) if s is Side.BID else min(d)

    def snapshot(self, s: Side) -> tuple[PriceLevel, ...]:
        d = self.side[s]
        return tuple(PriceLevel(pr, d[pr]) for pr in self.prices(s)[:5])

    def replenish(self, s: Side):
        d = self.side[s]
        if not d:
            # side wiped out: restart one tick away from the opposite touch
            ref = self.best(s.opposite)
            d[ref - 1 if s is Side.BID else ref + 1] = self._lots(self.p.initial_lots) * self.p.lot
        while len(d) < self.p.internal_levels:
            worst = min(d) if s is Side.BID else max(d)
            gap = int(self.rng.integers(1, 3))
            d[worst - gap if s is Side.BID else worst + gap] = self._lots(self.p.initial_lots) * self.p.lot


def generate_synthetic_day(seed: int, params: SyntheticParams | None = None, date: dt.date | None = None) -> TradingDay:
    p = params or SyntheticParams()
    p.validate()
    rng = np.random.default_rng(seed)
    book = _ZiBook(p, rng)
    rates = np.array([p.limit_rate, p.cancel_rate, p.market_rate], dtype=float)
    probs = rates / rates.sum()
    up = 0.5 * (1.0 + p.drift)  # probability the pressure is upwards

    ts = 0
    events = [MarketEvent.depth(ts, Side.BID, book.snapshot(Side.BID)),
              MarketEvent.depth(ts, Side.ASK, book.snapshot(Side.ASK))]
    while len(events) < p.n_events:
        ts += int(rng.exponential(p.mean_gap_ms))
        kind = rng.choice(3, p=probs)
        if kind == 0:
            # upward pressure: more bids improving the touch
            s = Side.BID if rng.random() < up else Side.ASK
            d = book.side[s]
            k = int(rng.geometric(p.placement_p))  # 1 = improve by a tick, 2 = join the touch, ...
            bb, ba = book.best(Side.BID), book.best(Side.ASK)
            if s is Side.BID:
                price = min(bb + 2 - k, ba - 1)
            else:
                price = max(ba - 2 + k, bb + 1)
            d[price] = d.get(price, 0) + book._lots(p.limit_lots) * p.lot
            changed = [s]
        elif kind == 1:
            s = Side.BID if rng.random() < 0.5 else Side.ASK
            d = book.side[s]
            top = book.prices(s)[:5]
            price = top[int(rng.integers(len(top)))]
            lots = d[price] // p.lot
            gone = int(rng.integers(1, lots + 1)) * p.lot if lots > 0 else d[price]
            gone = min(gone, d[price])
            d[price] -= gone
            if d[price] == 0:
                del d[price]
            changed = [s]
        else:
            aggr = Side.BID if rng.random() < up else Side.ASK
            resting = aggr.opposite
            d = book.side[resting]
            top = book.prices(resting)[:5]
            avail = sum(d[x] for x in top)
            want = min(book._lots(p.market_lots) * p.lot, avail - p.lot)
            if want <= 0:
                continue
            for price in top:
                take = min(want, d[price])
                events.append(MarketEvent.trade(ts, aggr, price, take))
                d[price] -= take
                if d[price] == 0:
                    del d[price]
                want -= take
                if want == 0:
                    break
            changed = [resting]
        for s in changed:
            book.replenish(s)
            events.append(MarketEvent.depth(ts, s, book.snapshot(s)))
    day = date or dt.date(2010, 1, 4)
    return TradingDay(day, events, Instrument(p.symbol, p.tick, p.lot))


def business_days(start: dt.date, n: int) -> list[dt.date]:
    out = []
    d = start
    while len(out) < n:
        if d.weekday() < 5:
            out.append(d)
        d += dt.timedelta(days=1)
    return out


def generate_synthetic_days(seed: int, n_days: int, params: SyntheticParams | None = None,
                            random_drift_sign: bool = False,
                            start: dt.date = dt.date(2010, 1, 4)) -> list[TradingDay]:
    """A chronological run of synthetic days with independent per-day seeds.

    With ``random_drift_sign`` each day's trend direction is a fair coin flip,
    so a trend can only be exploited by reacting to it within the day.
    """
    p = params or SyntheticParams()
    seeds = np.random.SeedSequence(seed).spawn(n_days)
    days = []
    for date, ss in zip(business_days(start, n_days), seeds):
        day_seed = int(ss.generate_state(1)[0])
        dp = p
        if random_drift_sign and p.drift != 0.0:
            sign = 1.0 if np.random.default_rng(day_seed ^ 0x5EED).random() < 0.5 else -1.0
            dp = replace(p, drift=sign * abs(p.drift))
        days.append(generate_synthetic_day(day_seed, dp, date))
    return days
