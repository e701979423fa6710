import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lobmm.errors import DuplicateSide, UnknownOrder
from lobmm.exchange import Exchange
from lobmm.lob import OrderBook, PriceLevel, Side

from conftest import make_book, ticks
from queue_oracle import QueueOracle, random_scenario


@pytest.fixture
def ex(fig1_book):
    return Exchange(fig1_book)


def test_join_back_of_queue(ex):
    oid = ex.place_limit(Side.BID, ticks(99.50), 100)
    o = ex.orders[oid]
    assert (o.volume_ahead, o.volume_behind, o.volume_remaining) == (11, 0, 100)


def test_join_empty_level(ex):
    oid = ex.place_limit(Side.BID, ticks(100.25), 100)
    assert ex.orders[oid].volume_ahead == 0


def test_crossing_limit_fills_immediately(ex):
    ex.place_limit(Side.BID, ticks(100.50), 5)
    fills = ex.drain_fills()
    assert [(f.price, f.volume, f.side) for f in fills] == [(ticks(100.50), 5, Side.BID)]
    assert ex.live_orders == []
    # the replayed book is untouched
    assert ex.book.asks[0] == PriceLevel(ticks(100.50), 13)


def test_crossing_limit_remainder_rests(ex):
    oid = ex.place_limit(Side.BID, ticks(100.50), 20)
    assert sum(f.volume for f in ex.drain_fills()) == 13
    o = ex.orders[oid]
    assert (o.volume_remaining, o.volume_ahead) == (7, 0)


def test_cancel(ex):
    oid = ex.place_limit(Side.ASK, ticks(101.00), 10)
    ex.cancel(oid)
    assert ex.live_orders == []
    with pytest.raises(UnknownOrder):
        ex.cancel(oid)


def test_cancel_after_full_fill(ex):
    oid = ex.place_limit(Side.BID, ticks(99.50), 10)
    ex.on_public_trade(Side.ASK, ticks(99.50), 50)
    with pytest.raises(UnknownOrder):
        ex.cancel(oid)


def test_duplicate_side(ex):
    ex.place_limit(Side.BID, ticks(99.50), 10)
    with pytest.raises(DuplicateSide):
        ex.place_limit(Side.BID, ticks(99.75), 10)


def test_lot_multiple():
    ex = Exchange(make_book([(100, 5)], [(101, 5)]), lot=100)
    with pytest.raises(ValueError):
        ex.place_limit(Side.BID, ticks(99), 150)


def test_fifo_depletion_examples(ex):
    oid = ex.place_limit(Side.BID, ticks(99.50), 100)
    assert ex.on_public_trade(Side.ASK, ticks(99.50), 10) == []
    assert ex.orders[oid].volume_ahead == 1
    fills = ex.on_public_trade(Side.ASK, ticks(99.50), 40)
    assert ex.orders[oid].volume_ahead == 0
    assert [f.volume for f in fills] == [39]


def test_trade_elsewhere_is_ignored(ex):
    oid = ex.place_limit(Side.BID, ticks(99.50), 100)
    assert ex.on_public_trade(Side.ASK, ticks(100.00), 30) == []
    assert ex.on_public_trade(Side.BID, ticks(100.50), 30) == []
    assert ex.orders[oid].volume_ahead == 11


def test_trade_through_fills(ex):
    oid = ex.place_limit(Side.BID, ticks(99.75), 100)
    fills = ex.on_public_trade(Side.ASK, ticks(99.50), 30)
    assert [f.volume for f in fills] == [30] and fills[0].price == ticks(99.75)
    assert ex.orders[oid].volume_remaining == 70


def test_uniform_cancellation_expectation():
    ex = Exchange(make_book([(99, 600)], [(101, 5)]))
    oid = ex.place_limit(Side.BID, ticks(99), 10)
    o = ex.orders[oid]
    o.volume_behind = 400.0
    ex.on_depth_delta(Side.BID, ticks(99), -100)
    assert (o.volume_ahead, o.volume_behind) == (540, 360)


def test_cancellation_without_queue_behind():
    ex = Exchange(make_book([(99, 50)], [(101, 5)]))
    oid = ex.place_limit(Side.BID, ticks(99), 10)
    ex.on_depth_delta(Side.BID, ticks(99), -10)
    assert ex.orders[oid].volume_ahead == 40


def test_depth_increase_joins_behind():
    ex = Exchange(make_book([(99, 50)], [(101, 5)]))
    oid = ex.place_limit(Side.BID, ticks(99), 10)
    ex.on_snapshot(Side.BID, [PriceLevel(ticks(99), 100)])
    assert ex.orders[oid].volume_behind == 50


def test_snapshot_after_trade_is_not_a_cancel():
    ex = Exchange(make_book([(99, 50)], [(101, 5)]))
    oid = ex.place_limit(Side.BID, ticks(99), 10)
    ex.on_public_trade(Side.ASK, ticks(99), 20)
    ex.on_snapshot(Side.BID, [PriceLevel(ticks(99), 30)])
    assert ex.orders[oid].volume_ahead == 30


def test_snapshot_crossing_agent_order_fills():
    ex = Exchange(make_book([(99, 50)], [(101, 5)]))
    ex.place_limit(Side.BID, ticks(100), 10)
    ex.on_snapshot(Side.ASK, [PriceLevel(ticks(100), 4), PriceLevel(ticks(100.25), 9)])
    fills = ex.drain_fills()
    assert [(f.price, f.volume) for f in fills] == [(ticks(100), 4)]


def test_sampling_mode_is_seeded_and_integral():
    def run(seed):
        ex = Exchange(make_book([(99, 600)], [(101, 5)]), cancellation="sample",
                      rng=np.random.default_rng(seed))
        oid = ex.place_limit(Side.BID, ticks(99), 10)
        ex.orders[oid].volume_behind = 400.0
        ex.on_depth_delta(Side.BID, ticks(99), -100)
        o = ex.orders[oid]
        return o.volume_ahead, o.volume_behind
    a, b = run(3)
    assert run(3) == (a, b)
    assert a == int(a) and a + b == 900


def test_no_agent_orders_leave_book_alone(fig1_book):
    bare = fig1_book.copy()
    ex = Exchange(fig1_book)
    ex.on_public_trade(Side.BID, ticks(100.50), 5)
    new = [PriceLevel(ticks(100.50), 8), PriceLevel(ticks(101.00), 12)]
    ex.on_snapshot(Side.ASK, new)
    bare.asks = new
    assert (ex.book.bids, ex.book.asks) == (bare.bids, bare.asks)
    assert ex.drain_fills() == []


def run_scenario(public, agent, ops):
    """Drive the exchange and the oracle through one scenario; return both end states."""
    price = ticks(99)
    book = OrderBook(conftest_tick())
    book.asks = [PriceLevel(ticks(101), 1000)]
    book.bids = [PriceLevel(price, public)] if public else []
    ex = Exchange(book)
    oid = ex.place_limit(Side.BID, price, agent)
    oracle = QueueOracle(public, agent)
    fills_ex = 0
    for kind, v in ops:
        if kind == "trade":
            fills_ex += sum(f.volume for f in ex.on_public_trade(Side.ASK, price, v))
            oracle.trade(v)
        else:
            ex.on_snapshot(Side.BID, [PriceLevel(price, v)] if v else [])
            oracle.snapshot(v)
        o = ex.orders.get(oid)
        got = (o.volume_ahead, o.volume_behind, o.volume_remaining) if o else (None, None, 0)
        want = (oracle.ahead, oracle.behind, oracle.remaining) if oracle.remaining else (None, None, 0)
        yield got, want, fills_ex, oracle.filled


def conftest_tick():
    from conftest import TICK
    return TICK


def test_queue_matches_oracle_random_scenarios():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        for got, want, f_ex, f_or in run_scenario(*random_scenario(rng)):
            assert got == want and f_ex == f_or


@settings(max_examples=200)
@given(st.integers(0, 300), st.integers(1, 200), st.lists(st.integers(1, 150), max_size=8))
def test_fills_never_exceed_trade_volume(public, agent, trades):
    ex = Exchange(make_book([(99, public)] if public else [], [(101, 1000)]))
    ex.place_limit(Side.BID, ticks(99), agent)
    for v in trades:
        filled = sum(f.volume for f in ex.on_public_trade(Side.ASK, ticks(99), v))
        assert filled <= v
        for o in ex.live_orders:
            assert o.volume_ahead >= 0 and o.volume_behind >= 0 and o.volume_remaining > 0


@settings(max_examples=200)
@given(st.integers(1, 300), st.integers(1, 50),
       st.lists(st.tuples(st.booleans(), st.integers(0, 400)), max_size=10))
def test_queue_conservation(public, agent, ops):
    """ahead + behind tracks the public depth at the level (expected-value mode)."""
    price = ticks(99)
    ex = Exchange(make_book([(99, public)], [(101, 1000)]))
    oid = ex.place_limit(Side.BID, price, agent)
    level = public
    for is_trade, v in ops:
        o = ex.orders.get(oid)
        if o is None:
            break
        if is_trade and v:
            ex.on_public_trade(Side.ASK, price, v)
            level = max(level - v, 0)
            ex.on_snapshot(Side.BID, [PriceLevel(price, level)] if level else [])
        else:
            level = v
            ex.on_snapshot(Side.BID, [PriceLevel(price, level)] if level else [])
        if oid in ex.orders:
            o = ex.orders[oid]
            assert o.volume_ahead + o.volume_behind == pytest.approx(level, abs=1e-9)
