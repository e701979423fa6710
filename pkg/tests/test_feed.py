import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lobmm.errors import InvalidParams, OrderingError, ParseError
from lobmm.feed import (EventKind, SyntheticParams, format_day, generate_synthetic_day,
                        generate_synthetic_days, load_day, parse_events, replay, write_day)
from lobmm.lob import Side, apply_depth_snapshot, match_market_order

THREE = """#tick=0.25 #lot=1 #symbol=FIG #date=2010-03-01
1000,D,bid,100.00,35,99.75,3,99.50,11
1000,D,ask,100.50,13,101.00,12
1005,T,buy,100.50,4
"""


def test_load_three_events(tmp_path):
    p = tmp_path / "day.csv"
    p.write_text(THREE)
    day = load_day(p)
    assert len(day.events) == 3
    assert day.date == dt.date(2010, 3, 1) and day.instrument.symbol == "FIG"
    t = day.events[2]
    assert (t.kind, t.side, t.price, t.volume) == (EventKind.TRADE, Side.BID, 402, 4)


def test_decreasing_timestamps():
    with pytest.raises(OrderingError):
        parse_events(THREE.replace("1005,T", "999,T").splitlines())


def test_empty_file(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("")
    with pytest.raises(ParseError, match="snapshot"):
        load_day(p)


@pytest.mark.parametrize("bad,line", [
    ("1005,T,buy,100.50,0", 4),
    ("1005,T,buy,100.10,4", 4),  # off grid
    ("1005,X,buy,100.50,4", 4),
    ("1005,T,up,100.50,4", 4),
])
def test_parse_errors_carry_line_numbers(bad, line):
    text = THREE.replace("1005,T,buy,100.50,4", bad)
    with pytest.raises(ParseError) as err:
        parse_events(text.splitlines())
    assert err.value.line == line


def test_trade_before_snapshot():
    text = "#tick=0.25\n1000,D,bid,100.00,35\n1001,T,sell,100.00,5\n1002,D,ask,100.50,3\n"
    with pytest.raises(ParseError):
        parse_events(text.splitlines())


def test_crossed_snapshot_rejected():
    text = "#tick=0.25\n1000,D,bid,100.00,35\n1001,D,ask,99.75,3\n"
    with pytest.raises(ParseError):
        parse_events(text.splitlines())


def test_round_trip(tmp_path):
    day = generate_synthetic_day(5, SyntheticParams(n_events=300))
    p = tmp_path / "syn.csv"
    write_day(day, p)
    back = load_day(p)
    assert back.events == day.events and back.instrument == day.instrument and back.date == day.date
    assert format_day(back) == format_day(day)


def test_replay_order_and_determinism():
    day = parse_events(THREE.splitlines())
    seen = []
    replay(day, seen.append)
    assert seen == day.events
    again = []
    replay(day, again.append)
    assert again == seen


def test_replay_single_snapshot_day():
    text = "#tick=1\n5,D,bid,10,1\n5,D,ask,11,1\n"
    day = parse_events(text.splitlines())
    calls = []
    replay(day, calls.append)
    assert len(calls) == 2


def test_synthetic_is_deterministic():
    p = SyntheticParams(n_events=500)
    assert format_day(generate_synthetic_day(9, p)) == format_day(generate_synthetic_day(9, p))
    assert format_day(generate_synthetic_day(9, p)) != format_day(generate_synthetic_day(10, p))


def test_no_market_orders_no_trades():
    day = generate_synthetic_day(1, SyntheticParams(n_events=500, market_rate=0.0))
    assert all(ev.kind is EventKind.DEPTH for ev in day.events)


@pytest.mark.parametrize("kw", [dict(limit_rate=-1), dict(market_rate=-0.1), dict(n_events=0),
                                dict(drift=1.5), dict(limit_rate=0)])
def test_invalid_params(kw):
    with pytest.raises(InvalidParams):
        generate_synthetic_day(0, SyntheticParams(**kw))


def replay_book(day):
    book = day.new_book()
    mids = []
    for ev in day.events:
        if ev.kind is EventKind.DEPTH:
            apply_depth_snapshot(book, ev.side, ev.levels)
        assert not book.is_crossed()
        if book.bids and book.asks:
            mids.append(book.mid2())
    return mids


def test_long_synthetic_stream_moves_and_never_crosses():
    day = generate_synthetic_day(42, SyntheticParams(n_events=100_000))
    mids = np.array(replay_book(day))
    assert len(day.events) >= 100_000
    assert np.abs(np.diff(mids)).mean() > 0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-1, 1))
def test_generated_days_never_cross(seed, drift):
    day = generate_synthetic_day(seed, SyntheticParams(n_events=300, drift=drift))
    replay_book(day)
    ts = [ev.timestamp for ev in day.events]
    assert ts == sorted(ts)


def test_trades_are_consistent_with_visible_depth():
    day = generate_synthetic_day(3, SyntheticParams(n_events=2000))
    book = day.new_book()
    for ev in day.events:
        if ev.kind is EventKind.DEPTH:
            apply_depth_snapshot(book, ev.side, ev.levels)
        else:
            resting = book.levels(ev.side.opposite)
            assert any(lv.price == ev.price and lv.volume >= ev.volume for lv in resting)


def test_multi_day_runs_are_chronological_with_random_trend_sign():
    p = SyntheticParams(n_events=2000, drift=0.5)
    days = generate_synthetic_days(11, 12, p, random_drift_sign=True)
    dates = [d.date for d in days]
    assert dates == sorted(dates) and len(set(dates)) == 12
    assert all(d.weekday() < 5 for d in dates)
    moves = [np.sign(m[-1] - m[0]) for m in map(replay_book, days)]
    assert 1 in moves and -1 in moves
