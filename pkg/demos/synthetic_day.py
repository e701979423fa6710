"""
Synthetic market days
=====================

Generate a trending day of zero-intelligence order flow, write it in the
event CSV format, read it back and replay it.
"""

import os
import tempfile

import numpy as np

from lobmm.feed import EventKind, SyntheticParams, generate_synthetic_day, load_day, write_day
from lobmm.lob import apply_depth_snapshot

params = SyntheticParams(n_events=5000, drift=0.3)
day = generate_synthetic_day(seed=42, params=params)
n_trades = sum(ev.kind is EventKind.TRADE for ev in day.events)
print(day.date, len(day.events), "events,", n_trades, "trades")

path = os.path.join(tempfile.mkdtemp(), "SYN.csv")
write_day(day, path)
with open(path) as fh:
    print("".join(fh.readlines()[:4]))
assert load_day(path).events == day.events

# replay the depth stream and look at the mid and the spread
book = day.new_book()
mids, spreads = [], []
for ev in day.events:
    if ev.kind is EventKind.DEPTH:
        apply_depth_snapshot(book, ev.side, ev.levels)
    if book.bids and book.asks:
        mids.append(book.mid2() / 2)
        spreads.append(book.spread_ticks())
mids = np.array(mids)
print(f"mid moved {mids[-1] - mids[0]:+.1f} ticks, mean spread {np.mean(spreads):.2f} ticks")
values, counts = np.unique(spreads, return_counts=True)
print("spread histogram (ticks: count)", {int(v): int(c) for v, c in zip(values, counts)})
