"""
Tracking a resting order's place in the queue
=============================================

The agent's order joins the back of its price level. Public trades at that
price eat the queue from the front, and depth drops that no trade explains
are treated as cancellations spread uniformly through the queue.
"""

from decimal import Decimal

from lobmm.exchange import Exchange
from lobmm.lob import OrderBook, PriceLevel, Side

book = OrderBook(Decimal("0.25"))
book.bids = [PriceLevel(400, 35), PriceLevel(399, 3), PriceLevel(398, 11)]
book.asks = [PriceLevel(402, 13), PriceLevel(404, 12)]
ex = Exchange(book)

oid = ex.place_limit(Side.BID, 398, 100)
o = ex.orders[oid]
print("joined behind", o.volume_ahead)

# 10 sold into 99.50: still one unit ahead of us
ex.on_public_trade(Side.ASK, 398, 10)
print("after trade of 10: ahead", o.volume_ahead)

# new orders arrive behind us, then the feed shows the level shrinking
ex.on_snapshot(Side.BID, [PriceLevel(400, 35), PriceLevel(399, 3), PriceLevel(398, 61)])
print("after arrivals: ahead", o.volume_ahead, "behind", o.volume_behind)
ex.on_snapshot(Side.BID, [PriceLevel(400, 35), PriceLevel(399, 3), PriceLevel(398, 31)])
print(f"after 30 cancelled: ahead {o.volume_ahead:.3f} behind {o.volume_behind:.3f}")

# a big sell clears the queue ahead and fills part of our order
fills = ex.on_public_trade(Side.ASK, 398, 25)
print("filled", [f.volume for f in fills], "remaining", o.volume_remaining)
