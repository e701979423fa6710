"""
Reading and walking a limit order book
======================================

Build a small book, read the touch, and send market orders through it.
"""

from decimal import Decimal

from lobmm.lob import (OrderBook, PriceLevel, Side, best_ask, best_bid, market_spread,
                       match_market_order, mid_price)

# prices are integer ticks; with a 0.25 tick, 400 ticks is 100.00
book = OrderBook(tick_size=Decimal("0.25"))
book.bids = [PriceLevel(400, 35), PriceLevel(399, 3), PriceLevel(398, 11)]
book.asks = [PriceLevel(402, 13), PriceLevel(404, 12)]
print(book)

print("best bid", book.to_price(best_bid(book).price), "x", best_bid(book).volume)
print("best ask", book.to_price(best_ask(book).price), "x", best_ask(book).volume)
print("mid", mid_price(book), "spread", market_spread(book))

# a buy of 20 takes the whole 100.50 level and spills into 101.00
fills, unfilled = match_market_order(book.copy(), Side.BID, 20)
for f in fills:
    print(f"  bought {f.volume} @ {book.to_price(f.price)}")

# a sell bigger than the visible bids is only partly filled
fills, unfilled = match_market_order(book, Side.ASK, 60)
print("sold", sum(f.volume for f in fills), "unfilled", unfilled)
print(book)
