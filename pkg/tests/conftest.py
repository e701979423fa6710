from decimal import Decimal

import pytest

from lobmm.lob import OrderBook, PriceLevel

TICK = Decimal("0.25")


def ticks(price) -> int:
    return int(Decimal(str(price)) / TICK)


def make_book(bids, asks, tick=TICK) -> OrderBook:
    """Book from (price, volume) pairs given in currency units."""
    book = OrderBook(tick)
    book.bids = [PriceLevel(int(Decimal(str(p)) / tick), v) for p, v in bids]
    book.asks = [PriceLevel(int(Decimal(str(p)) / tick), v) for p, v in asks]
    return book


@pytest.fixture
def fig1_book() -> OrderBook:
    """Two asks above a one-tick gap, three bids below; quarter ticks."""
    return make_book(bids=[(100.00, 35), (99.75, 3), (99.50, 11)],
                     asks=[(100.50, 13), (101.00, 12)])


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
