"""Exception hierarchy shared across the package."""


class LobError(Exception):
    """Base class for all errors raised by lobmm."""


class EmptySide(LobError):
    """A top-of-book query needed a side that has no levels."""


class MalformedLevels(LobError):
    """A depth snapshot was unsorted, had non-positive volumes or crossed the book."""


class ParseError(LobError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class OrderingError(LobError):
    """Event timestamps decreased within a stream."""


class InvalidParams(LobError):
    pass


class DuplicateSide(LobError):
    """The agent already has a live order on that side."""


class UnknownOrder(LobError):
    pass


class ZeroInventory(LobError):
    pass


class DegenerateSpread(LobError):
    pass


class ConfigError(LobError):
    pass
