"""State construction and tile-coded linear value functions.

A :class:`TileCoding` owns one weight table shared by all actions: the action
id is folded into the tile index, so each action effectively has its own
weight vector. Tilings partition the table, which guarantees exactly
``num_tilings`` distinct active tiles for every (state, action). Small grids
are indexed directly; large ones are hashed into the tiling's partition.

Eligibility traces are replacing traces kept sparse: the dense trace array
is only touched at the indices listed in ``_nz``.
"""

from __future__ import annotations

import struct
from collections import deque
from dataclasses import astuple, dataclass, fields
from typing import Sequence

import numpy as np

from .lob import OrderBook, Side

# ------------------------------------------------------------------ state


@dataclass(frozen=True)
class StateVector:
    inventory: float  # Y / max_inv
    eff_theta_a: float
    eff_theta_b: float
    spread: float  # ticks
    mid_move: float  # ticks
    book_imbalance: float
    signed_volume: float  # units
    volatility: float  # ticks
    rsi: float

    def as_array(self) -> np.ndarray:
        return np.array((self.inventory, self.eff_theta_a, self.eff_theta_b, self.spread, self.mid_move,
                         self.book_imbalance, self.signed_volume, self.volatility, self.rsi), dtype=float)


STATE_FIELDS = tuple(f.name for f in fields(StateVector))
AGENT_DIMS = (0, 1, 2)
MARKET_DIMS = (3, 4, 5, 6, 7, 8)
FULL_DIMS = AGENT_DIMS + MARKET_DIMS


@dataclass(frozen=True)
class StateBounds:
    """Clamping ranges used before tiling, one (low, high) per state field."""

    inventory: tuple = (-1.0, 1.0)
    eff_theta_a: tuple = (0.0, 6.0)
    eff_theta_b: tuple = (0.0, 6.0)
    spread: tuple = (0.0, 10.0)
    mid_move: tuple = (-3.0, 3.0)
    book_imbalance: tuple = (-1.0, 1.0)
    signed_volume: tuple = (-20_000.0, 20_000.0)
    volatility: tuple = (0.0, 2.0)
    rsi: tuple = (0.0, 100.0)

    def arrays(self, dims: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
        pairs = astuple(self)
        lo = np.array([pairs[d][0] for d in dims], dtype=float)
        hi = np.array([pairs[d][1] for d in dims], dtype=float)
        return lo, hi


def book_imbalance(book: OrderBook, depth: int = 1) -> float:
    vb = sum(lv.volume for lv in book.bids[:depth])
    va = sum(lv.volume for lv in book.asks[:depth])
    if vb + va == 0:
        return 0.0
    return (vb - va) / (vb + va)


class MarketIndicators:
    """Rolling market variables over an event window.

    Mid changes are fed in half ticks so the running sums stay exact.
    Volatility and RSI read zero until their windows have filled.
    """

    def __init__(self, window: int = 100, rsi_period: int = 14):
        self.window = window
        self.rsi_period = rsi_period
        self._dm: deque[int] = deque()
        self._s1 = 0
        self._s2 = 0
        self._sv: deque[int] = deque()
        self._sv_sum = 0
        self._pending_sv = 0
        self._rsi_n = 0
        self._gain = 0.0
        self._loss = 0.0
        self.last_move2 = 0

    def on_trade(self, aggressor: Side, volume: int):
        self._pending_sv += volume if aggressor is Side.BID else -volume

    def on_step(self, move2: int):
        """Close one event: ``move2`` is the mid change in half ticks."""
        self.last_move2 = move2
        self._dm.append(move2)
        self._s1 += move2
        self._s2 += move2 * move2
        if len(self._dm) > self.window:
            old = self._dm.popleft()
            self._s1 -= old
            self._s2 -= old * old
        self._sv.append(self._pending_sv)
        self._sv_sum += self._pending_sv
        self._pending_sv = 0
        if len(self._sv) > self.window:
            self._sv_sum -= self._sv.popleft()
        self._update_rsi(move2)

    def _update_rsi(self, move2: int):
        g = float(max(move2, 0))
        l = float(max(-move2, 0))
        p = self.rsi_period
        self._rsi_n += 1
        if self._rsi_n <= p:
            # simple average seeds Wilder's smoothing
            self._gain += g / p
            self._loss += l / p
        else:
            self._gain = (self._gain * (p - 1) + g) / p
            self._loss = (self._loss * (p - 1) + l) / p

    @property
    def signed_volume(self) -> float:
        return float(self._sv_sum)

    @property
    def volatility(self) -> float:
        n = len(self._dm)
        if n < self.window:
            return 0.0
        var = (self._s2 * n - self._s1 * self._s1) / (n * n) / 4.0
        return float(np.sqrt(max(var, 0.0)))

    @property
    def rsi(self) -> float:
        if self._rsi_n < self.rsi_period:
            return 0.0
        if self._loss == 0.0:
            return 100.0 if self._gain > 0.0 else 50.0
        return 100.0 - 100.0 / (1.0 + self._gain / self._loss)


class StateBuilder:
    """Turns the simulator's book and agent status into :class:`StateVector` values."""

    def __init__(self, max_inv: int = 10_000, window: int = 100, rsi_period: int = 14,
                 imbalance_depth: int = 1):
        self.max_inv = max_inv
        self.imbalance_depth = imbalance_depth
        self.indicators = MarketIndicators(window, rsi_period)

    def compute_state(self, book: OrderBook, inventory: int, eff_theta_a: float = 0.0,
                      eff_theta_b: float = 0.0) -> StateVector:
        ind = self.indicators
        return StateVector(
            inventory=inventory / self.max_inv,
            eff_theta_a=eff_theta_a,
            eff_theta_b=eff_theta_b,
            spread=float(book.spread_ticks()),
            mid_move=ind.last_move2 / 2.0,
            book_imbalance=book_imbalance(book, self.imbalance_depth),
            signed_volume=ind.signed_volume,
            volatility=ind.volatility,
            rsi=ind.rsi,
        )


# ------------------------------------------------------------- tile coding

_FNV_PRIME = np.uint64(0x100000001B3)
_MIX = np.uint64(0x9E3779B97F4A7C15)


class TileCoding:
    def __init__(self, low, high, tiles=8, num_tilings: int = 32, n_actions: int = 10,
                 memory_size: int = 10**7, seed: int = 0):
        self.low = np.atleast_1d(np.asarray(low, dtype=float))
        self.high = np.atleast_1d(np.asarray(high, dtype=float))
        d = self.low.size
        self.tiles = np.broadcast_to(np.asarray(tiles, dtype=np.int64), (d,)).copy()
        if np.any(self.high <= self.low) or np.any(self.tiles < 1):
            raise ValueError("need high > low and at least one tile per dimension")
        self.num_tilings = M = int(num_tilings)
        self.n_actions = int(n_actions)
        self.memory_size = int(memory_size)
        self.seed = int(seed)
        self.sub = self.memory_size // M
        if self.sub < 1:
            raise ValueError("memory_size must be at least num_tilings")

        grid = self.tiles + 1  # offset tilings spill one cell past the last tile
        self._cells = int(np.prod(grid.astype(object)))
        self.dense = self.n_actions * self._cells <= self.sub
        self._strides = np.ones(d, dtype=np.int64)
        for k in range(d - 2, -1, -1):
            self._strides[k] = self._strides[k + 1] * grid[k + 1] if self.dense else 1
        # odd-multiple displacement (1, 3, 5, ...) spreads tilings asymmetrically
        i = np.arange(M)[:, None]
        self._offsets = ((i * (2 * np.arange(d)[None, :] + 1)) % M) / M
        self._scale = self.tiles / (self.high - self.low)
        self._umax = np.nextafter(self.tiles.astype(float), 0.0)
        self._base = (np.arange(M, dtype=np.int64) * self.sub)[None, :]
        self._actions = np.arange(self.n_actions, dtype=np.int64)[:, None]
        self._actions_u = self._actions.astype(np.uint64)
        self._seed_u = np.uint64((self.seed + 1) * int(_MIX) % 2**64)

        self.w = np.zeros(self.memory_size)
        # Replacing traces as a ring of the last K marked tile sets, newest at
        # ``_head``. A row at age a carries trace decay**a; ``_valid`` clears
        # entries that a newer row re-marked, and ``_last`` is each tile's
        # newest marking step.
        self._last = np.full(self.memory_size, -1, dtype=np.int32)
        self._now = 0
        self._trace_params = None
        self._configure_ring(0.0, 1.0)

    @property
    def dims(self):
        return list(zip(self.low.tolist(), self.high.tolist(), self.tiles.tolist()))

    def coords(self, x) -> np.ndarray:
        """Integer tile coordinates of ``x`` in every tiling, shape (M, d)."""
        x = np.clip(np.asarray(x, dtype=float), self.low, self.high)
        u = np.minimum((x - self.low) * self._scale, self._umax)
        return np.floor(u[None, :] + self._offsets).astype(np.int64)

    def encode(self, x) -> np.ndarray:
        """Active tile indices for every action, shape (n_actions, M)."""
        c = self.coords(x)
        if self.dense:
            cell = c @ self._strides
            return self._base + self._actions * self._cells + cell[None, :]
        cu = c.astype(np.uint64)
        h = np.full(self.num_tilings, self._seed_u, dtype=np.uint64)
        for k in range(cu.shape[1]):
            h = (h ^ cu[:, k]) * _FNV_PRIME
        h = (h[None, :] ^ self._actions_u) * _FNV_PRIME
        h ^= h >> np.uint64(31)
        return self._base + (h % np.uint64(self.sub)).astype(np.int64)

    def active_tiles(self, x, action: int = 0) -> np.ndarray:
        return self.encode(x)[action]

    def values(self, idx: np.ndarray) -> np.ndarray:
        return self.w[idx].sum(axis=-1)

    # traces -------------------------------------------------------------
    def _configure_ring(self, decay: float, min_trace: float):
        # powers by repeated multiplication, matching a trace decayed step by step
        powers = [1.0]
        while len(powers) < 100_000:
            nxt = powers[-1] * decay
            if nxt < min_trace:
                break
            powers.append(nxt)
        k = len(powers)
        old = None
        if self._trace_params is not None:
            old = (self._ring, self._valid, self._head)
        self._pow = np.array(powers)
        self._ring = np.zeros((k, self.num_tilings), dtype=np.int64)
        self._valid = np.zeros((k, self.num_tilings), dtype=bool)
        self._ages = np.arange(k)
        self._head = 0
        self._trace_params = (decay, min_trace)
        self._last[:] = -1
        self._now = 0
        if old is not None:
            # carry live rows over, keeping their ages
            ring, valid, head = old
            m = min(len(valid), k)
            self._now = m
            for age in range(m):
                src, dst = (head - age) % len(valid), m - 1 - age
                self._ring[dst] = ring[src]
                self._valid[dst] = valid[src]
                self._last[ring[src][valid[src]]] = m - age
            self._head = m - 1

    def _rows_by_age(self) -> np.ndarray:
        return (self._head - self._ages) % len(self._ages)

    def decay_and_mark(self, active: np.ndarray, decay: float, min_trace: float = 1e-6):
        """e *= decay, drop traces below ``min_trace``, then set e = 1 on ``active``.

        Every tiling indexes its own slice of the table, so a tile always sits
        in its tiling's column of the ring and re-marking it only invalidates
        that column of the older row.
        """
        if self._trace_params != (decay, min_trace):
            self._configure_ring(decay, min_trace)
        if self._now >= 2**31 - 2:
            self._configure_ring(decay, min_trace)
        k = len(self._ages)
        self._now += 1
        self._head = (self._head + 1) % k
        self._valid[self._head] = False
        last = self._last[active]
        age = self._now - last
        hit = (last >= 0) & (age < k)
        if hit.any():
            self._valid[(self._head - age[hit]) % k, active[hit] // self.sub] = False
        self._ring[self._head] = active
        self._valid[self._head] = True
        self._last[active] = self._now

    def _live(self):
        """(indices, trace values) of every non-zero trace."""
        rows = self._rows_by_age()
        valid = self._valid[rows]
        idx = self._ring[rows][valid]
        coef = np.broadcast_to(self._pow[:, None], valid.shape)[valid]
        return idx, coef

    def apply(self, step: float):
        """w += step * e over the non-zero traces."""
        if step != 0.0:
            idx, e = self._live()
            self.w[idx] += step * e

    def trace(self, idx) -> np.ndarray:
        """Current trace values at table indices ``idx``."""
        idx = np.asarray(idx)
        k = len(self._ages)
        last = self._last[idx]
        age = np.minimum(self._now - last, k - 1)
        row = (self._head - age) % k
        col = np.minimum(idx // self.sub, self.num_tilings - 1)
        live = (last >= 0) & (self._now - last < k) & self._valid[row, col]
        return np.where(live, self._pow[age], 0.0)

    def clear_traces(self):
        self._valid[:] = False

    @property
    def trace_count(self) -> int:
        return int(self._valid.sum())


class LctcValue:
    """Fixed convex blend of independent tile codings over chosen state dimensions."""

    def __init__(self, codings: Sequence[TileCoding], influences: Sequence[float],
                 selectors: Sequence[Sequence[int]]):
        if not (len(codings) == len(influences) == len(selectors)):
            raise ValueError("codings, influences and selectors must align")
        lam = np.asarray(influences, dtype=float)
        if np.any(lam < 0) or abs(lam.sum() - 1.0) > 1e-9:
            raise ValueError(f"influences must be non-negative and sum to 1, got {influences}")
        self.codings = list(codings)
        self.influences = lam
        self.selectors = [np.asarray(s, dtype=np.int64) for s in selectors]
        self.n_actions = self.codings[0].n_actions

    def encode(self, x) -> list[np.ndarray]:
        x = x.as_array() if isinstance(x, StateVector) else np.asarray(x, dtype=float)
        return [c.encode(x[sel]) for c, sel in zip(self.codings, self.selectors)]

    def values(self, enc: list[np.ndarray]) -> np.ndarray:
        out = np.zeros(self.n_actions)
        for lam, c, idx in zip(self.influences, self.codings, enc):
            out += lam * c.values(idx)
        return out

    def value(self, x, action: int) -> float:
        return float(self.values(self.encode(x))[action])

    def mark(self, enc: list[np.ndarray], action: int, decay: float, min_trace: float = 1e-6):
        for c, idx in zip(self.codings, enc):
            c.decay_and_mark(idx[action], decay, min_trace)

    def apply(self, step: float):
        for c in self.codings:
            c.apply(step)

    def update(self, enc, action: int, td_error: float, alpha: float, decay: float,
               min_trace: float = 1e-6):
        """Decay traces, set the active tiles' traces to one, then w += alpha * delta * e in every coding."""
        if not isinstance(enc, list):
            enc = self.encode(enc)
        self.mark(enc, action, decay, min_trace)
        self.apply(alpha * td_error)

    def clear_traces(self):
        for c in self.codings:
            c.clear_traces()

    def weights_digest(self) -> str:
        import hashlib

        h = hashlib.sha256()
        for c in self.codings:
            h.update(c.w.tobytes())
        return h.hexdigest()


def make_value(mode: str = "lctc", bounds: StateBounds | None = None, num_tilings: int = 32,
               tiles_per_dim: int = 8, memory_size: int = 10**7, seed: int = 0,
               lctc_weights: Sequence[float] = (0.6, 0.1, 0.3), n_actions: int = 10) -> LctcValue:
    """Build the value function for a state mode: ``agent``, ``full`` or ``lctc``."""
    bounds = bounds or StateBounds()
    mode = mode.lower().replace("-", "_").replace("state", "").strip("_")
    if mode == "agent":
        groups, lam = [AGENT_DIMS], [1.0]
    elif mode == "full":
        groups, lam = [FULL_DIMS], [1.0]
    elif mode == "lctc":
        groups, lam = [AGENT_DIMS, MARKET_DIMS, FULL_DIMS], list(lctc_weights)
    else:
        raise ValueError(f"unknown state mode {mode!r}")
    codings = []
    for i, dims in enumerate(groups):
        lo, hi = bounds.arrays(dims)
        codings.append(TileCoding(lo, hi, tiles_per_dim, num_tilings, n_actions, memory_size, seed + i))
    return LctcValue(codings, lam, groups)


# ---------------------------------------------------------- checkpoints

_MAGIC = b"LOBMMCK1"


def save_checkpoint(path, estimators: Sequence[LctcValue], extra: dict | None = None):
    """Flat little-endian file: header (seeds, M, dims, table sizes), scalars, then the
    non-zero weights of every table as (count, indices, values)."""
    extra = extra or {}
    first = estimators[0]
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", len(estimators), len(first.codings)))
        fh.write(first.influences.astype("<f8").tobytes())
        for c, sel in zip(first.codings, first.selectors):
            d = c.low.size
            fh.write(struct.pack("<QIIQI", c.seed, c.num_tilings, c.n_actions, c.memory_size, d))
            fh.write(sel.astype("<u4").tobytes())
            fh.write(c.low.astype("<f8").tobytes())
            fh.write(c.high.astype("<f8").tobytes())
            fh.write(c.tiles.astype("<u4").tobytes())
        fh.write(struct.pack("<I", len(extra)))
        for key in sorted(extra):
            kb = key.encode()
            fh.write(struct.pack("<H", len(kb)) + kb + struct.pack("<d", float(extra[key])))
        for est in estimators:
            for c in est.codings:
                nz = np.flatnonzero(c.w)
                fh.write(struct.pack("<Q", nz.size))
                fh.write(nz.astype("<u8").tobytes())
                fh.write(c.w[nz].astype("<f8").tobytes())


def load_checkpoint(path) -> tuple[list[LctcValue], dict]:
    with open(path, "rb") as fh:
        if fh.read(8) != _MAGIC:
            raise ValueError(f"{path} is not a weight checkpoint")
        n_est, n_cod = struct.unpack("<II", fh.read(8))
        lam = np.frombuffer(fh.read(8 * n_cod), dtype="<f8").astype(float)
        specs = []
        for _ in range(n_cod):
            seed, M, A, mem, d = struct.unpack("<QIIQI", fh.read(28))
            sel = np.frombuffer(fh.read(4 * d), dtype="<u4").astype(np.int64)
            lo = np.frombuffer(fh.read(8 * d), dtype="<f8").astype(float)
            hi = np.frombuffer(fh.read(8 * d), dtype="<f8").astype(float)
            tiles = np.frombuffer(fh.read(4 * d), dtype="<u4").astype(np.int64)
            specs.append((seed, M, A, mem, sel, lo, hi, tiles))
        (n_extra,) = struct.unpack("<I", fh.read(4))
        extra = {}
        for _ in range(n_extra):
            (kl,) = struct.unpack("<H", fh.read(2))
            key = fh.read(kl).decode()
            (extra[key],) = struct.unpack("<d", fh.read(8))
        estimators = []
        for _ in range(n_est):
            codings = []
            for seed, M, A, mem, sel, lo, hi, tiles in specs:
                c = TileCoding(lo, hi, tiles, M, A, mem, seed)
                (n,) = struct.unpack("<Q", fh.read(8))
                idx = np.frombuffer(fh.read(8 * n), dtype="<u8").astype(np.int64)
                c.w[idx] = np.frombuffer(fh.read(8 * n), dtype="<f8")
                codings.append(c)
            estimators.append(LctcValue(codings, lam, [s[4] for s in specs]))
    return estimators, extra
