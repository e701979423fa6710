"""Experiment orchestration: the per-event episode loop, training, evaluation,
benchmarks, daily metrics and CSV output.

Accounting inside an episode is exact: prices are integer half ticks, so the
incremental PnL and the day's PnL are integers in units of
``tick / 2 * volume``. They are converted to currency only when reported.
"""

from __future__ import annotations

import csv
import glob
import os
from dataclasses import asdict, dataclass, field, fields
from decimal import Decimal
from typing import Callable, Protocol, Sequence

import numpy as np

from .bench import FixedPolicy, MetaLearner, RandomPolicy, SpreadStrategy
from .config import ExperimentConfig
from .errors import ConfigError, DegenerateSpread
from .exchange import Exchange
from .features import LctcValue, StateBounds, StateBuilder, StateVector, load_checkpoint, make_value, save_checkpoint
from .feed import EventKind, TradingDay, generate_synthetic_days, load_day
from .learn import Learner, decay_epsilon
from .lob import Fill, Side
from .reward import StepFills, incremental_pnl, psi, reward
from .strategy import SpreadScale, action, constrain, quote_ticks


# ----------------------------------------------------------------- metrics


@dataclass
class DailyResult:
    date: str
    pnl: float
    avg_spread: float
    nd_pnl: float
    map: float
    fills: int
    final_inventory: int
    reward: float = 0.0
    steps: int = 0


def nd_pnl(pnl, avg_spread):
    """Daily PnL in units of the average market spread."""
    if avg_spread <= 0:
        raise DegenerateSpread(f"average spread {avg_spread} is not positive")
    return pnl / avg_spread


def mean_abs_position(inventory_path) -> float:
    y = np.asarray(inventory_path, dtype=float)
    if y.size == 0:
        raise ValueError("empty inventory path")
    return float(np.abs(y).mean())


def aggregate(results: Sequence[DailyResult]) -> dict:
    """Mean and standard deviation of ND-PnL, mean and mean absolute deviation of MAP."""
    if not results:
        raise ValueError("nothing to aggregate")
    nd = np.array([r.nd_pnl for r in results], dtype=float)
    mp = np.array([r.map for r in results], dtype=float)
    pnl = np.array([r.pnl for r in results], dtype=float)
    return {
        "days": len(results),
        "nd_pnl_mean": float(nd.mean()),
        "nd_pnl_std": float(nd.std()),
        "map_mean": float(mp.mean()),
        "map_mad": float(np.abs(mp - mp.mean()).mean()),
        "pnl_mean": float(pnl.mean()),
        "pnl_std": float(pnl.std()),
    }


# ------------------------------------------------------------- controllers


class Controller(Protocol):
    def begin_day(self): ...

    def decide(self, x: StateVector, r: float, inventory: int, last: bool) -> int | None: ...


class PolicyController:
    """Wraps a benchmark policy that only looks at inventory."""

    def __init__(self, policy):
        self.policy = policy

    def begin_day(self):
        pass

    def decide(self, x, r, inventory, last):
        return None if last else self.policy.act(inventory)


class LearningController:
    """Drives a :class:`Learner`; in training mode it applies one TD update per event."""

    def __init__(self, learner: Learner, train: bool = True, rng: np.random.Generator | None = None):
        self.learner = learner
        self.train = train
        self.rng = rng
        self._prev = None

    def begin_day(self):
        self._prev = None
        if self.train:
            self.learner.begin_episode()

    def decide(self, x, r, inventory, last):
        lr = self.learner
        enc = lr.encode(x)
        if last:
            if self.train and self._prev is not None:
                lr.step_update(self._prev[0], self._prev[1], r, None, None)
            return None
        a = lr.act(enc, self.rng)
        if self.train and self._prev is not None:
            lr.step_update(self._prev[0], self._prev[1], r, enc, a)
        self._prev = (enc, a)
        return a


# ------------------------------------------------------------------ episode


@dataclass
class StepRecord:
    """Per-decision accounting in native units (half ticks x volume)."""

    psi_a: int
    psi_b: int
    inventory: int
    mid_move2: int
    pnl: int
    reward: float
    action: int | None
    mid2: int


@dataclass
class EpisodeTrace:
    steps: list = field(default_factory=list)
    fills: list = field(default_factory=list)
    close_mid2: int = 0


def run_episode(cfg: ExperimentConfig, day: TradingDay, controller, mode: str = "eval",
                rng: np.random.Generator | None = None, trace: EpisodeTrace | None = None) -> DailyResult:
    """Replay one day event by event with the controller quoting into it.

    Per event: update book and queues, collect fills, compute the reward and
    the state, let the controller learn and act, then revise orders.
    """
    if mode not in ("train", "eval"):
        raise ValueError("mode must be 'train' or 'eval'")
    inst = day.instrument
    lot = inst.lot
    if cfg.order_size % lot:
        raise ConfigError(f"order_size {cfg.order_size} is not a multiple of lot {lot}")
    book = day.new_book()
    ex = Exchange(book, lot, cfg.cancellation, rng)
    scale = SpreadScale(cfg.spread_window)
    builder = StateBuilder(cfg.max_inventory, cfg.lookback, cfg.rsi_period, cfg.imbalance_depth)
    ind = builder.indicators
    spec = cfg.reward_spec()
    bounds = cfg.bounds()
    to_currency = float(inst.tick) / 2.0 / cfg.reward_scale

    inventory = 0
    prev_mid2 = None
    pnl2 = 0
    reward_sum = 0.0
    abs_inv_sum = 0
    spread_sum = 0
    steps = 0
    n_fills = 0
    events = day.events
    last_i = len(events) - 1
    controller.begin_day()

    for i, ev in enumerate(events):
        if ev.kind is EventKind.TRADE:
            ex.on_public_trade(ev.side, ev.price, ev.volume, ev.timestamp)
            ind.on_trade(ev.side, ev.volume)
        else:
            ex.on_snapshot(ev.side, ev.levels, ev.timestamp)
        if not (book.bids and book.asks):
            continue
        mid2 = book.mid2()
        if prev_mid2 is None:
            prev_mid2 = mid2
        move2 = mid2 - prev_mid2

        fills = ex.drain_fills()
        sf = StepFills()
        for f in fills:
            sf.add(f, 2)
        n_fills += len(fills)
        inventory += sf.net_volume
        # executions are valued against the mid they happened at, the previous decision's mid
        psi_a, psi_b = psi(sf, prev_mid2)
        step_pnl = incremental_pnl(psi_a, psi_b, inventory, move2)
        r = reward(spec, step_pnl, inventory, move2)
        pnl2 += step_pnl
        reward_sum += float(r)

        ind.on_step(move2)
        spread = book.spread_ticks()
        scale.push(spread)
        theta_scale = scale.ticks()
        oa, ob = ex.order(Side.ASK), ex.order(Side.BID)
        eff_a = (2 * oa.price - mid2) / (2 * theta_scale) if oa else 0.0
        eff_b = (mid2 - 2 * ob.price) / (2 * theta_scale) if ob else 0.0
        x = builder.compute_state(book, inventory, eff_a, eff_b)

        a = controller.decide(x, float(r) * to_currency, inventory, i == last_i)
        if a is not None:
            _apply_action(ex, a, inventory, mid2, theta_scale, bounds, lot, cfg.order_size, ev.timestamp)

        if trace is not None:
            trace.steps.append(StepRecord(psi_a, psi_b, inventory, move2, step_pnl, r, a, mid2))
            trace.fills.extend(fills)
        abs_inv_sum += abs(inventory)
        spread_sum += spread
        steps += 1
        prev_mid2 = mid2

    if trace is not None:
        trace.close_mid2 = prev_mid2
    tick = inst.tick
    pnl = float(Decimal(pnl2) * tick / 2)
    avg_spread = float(Decimal(spread_sum) * tick / steps) if steps else 0.0
    return DailyResult(
        date=day.date.isoformat(),
        pnl=pnl,
        avg_spread=avg_spread,
        nd_pnl=nd_pnl(pnl, avg_spread) if avg_spread > 0 else 0.0,
        map=abs_inv_sum / steps if steps else 0.0,
        fills=n_fills,
        final_inventory=inventory,
        reward=reward_sum * float(tick) / 2.0,
        steps=steps,
    )


def _apply_action(ex: Exchange, a: int, inventory: int, mid2: int, theta_scale: int, bounds,
                  lot: int, order_size: int, ts: int):
    eff = constrain(a, inventory, bounds, lot)
    if action(a).clears:
        if eff.market:
            side = Side.BID if eff.market > 0 else Side.ASK
            ex.market_order(side, abs(eff.market), ts)
        return
    p_a, p_b = quote_ticks(a, mid2, theta_scale)
    for side, want, price in ((Side.BID, eff.bid, p_b), (Side.ASK, eff.ask, p_a)):
        o = ex.order(side)
        if o is not None:
            # an unchanged order keeps its place in the queue
            if want and o.price == price:
                continue
            ex.cancel(o.id)
        if want:
            ex.place_limit(side, price, order_size, ts)


def cash_ledger_pnl2(fills: Sequence[Fill], close_mid2: int) -> int:
    """Mark-to-market PnL in half-tick units from the raw fill list."""
    cash = 0
    inv = 0
    for f in fills:
        if f.side is Side.BID:
            cash -= 2 * f.price * f.volume
            inv += f.volume
        else:
            cash += 2 * f.price * f.volume
            inv -= f.volume
    return cash + inv * close_mid2


# ------------------------------------------------------------ construction


def value_factory(cfg: ExperimentConfig) -> Callable[[], LctcValue]:
    bounds = StateBounds(signed_volume=(-cfg.signed_volume_bound, cfg.signed_volume_bound))

    def build():
        return make_value(cfg.state_mode, bounds, cfg.num_tilings, cfg.tiles_per_dim,
                          cfg.memory_size, cfg.hash_seed, cfg.lctc_weights)

    return build


def _streams(seed: int, n: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def make_learner(cfg: ExperimentConfig) -> Learner:
    (rng,) = _streams(cfg.seed, 1)
    return Learner(cfg.algo_spec(), value_factory(cfg), rng)


def load_days(cfg: ExperimentConfig) -> list[TradingDay]:
    if cfg.data_dir:
        paths = sorted(glob.glob(os.path.join(cfg.data_dir, "*.csv")))
        if not paths:
            raise ConfigError(f"no *.csv event files in {cfg.data_dir}")
        days = [load_day(p) for p in paths]
        days.sort(key=lambda d: d.date)
        return days
    return generate_synthetic_days(cfg.synthetic_seed, cfg.synthetic_days, cfg.synthetic_params(),
                                   random_drift_sign=cfg.syn_drift_random_sign)


def split_days(cfg: ExperimentConfig, days: Sequence[TradingDay]) -> tuple[list, list]:
    """Chronological split: the test days all come after the training days."""
    need = cfg.train_days + cfg.test_days
    if len(days) < need:
        raise ConfigError(f"{len(days)} days available, config needs {need}")
    days = sorted(days, key=lambda d: d.date)
    return list(days[:cfg.train_days]), list(days[cfg.train_days:need])


# ---------------------------------------------------------------- training


@dataclass
class CurvePoint:
    episode: int
    date: str
    epsilon: float
    reward: float
    pnl: float
    nd_pnl: float
    map: float
    rolling_mean: float
    rolling_std: float


def train(cfg: ExperimentConfig, days: Sequence[TradingDay], learner: Learner | None = None,
          progress: Callable[[CurvePoint], None] | None = None) -> tuple[Learner, list[CurvePoint]]:
    """Train for ``cfg.episodes`` episodes, each a training day drawn uniformly with replacement."""
    learner = learner or make_learner(cfg)
    pick, ex_rng = _streams(cfg.seed + 1, 2)
    expl = cfg.exploration_spec()
    curve = []
    rewards = []
    for ep in range(cfg.episodes):
        day = days[int(pick.integers(len(days)))]
        learner.epsilon = decay_epsilon(ep, expl)
        res = run_episode(cfg, day, LearningController(learner, train=True), "train", ex_rng)
        rewards.append(res.reward)
        window = np.array(rewards[-cfg.rolling_window:])
        pt = CurvePoint(ep, res.date, learner.epsilon, res.reward, res.pnl, res.nd_pnl, res.map,
                        float(window.mean()), float(window.std()))
        curve.append(pt)
        if progress:
            progress(pt)
    return learner, curve


def evaluate(cfg: ExperimentConfig, learner: Learner, days: Sequence[TradingDay]) -> list[DailyResult]:
    """Greedy, frozen-weight evaluation, one result per day."""
    saved = learner.epsilon
    learner.epsilon = 0.0
    out = []
    for k, day in enumerate(days):
        tie_rng, ex_rng = _streams(cfg.seed + 1000 + k, 2)
        out.append(run_episode(cfg, day, LearningController(learner, train=False, rng=tie_rng), "eval", ex_rng))
    learner.epsilon = saved
    return out


# -------------------------------------------------------------- benchmarks


def run_benchmark(cfg: ExperimentConfig, days: Sequence[TradingDay], name: str | None = None,
                  thetas: Sequence[int] = (1, 2, 3, 4, 5)) -> list[DailyResult]:
    """Evaluate ``fixed:<theta>``, ``random``, ``mmmw`` or ``ftl`` day by day.

    The meta-strategies choose among fixed-spread experts with the given
    ``thetas``, one choice per day.
    """
    name = (name or cfg.benchmark).strip().lower()
    lo, hi = cfg.min_inventory, cfg.max_inventory
    results = []
    if name.startswith("fixed"):
        theta = int(name.split(":", 1)[1]) if ":" in name else 1
        for k, day in enumerate(days):
            (ex_rng,) = _streams(cfg.seed + 1000 + k, 1)
            results.append(run_episode(cfg, day, PolicyController(FixedPolicy(theta, lo, hi)), "eval", ex_rng))
    elif name == "random":
        pol_rng, ex_rng = _streams(cfg.seed, 2)
        pol = RandomPolicy(pol_rng, min_inv=lo, max_inv=hi)
        for day in days:
            results.append(run_episode(cfg, day, PolicyController(pol), "eval", ex_rng))
    elif name in ("mmmw", "mw", "ftl"):
        mode = "ftl" if name == "ftl" else "mw"
        (meta_rng,) = _streams(cfg.seed, 1)
        meta = MetaLearner([SpreadStrategy(t) for t in thetas], mode, cfg.mw_learning_rate, meta_rng)
        for k, day in enumerate(days):
            # every expert sees the same day; agent orders never move the market
            per_expert = []
            for e in meta.experts:
                (ex_rng,) = _streams(cfg.seed + 1000 + k, 1)
                per_expert.append(run_episode(cfg, day, PolicyController(FixedPolicy(e.theta, lo, hi)), "eval", ex_rng))
            results.append(per_expert[meta.chosen])
            meta.meta_step([r.pnl for r in per_expert])
    else:
        raise ConfigError(f"unknown benchmark {name!r}")
    return results


# ------------------------------------------------------------------ output


def _row(obj) -> dict:
    return {k: (repr(v) if isinstance(v, float) else v) for k, v in asdict(obj).items()}


def write_rows(path, rows: Sequence, header: Sequence[str] | None = None):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if not rows:
            fh.write(",".join(header or []) + "\n")
            return
        dicts = [_row(r) if hasattr(r, "__dataclass_fields__") else r for r in rows]
        w = csv.DictWriter(fh, fieldnames=list(dicts[0].keys()), lineterminator="\n")
        w.writeheader()
        for d in dicts:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in d.items()})


def write_results(out_dir, results: Sequence[DailyResult], prefix: str = ""):
    os.makedirs(out_dir, exist_ok=True)
    write_rows(os.path.join(out_dir, f"{prefix}daily.csv"), results, [f.name for f in fields(DailyResult)])
    write_rows(os.path.join(out_dir, f"{prefix}summary.csv"), [aggregate(results)] if results else [])


def save_learner(path, learner: Learner):
    save_checkpoint(path, learner.values, {"avg_reward": learner.avg_reward})


def load_learner(cfg: ExperimentConfig, path) -> Learner:
    estimators, extra = load_checkpoint(path)
    it = iter(estimators)
    learner = Learner(cfg.algo_spec(), lambda: next(it), np.random.default_rng(cfg.seed))
    learner.avg_reward = extra.get("avg_reward", 0.0)
    return learner
