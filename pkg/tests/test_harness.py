import csv

import numpy as np
import pytest

from lobmm import harness
from lobmm.bench import FixedPolicy, RandomPolicy
from lobmm.config import ExperimentConfig
from lobmm.errors import ConfigError, DegenerateSpread
from lobmm.harness import (DailyResult, EpisodeTrace, PolicyController, aggregate, cash_ledger_pnl2,
                           mean_abs_position, nd_pnl, run_episode)
from lobmm.strategy import CLEAR


@pytest.fixture(scope="module")
def cfg():
    return ExperimentConfig(synthetic_days=6, train_days=4, test_days=2, episodes=3, syn_n_events=600,
                            memory_size=2**16, syn_drift=0.3)


@pytest.fixture(scope="module")
def days(cfg):
    return harness.load_days(cfg)


@pytest.mark.parametrize("pnl,spread,want", [(5000, 0.5, 10_000), (0, 0.5, 0), (-75, 0.5, -150)])
def test_nd_pnl(pnl, spread, want):
    assert nd_pnl(pnl, spread) == want


@pytest.mark.parametrize("spread", [0, -0.01])
def test_nd_pnl_degenerate(spread):
    with pytest.raises(DegenerateSpread):
        nd_pnl(1, spread)


@pytest.mark.parametrize("path,want", [([100] * 7, 100), ([50, -50] * 4, 50), ([0] * 3, 0)])
def test_map(path, want):
    assert mean_abs_position(path) == want


def day(nd, mp):
    return DailyResult("2010-01-04", 0.0, 1.0, nd, mp, 0, 0)


def test_aggregate_examples():
    one = aggregate([day(2.5, 7)])
    assert (one["nd_pnl_mean"], one["nd_pnl_std"], one["map_mean"], one["map_mad"]) == (2.5, 0, 7, 0)
    two = aggregate([day(1, 10), day(3, 30)])
    assert (two["nd_pnl_mean"], two["nd_pnl_std"]) == (2, 1)
    assert (two["map_mean"], two["map_mad"]) == (20, 10)


class Idle:
    def begin_day(self):
        pass

    def decide(self, x, r, inventory, last):
        return None if last else CLEAR


def test_idle_agent_makes_nothing(cfg, days):
    r = run_episode(cfg, days[0], Idle())
    assert (r.pnl, r.map, r.fills, r.final_inventory) == (0, 0, 0, 0)
    assert r.avg_spread > 0


def test_fixed_policy_episode_is_deterministic(cfg, days):
    a = run_episode(cfg, days[0], PolicyController(FixedPolicy(1)))
    b = run_episode(cfg, days[0], PolicyController(FixedPolicy(1)))
    assert a == b and a.fills > 0
    assert a.nd_pnl == pytest.approx(a.pnl / a.avg_spread)


@pytest.mark.parametrize("policy", [lambda: FixedPolicy(1, -3000, 3000),
                                    lambda: RandomPolicy(np.random.default_rng(1), -3000, 3000)])
def test_step_pnl_sums_to_cash_ledger(cfg, days, policy):
    for d in days:
        tr = EpisodeTrace()
        r = run_episode(cfg, d, PolicyController(policy()), trace=tr)
        ledger = cash_ledger_pnl2(tr.fills, tr.close_mid2)
        assert sum(s.pnl for s in tr.steps) == ledger
        assert r.pnl == pytest.approx(ledger * float(d.instrument.tick) / 2)


def test_fixed_policy_respects_bounds(cfg, days):
    tight = cfg.replace(min_inventory=-2000, max_inventory=2000)
    for d in days:
        tr = EpisodeTrace()
        run_episode(tight, d, PolicyController(FixedPolicy(1, -2000, 2000)), trace=tr)
        ys = [s.inventory for s in tr.steps]
        assert max(abs(y) for y in ys) <= 2000 + tight.order_size
        for s in tr.steps:
            if abs(s.inventory) >= 2000:
                assert s.action == CLEAR


def test_train_eval_reproducible_and_eval_frozen(cfg, days):
    tr, te = harness.split_days(cfg, days)
    runs = []
    for _ in range(2):
        lr, curve = harness.train(cfg, tr)
        digest = [v.weights_digest() for v in lr.values]
        res = harness.evaluate(cfg, lr, te)
        assert [v.weights_digest() for v in lr.values] == digest
        runs.append((curve, res, digest))
    assert runs[0] == runs[1]
    assert len(runs[0][0]) == cfg.episodes


def test_split_is_chronological(cfg, days):
    tr, te = harness.split_days(cfg, list(reversed(days)))
    assert max(d.date for d in tr) < min(d.date for d in te)
    with pytest.raises(ConfigError):
        harness.split_days(cfg.replace(train_days=10), days)


@pytest.mark.parametrize("name", ["fixed:2", "random", "mmmw", "ftl"])
def test_benchmarks_run(cfg, days, name):
    res = harness.run_benchmark(cfg, days[:2], name)
    assert len(res) == 2 and all(r.map >= 0 for r in res)


def test_single_expert_meta_equals_fixed(cfg, days):
    fixed = harness.run_benchmark(cfg, days[:3], "fixed:2")
    for mode in ("mmmw", "ftl"):
        assert harness.run_benchmark(cfg, days[:3], mode, thetas=[2]) == fixed


def test_unknown_benchmark(cfg, days):
    with pytest.raises(ConfigError):
        harness.run_benchmark(cfg, days[:1], "martingale")


def test_write_results(tmp_path, cfg, days):
    res = harness.run_benchmark(cfg, days[:2], "fixed:1")
    harness.write_results(tmp_path, res)
    with open(tmp_path / "daily.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2 and float(rows[0]["pnl"]) == res[0].pnl
    with open(tmp_path / "summary.csv") as fh:
        summary = list(csv.DictReader(fh))
    assert float(summary[0]["nd_pnl_mean"]) == aggregate(res)["nd_pnl_mean"]
