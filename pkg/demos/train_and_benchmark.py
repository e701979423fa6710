"""
Training a market maker and comparing it with benchmarks
========================================================

A short SARSA(lambda) run on synthetic trending days, evaluated out of sample
next to fixed-spread, random and online-learning benchmarks. The sizes are
kept small so the script finishes in a few minutes.
"""

from lobmm import harness
from lobmm.config import ExperimentConfig

cfg = ExperimentConfig(synthetic_days=30, train_days=20, test_days=10, syn_n_events=1000,
                       syn_drift=0.3, episodes=60, epsilon_t=60, memory_size=2**20, seed=1)
train_days, test_days = harness.split_days(cfg, harness.load_days(cfg))


def show(pt):
    if pt.episode % 10 == 0:
        print(f"episode {pt.episode:3d}  eps {pt.epsilon:.3f}  reward {pt.reward:9.2f}")


learner, curve = harness.train(cfg, train_days, progress=show)

rows = {"sarsa": harness.evaluate(cfg, learner, test_days)}
for name in ("fixed:1", "fixed:3", "random", "mmmw", "ftl"):
    rows[name] = harness.run_benchmark(cfg, test_days, name)

print(f"\n{'strategy':10s} {'ND-PnL':>12s} {'std':>10s} {'MAP':>9s} {'MAD':>8s}")
for name, res in rows.items():
    s = harness.aggregate(res)
    print(f"{name:10s} {s['nd_pnl_mean']:12.1f} {s['nd_pnl_std']:10.1f} {s['map_mean']:9.1f} {s['map_mad']:8.1f}")
