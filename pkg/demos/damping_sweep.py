"""
Sweeping the damping factor
===========================

Train one agent per damping factor and report mean absolute position and
normalised PnL out of sample. Damping the speculative part of the reward
should push the agent towards smaller positions.
"""

from lobmm import harness
from lobmm.config import ExperimentConfig

base = ExperimentConfig(synthetic_days=20, train_days=14, test_days=6, syn_n_events=800,
                        syn_drift=0.3, episodes=40, epsilon_t=40, memory_size=2**20)
days = harness.load_days(base)

for eta in (0.0, 0.3, 0.6, 1.0):
    cfg = base.replace(eta=eta)
    train_days, test_days = harness.split_days(cfg, days)
    learner, _ = harness.train(cfg, train_days)
    s = harness.aggregate(harness.evaluate(cfg, learner, test_days))
    print(f"eta={eta:.1f}  MAP {s['map_mean']:8.1f}  ND-PnL {s['nd_pnl_mean']:10.1f}")
