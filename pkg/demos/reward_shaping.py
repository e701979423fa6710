"""
Spread capture, inventory and damped rewards
============================================

One step where both quotes fill, then steps where a held position is marked
to market under the three reward variants.
"""

from decimal import Decimal as D

from lobmm.reward import RewardKind, RewardSpec, StepFills, incremental_pnl, psi, reward

# 100 sold at 101.00 and 100 bought at 99.50 around a 100.25 mid
fills = StepFills.single(matched_ask=100, vwap_ask=D("101.00"), matched_bid=100, vwap_bid=D("99.50"))
psi_a, psi_b = psi(fills, D("100.25"))
print("psi", psi_a, psi_b, "step pnl", incremental_pnl(psi_a, psi_b, 0, 0))

# holding 1000 while the mid moves 5 cents either way
specs = [RewardSpec(RewardKind.PNL), RewardSpec(RewardKind.SYMMETRIC, 0.6),
         RewardSpec(RewardKind.ASYMMETRIC, 0.6)]
for dm in (D("0.05"), D("-0.05")):
    pnl = incremental_pnl(0, 0, 1000, dm)
    row = ", ".join(f"{s.kind.value}={reward(s, pnl, 1000, dm)}" for s in specs)
    print(f"dm={dm:+}: {row}")
