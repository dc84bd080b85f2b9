"""Building a complementary set with a prescribed intermediate dimension.

Pick a target t strictly between the countable and Cantor values.  The
sequence is split in two: a subsequence b, chosen block by block so that its
dyadic averages decay like s_k**(theta/t), forms a Cantor set C_b, and the
leftover terms a' form a countable set.  Their union uses every gap of a
exactly once and has upper theta-intermediate dimension t.
"""

from compdim import PowerLawTelescoping
from compdim.coverlab import estimate_dimension, mixed_recipe
from compdim.setforge import build_mixed, plan_construction, verify_gaps

seq = PowerLawTelescoping(2.0)
theta, t = 0.5, 0.42
plan = plan_construction(seq, theta, t)
print(f"admissible targets for theta={theta}: ({plan.upper_countable:.4f}, {plan.upper_cantor:.4f})")
print(f"block map j(k) for k < 12: {list(plan.j_map[:12])}")
print(f"C_b occupies [0, {plan.split_r:.5f}], D_a' fills the rest")

E = build_mixed(plan, 8, 10 ** 4)
rep = verify_gaps(E, seq, 100)
print(f"first 100 gaps of E are terms of a: {rep.ok}")

res = estimate_dimension(mixed_recipe(plan), theta, [1e-2, 1e-3, 1e-4])
for row in res.rows:
    print(f"  delta={row['delta']:.0e}: s* = {row['s_star']:.4f}  (target {t})")
