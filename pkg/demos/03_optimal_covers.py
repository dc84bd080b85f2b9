"""Exact minimal covers and the exponent where their cost crosses 1.

At scale delta an admissible cover uses intervals with lengths between
delta**(1/theta) and delta.  For a finite union of intervals on the line the
cheapest such cover can be found exactly by dynamic programming, so the
transition exponent s*(delta) at which the optimal cost equals 1 is a clean
finite-scale proxy for the intermediate dimension.
"""

import math

from compdim import DyadicBlockGeometric, PowerLawTelescoping
from compdim.coverlab import CoverProblem, countable_recipe, cantor_recipe, estimate_dimension, optimal_cover
from compdim.setforge import IntervalSet

# A tiny worked example: with s = 1 it pays to use many short intervals,
# with s = 1/2 it is cheaper to merge the three nearby points.
pts = IntervalSet([0.0, 0.3, 0.35, 1.0], [0.0, 0.3, 0.35, 1.0])
for s in (1.0, 0.5):
    sol = optimal_cover(CoverProblem(pts, 0.4, lengths=(0.1, 0.4), exponent=s))
    print(f"s={s}: cost {sol.cost:.4f} with intervals {[tuple(round(x, 3) for x in iv) for iv in sol.intervals]}")

print("\nmiddle-third Cantor set, delta = 3^-7")
for theta in (0.3, 0.6, 1.0):
    res = estimate_dimension(cantor_recipe(DyadicBlockGeometric(1 / 3)), theta, [3.0 ** -7])
    print(f"  theta={theta}: s* = {res.estimate:.4f}  (limit {math.log(2) / math.log(3):.4f})")

print("\ncountable set D_a for a_n = 1/(n(n+1)), theta = 1/2 (limit 1/3)")
res = estimate_dimension(countable_recipe(PowerLawTelescoping(2.0)), 0.5, [1e-2, 1e-3, 1e-4])
for row in res.rows:
    print(f"  delta={row['delta']:.0e}: s* = {row['s_star']:.4f}  components {row['components']}")
print(f"  fit in 1/|log delta|, intercept {res.extrapolated:.4f}")
print("  convergence in delta is logarithmically slow for the countable set")
