"""Attainable intermediate dimensions as theta varies.

Every complementary set with gap sequence a has its theta-intermediate
dimensions squeezed between those of the countable set D_a and the Cantor
set C_a.  For a sequence that alternates between two block ratios the
Cantor endpoint is no longer constant in theta, which is where the range
gets interesting.  The output is CSV ready for any plotting tool.
"""

import csv
import sys

import numpy as np

from compdim import DyadicBlockSchedule, dimcalc

seq = DyadicBlockSchedule((1 / 3, 0.2), (64, 64))
box = dimcalc.box_dims(seq)
haus = dimcalc.hausdorff_cantor(seq).value

writer = csv.writer(sys.stdout, lineterminator="\n")
writer.writerow(["theta", "lower_countable", "lower_cantor", "upper_countable", "upper_cantor"])
for theta in np.linspace(0.05, 1.0, 20):
    rec = dimcalc.range_for_theta(seq, theta, box, haus).to_record()
    writer.writerow([f"{v:.6f}" for v in rec.values()])
