"""Interpolation points from the 95% box partition.

Each frequency falls in one box of the partition; the four box corners give a
subspace whose efficiency for that frequency is at least 0.95.  This prints
the ladder, the corners chosen for a few frequencies and the efficiency they
achieve, next to the two-point shift rule.

Run with ``python3 demos/box_partition.py``.
"""
import numpy as np

from expfit import default_partition, select_interpolation_points, shift_rule_points
from expfit.subspace import efficiency_at

n = 1024
part = default_partition(n)
print(f"{part.num_stacks} stacks, first alphas:", np.round(part.alphas[:6], 4))

rng = np.random.default_rng(1)
for w in rng.uniform(-3, 0, 5) + 1j * rng.uniform(-np.pi, np.pi, 5):
    corners = select_interpolation_points([w], part, n)
    shift = shift_rule_points([w], n)
    print(f"omega = {w.real:+.4f}{w.imag:+.4f}i  stack {part.stack_of(w.real):2d}  "
          f"box efficiency {efficiency_at(corners, [w], n):.4f}  "
          f"shift-rule efficiency {efficiency_at(shift, [w], n):.4f}")
