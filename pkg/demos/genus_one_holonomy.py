"""
Holonomy between two genus-one strings
======================================

Two homotopies join the same pair of strings. The second one takes a detour
and carries a degree-one bubble in the cube, so its exponent differs from the
first by an integer and the circle value exp(2 pi i A) is unchanged.
"""
import numpy as np

from fiberholonomy.bundle import compare_homotopies, holonomy
from fiberholonomy.constructions import genus_one_setup

setup = genus_one_setup(seed=0)
ladder = (16, 32, 48)

straight = holonomy(lambda n: setup.homotopy(n), setup.data, ladder)
detour = holonomy(lambda n: setup.homotopy(n, detour=1.0, with_bubble=True), setup.data, ladder)

for name, rep in (("straight", straight), ("detour+bubble", detour)):
    z = rep.circle
    print(f"{name:14s} A = {rep.A:+.6f}  order {rep.order:.2f}  circle {z.real:+.6f}{z.imag:+.6f}i")

snap = compare_homotopies(straight, detour)
print(f"A1 - A2 = {straight.A - detour.A:+.6f} -> {snap.int} (defect {snap.defect:.1e})")
print("circle values agree:", np.isclose(straight.circle, detour.circle, atol=1e-2))
