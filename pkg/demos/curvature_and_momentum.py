"""
Curvature and momentum on the fiber
===================================

A small square loop of fiber points picks up A ~ eps^2 zeta_fiber(T1, T2).
The momentum map -eta(theta)(u) is checked against its defining identity.
"""
import numpy as np

from fiberholonomy.bundle import holonomy, zeta_fiber
from fiberholonomy.constructions import curvature_loop
from fiberholonomy.mesh import HomotopyCD11
from fiberholonomy.moment import momentum, momentum_defect

cl = curvature_loop(seed=1)
n = 64
p = cl.point(n)
t1, t2 = cl.tangents(n)
z = zeta_fiber(p, t1, t2, cl.data)
print(f"zeta_fiber(T1, T2) = {z:+.8f}")

for eps in (0.2, 0.1, 0.05):
    rep = holonomy(lambda k: HomotopyCD11(*cl.loop(eps, k, k // 4)), cl.data, (16, 32, 64), validate=False)
    print(f"eps {eps:5.2f}: A/eps^2 = {rep.A / eps**2:+.8f}  rel err {abs(rep.A / eps**2 - z) / abs(z):.1e}")

mu = momentum(p, cl.data)
print("momentum at p:\n", np.round(mu, 6))
x = cl.data.spec.random_algebra(np.random.Generator(np.random.Philox(5)))
for k in (16, 32, 64):
    d = momentum_defect(cl.point(k), x, cl.tangents(k)[0], cl.data, 4e-4 * 16 / k)
    print(f"n {k:3d}: |d<mu,X>(T) - zeta_fiber(T, X_P)| = {d:.2e}")
