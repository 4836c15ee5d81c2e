"""
Integral period of the Cartan 3-form on SU(2)
=============================================

Integrate lambda over a degree-one cube at three resolutions, extrapolate,
and snap to an integer. Then halve the metric and watch the snap fail.
"""
from fiberholonomy.constructions import period_cube
from fiberholonomy.lie import GroupSpec
from fiberholonomy.quadrature import converge, integrate_3form

for factor in (1.0, 0.5):
    spec = GroupSpec().scaled(factor)

    def lam(g, x, y, z, spec=spec):
        return spec.cartan3(x, y, z)

    rep = converge(lambda n: integrate_3form(period_cube(n, spec), lam, workers=4), (16, 32, 48), tol=1e-2)
    print(f"metric x{factor}: values {[round(v, 6) for v in rep.values]}")
    print(f"  extrapolated {rep.value:.7f}  order {rep.extrapolation.order:.2f}  "
          f"snap {rep.snap.int} (defect {rep.snap.defect:.1e}, {'pass' if rep.passed else 'fail'})")
