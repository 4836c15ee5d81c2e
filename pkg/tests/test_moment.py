import numpy as np
import pytest

from fiberholonomy.bundle import FiberPoint, MapData, fundamental_tangent
from fiberholonomy.calculus import refinement_orders
from fiberholonomy.constructions import curvature_loop
from fiberholonomy.lie import GroupSpec, StructureError, adjoint, algebra_norm, exp, su2_basis
from fiberholonomy.mesh import sample_path
from fiberholonomy.moment import (
    completion_path,
    expected_momentum,
    flatness_probe,
    momentum,
    momentum_defect,
    momentum_pairing,
)

SPEC = GroupSpec()


def rng(seed=0):
    return np.random.Generator(np.random.Philox(seed))


def test_momentum_of_subgroup_path():
    data = MapData.relator(1)
    y = SPEC.random_algebra(rng(1), (), 0.8)
    u = sample_path(lambda t: exp(t[:, None, None] * y), 5)
    p = FiberPoint(data.basepoint, u)
    assert np.max(np.abs(momentum(p, data) + y)) < 1e-14
    assert momentum_pairing(p, y) == pytest.approx(-SPEC.pair(y, y))


def test_momentum_constant_path_is_zero():
    data = MapData.relator(1)
    u = completion_path(np.eye(2, dtype=complex))
    assert np.array_equal(momentum(FiberPoint(data.basepoint, u), data), np.zeros((2, 2)))


def test_momentum_equivariant():
    cl = curvature_loop(0)
    p = cl.point(32)
    mu = momentum(p, cl.data)
    for g in SPEC.random_element(rng(2), (20,)):
        moved = momentum(p.conjugated(g, cl.data), cl.data)
        assert algebra_norm(moved - adjoint(g, mu)) < 1e-12


def test_momentum_defect_converges():
    cl = curvature_loop(0)
    x = SPEC.random_algebra(rng(3))
    ladder = (16, 32, 64)
    defects = [momentum_defect(cl.point(n), x, cl.tangents(n)[0], cl.data, 4e-4 / 2**k) for k, n in enumerate(ladder)]
    orders = refinement_orders([1 / n for n in ladder], defects)
    assert defects[-1] < 1e-6 and min(orders) > 1.5


def test_momentum_defect_along_fundamental_field():
    cl = curvature_loop(1)
    p = cl.point(32)
    x = SPEC.random_algebra(rng(4))
    xp = fundamental_tangent(p, x, cl.data)
    assert momentum_defect(p, x, xp, cl.data) < 1e-12


def test_momentum_refuses_class_data():
    data = MapData.conjugacy_class(exp(0.5 * su2_basis()[2]))
    with pytest.raises(StructureError):
        momentum(FiberPoint(data.basepoint, completion_path(np.eye(2, dtype=complex))), data)


def test_flatness_probe_on_commuting_tuple():
    data = MapData.relator(2)
    g = SPEC.random_element(rng(5))
    angles = rng(6).uniform(-3, 3, 4)
    d = np.zeros((4, 2, 2), dtype=complex)
    d[:, 0, 0], d[:, 1, 1] = 1j * angles, -1j * angles
    pt = g @ exp(d) @ g.conj().T
    rep = flatness_probe(pt, data)
    assert rep.passed and rep.relator_defect < 1e-12 and rep.momentum_norm < 1e-12


def test_flatness_probe_generic_point():
    data = MapData.relator(1)
    pt = SPEC.random_element(rng(7), (2,))
    rep = flatness_probe(pt, data)
    assert not rep.passed
    assert np.max(np.abs(rep.momentum - expected_momentum(pt, data))) < 1e-12
    assert set(rep.to_json()) == {"relator_defect", "momentum_norm", "pass"}
