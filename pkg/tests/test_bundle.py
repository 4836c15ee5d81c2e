import numpy as np
import pytest

from fiberholonomy.bundle import (
    FiberTangent,
    MapData,
    beta_lambda,
    boundary_faces,
    compare_homotopies,
    fiber_chart,
    fiber_point,
    homotopy_exponent,
    holonomy,
    juxtapose,
    relative_period,
    relative_period_report,
    zeta_fiber,
)
from fiberholonomy.calculus import exterior_derivative
from fiberholonomy.constructions import (
    bubble_cube_pair,
    curvature_loop,
    genus_one_setup,
    period_cube,
    stokes_cube_pair,
)
from fiberholonomy.lie import GroupSpec, StructureError, exp, su2_basis
from fiberholonomy.mesh import CubeMesh, HomotopyCD11, PathMesh, SquareMesh, StringCD1, concat, string_from_path

SPEC = GroupSpec()


def rng(seed=0):
    return np.random.Generator(np.random.Philox(seed))


def _tangents(cl, p, n, seed, k=3):
    r = rng(seed)
    t = np.linspace(0, 1, n + 1)
    out = []
    for _ in range(k):
        v = SPEC.random_algebra(r, (cl.data.arity,), 0.5)
        x = SPEC.random_algebra(r, (), 0.5)
        V = t[:, None, None] * cl.data.df(p.q, v) + np.sin(np.pi * t)[:, None, None] * x
        out.append(FiberTangent(v, V).check(p, cl.data))
    return out


def test_fiber_point_of_string():
    setup = genus_one_setup(0)
    s = setup.string(1, 8)
    p = fiber_point(s, setup.data).check(setup.data)
    assert np.array_equal(p.q, s.w.samples[-1])
    assert np.array_equal(p.u.samples, s.phi.samples[:, -1])
    bad = StringCD1(s.w, SquareMesh(s.phi.samples @ exp(1e-3 * su2_basis()[0]), SPEC))
    with pytest.raises(StructureError):
        fiber_point(bad, setup.data)


def test_beta_lambda_antisymmetric():
    cl = curvature_loop(0)
    p = cl.point(16)
    t1, t2, _ = _tangents(cl, p, 16, 1)
    assert abs(beta_lambda(p.u, t1.V, t1.V)) < 1e-18
    assert beta_lambda(p.u, t1.V, t2.V) == pytest.approx(-beta_lambda(p.u, t2.V, t1.V), abs=1e-20)
    with pytest.raises(StructureError):
        beta_lambda(p.u, t1.V[:-1], t2.V[:-1])


def test_d_beta_is_endpoint_lambda_and_zeta_fiber_closed():
    cl = curvature_loop(0)
    data = cl.data
    db, dz = [], []
    for n in (32, 64):
        p = cl.point(n)
        tans = _tangents(cl, p, n, 3)
        chart = fiber_chart(p, tans)
        ev = SPEC.cartan3(*[data.df(p.q, t.vq) for t in tans])
        d_beta = exterior_derivative(lambda q, a, b: beta_lambda(q.u, a.V, b.V), chart, 3, 1e-3)
        db.append(abs(d_beta - ev) / abs(ev))
        dz.append(abs(exterior_derivative(lambda q, a, b: zeta_fiber(q, a, b, data), chart, 3, 1e-3)) / abs(ev))
    assert db[1] < 0.1 and np.log2(db[0] / db[1]) > 1.5
    assert dz[1] < 0.1 and np.log2(dz[0] / dz[1]) > 1.5


# -- holonomy ---------------------------------------------------------------------


def _constant(setup, n):
    s = setup.string(1, n)
    h = np.broadcast_to(s.w.samples[:, None], (n + 1, n + 1) + s.w.samples.shape[1:])
    H = np.broadcast_to(s.phi.samples[:, :, None], (n + 1,) * 3 + s.phi.samples.shape[2:])
    return HomotopyCD11(SquareMesh(h, SPEC, tuple_valued=True), CubeMesh(H, SPEC))


def test_constant_homotopy_is_trivial():
    setup = genus_one_setup(0)
    rep = holonomy(_constant(setup, 8), setup.data)
    assert rep.A == 0.0 and rep.closed and rep.circle == 1.0
    assert rep.passed and rep.snap.int == 0


def test_reversal_negates():
    setup = genus_one_setup(0)
    hh = setup.homotopy(8, detour=1.0)
    a = homotopy_exponent(hh.h, hh.H, setup.data)
    b = homotopy_exponent(hh.reversed().h, hh.reversed().H, setup.data)
    assert b == pytest.approx(-a, abs=1e-15)


def test_stacking_is_additive():
    setup = genus_one_setup(0)
    n = 8
    fwd = setup.homotopy(n, detour=1.0)
    back = setup.homotopy(n, detour=0.0).reversed()
    h = concat([fwd.h, back.h], axis=1)
    H = concat([fwd.H, back.H], axis=2)
    total = homotopy_exponent(h, H, setup.data)
    parts = homotopy_exponent(fwd.h, fwd.H, setup.data) + homotopy_exponent(back.h, back.H, setup.data)
    assert total == pytest.approx(parts, abs=1e-14)


def test_conjugation_invariance():
    setup = genus_one_setup(0)
    hh = setup.homotopy(8, detour=1.0)
    g = SPEC.random_element(rng(9))
    moved = HomotopyCD11(hh.h.conjugated(g), hh.H.conjugated(g))
    a = homotopy_exponent(hh.h, hh.H, setup.data)
    assert homotopy_exponent(moved.h, moved.H, setup.data) == pytest.approx(a, abs=1e-12)


def test_holonomy_rejects_invalid_and_coarse():
    setup = genus_one_setup(0)
    hh = setup.homotopy(8)
    H = hh.H.samples.copy()
    H[0, 3, 3] = H[0, 3, 3] @ exp(1e-4 * su2_basis()[1])
    with pytest.raises(StructureError):
        holonomy(HomotopyCD11(hh.h, CubeMesh(H, SPEC)), setup.data)
    with pytest.raises(StructureError):
        holonomy(setup.homotopy(4, with_bubble=True), setup.data)


def test_holonomy_ladder_and_json():
    setup = genus_one_setup(0)
    rep = holonomy(setup.homotopy(16, detour=1.0), setup.data)
    assert rep.resolutions == (4, 8, 16) and len(rep.values) == 3
    j = rep.to_json()
    assert set(j) >= {"value", "error_est", "order", "order_reliable", "circle", "closed", "validation"}
    assert not j["closed"] and "snap" not in j


def test_bubble_changes_exponent_by_one():
    setup = genus_one_setup(0)
    n = 32
    a = holonomy(setup.homotopy(n), setup.data)
    b = holonomy(setup.homotopy(n, with_bubble=True), setup.data)
    snap = compare_homotopies(a, b, tol=0.05)
    assert snap.passed and abs(snap.int) == 1


def test_small_loop_curvature():
    cl = curvature_loop(0)
    n, eps = 16, 0.05
    p = cl.point(n)
    t1, t2 = cl.tangents(n)
    expected = zeta_fiber(p, t1, t2, cl.data)
    h, H = cl.loop(eps, n, n // 4)
    A = homotopy_exponent(h, H, cl.data)
    assert A / eps**2 == pytest.approx(expected, rel=0.05)


# -- relative periods --------------------------------------------------------------


def test_boundary_faces_of_volume_form():
    faces = boundary_faces(period_cube(4))
    assert len(faces) == 6 and sorted(s for s, _ in faces) == [-1, -1, -1, 1, 1, 1]


def test_relative_period_stokes_and_bubble():
    data = MapData.relator(1)
    rep = relative_period_report(lambda n: stokes_cube_pair(n, data), data, (8, 16, 32))
    assert rep.passed and rep.snap.int == 0
    rep = relative_period_report(lambda n: bubble_cube_pair(n, data), data, (16, 32, 64))
    assert rep.passed and rep.snap.int == -1


def test_relative_period_metric_halving_breaks_integrality():
    data = MapData.relator(1).scaled(0.5)
    val, snap = relative_period(*bubble_cube_pair(32, data), data)
    assert val == pytest.approx(-0.5, abs=0.02) and not snap.passed


def test_relative_period_rejects_incompatible_boundary():
    data = MapData.relator(1)
    h, H = stokes_cube_pair(4, data)
    with pytest.raises(StructureError):
        relative_period(h, CubeMesh(H.samples @ exp(1e-3 * su2_basis()[0]), SPEC), data)
    with pytest.raises(StructureError):
        relative_period(SquareMesh(h.samples[0], SPEC, tuple_valued=True), H, data)


# -- juxtaposition -------------------------------------------------------------------


def _loop_string(data, n):
    # a based loop in M with phi = f(o) on the top edge
    r = rng(11)
    y = SPEC.random_algebra(r, (data.arity,), 0.4)
    t = np.linspace(0, 1, n + 1)
    w = exp(np.sin(np.pi * t)[:, None, None, None] * y)
    fw = data.f(w)
    from fiberholonomy.constructions import canonical_square

    phi = canonical_square(fw, np.broadcast_to(data.fo, fw.shape), n)
    return StringCD1(PathMesh(w, SPEC, tuple_valued=True), SquareMesh(phi, SPEC))


def test_juxtapose_keeps_fiber_point():
    setup = genus_one_setup(0)
    n = 8
    s = setup.string(1, n)
    loop = _loop_string(setup.data, n)
    j = juxtapose(s, loop, setup.data)
    p, pj = fiber_point(s, setup.data), fiber_point(j, setup.data)
    assert np.array_equal(pj.q, p.q)
    assert np.array_equal(pj.u.samples[n:], p.u.samples)
    assert j.w.seams == ((n,),)
    with pytest.raises(StructureError):
        juxtapose(s, s, setup.data)


def test_juxtapose_constant_loop_adds_nothing():
    setup = genus_one_setup(0)
    n = 8
    w = PathMesh(np.broadcast_to(setup.data.basepoint, (n + 1,) + setup.data.basepoint.shape), SPEC, tuple_valued=True)
    loop = string_from_path(w, setup.data)
    j = juxtapose(setup.string(1, n), loop, setup.data)
    assert np.array_equal(j.phi.samples[n:], setup.string(1, n).phi.samples)
