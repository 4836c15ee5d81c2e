import numpy as np
import pytest

from fiberholonomy import jsonio
from fiberholonomy.bundle import MapData
from fiberholonomy.constructions import genus_one_setup
from fiberholonomy.lie import GroupSpec, StructureError, dagger, exp, su2_basis
from fiberholonomy.mesh import (
    CubeMesh,
    HomotopyCD11,
    PathMesh,
    SquareMesh,
    StringCD1,
    concat,
    geodesic,
    geodesic_path,
    refine,
    sample_path,
    sample_square,
    string_from_path,
    string_over,
    validate_homotopy,
    validate_string,
)

SPEC = GroupSpec()
E1, E2, E3 = su2_basis()


def rng(seed=0):
    return np.random.Generator(np.random.Philox(seed))


def test_geodesic_examples():
    g = SPEC.random_element(rng(1))
    out = geodesic(g, g, [0.0, 0.5, 1.0])
    assert np.allclose(out, g, atol=1e-15)
    target = exp(np.pi / 2 * E3)
    path = geodesic_path([np.eye(2), target], 4)
    assert np.allclose(path.samples[2], exp(np.pi / 4 * E3), atol=1e-15)
    assert np.array_equal(path.samples[0], np.eye(2)) and np.array_equal(path.samples[-1], target)


def test_geodesic_path_seams():
    pts = list(SPEC.random_element(rng(2), (3,)) @ np.eye(2))
    path = geodesic_path(pts, 5)
    assert path.resolution == (10,) and path.seams == ((5,),)
    assert np.array_equal(path.samples[5], pts[1])


def test_mesh_is_immutable_and_shapes():
    m = sample_path(lambda t: exp(t[:, None, None] * E1), 8)
    with pytest.raises(ValueError):
        m.samples[0, 0, 0] = 3
    with pytest.raises(StructureError):
        PathMesh(np.zeros((3, 3, 3)), SPEC)
    with pytest.raises(StructureError):
        SquareMesh(np.zeros((1, 4, 2, 2)), SPEC)


def test_refine_keeps_samples_and_lands_on_geodesic():
    base = sample_square(lambda a, b: exp(a[..., None, None] * E1) @ exp(b[..., None, None] * E2), (4, 3))
    fine = refine(base, 3)
    assert fine.resolution == (12, 9)
    assert np.array_equal(fine.samples[::3, ::3], base.samples)
    # one edge checked against its geodesic
    mid = geodesic(base.samples[1, 0], base.samples[2, 0], [1 / 3])
    assert np.allclose(fine.samples[4, 0], mid[0], atol=1e-14)
    assert refine(base, 1) is base
    with pytest.raises(StructureError):
        refine(base, 0)


def test_refine_path_composition_is_exact_on_subgroups():
    p = sample_path(lambda t: exp(t[:, None, None] * 1.3 * E2), 4)
    a = refine(refine(p, 2), 3)
    b = refine(p, 6)
    assert np.max(np.abs(a.samples - b.samples)) < 1e-14


def test_concat_checks_and_seams():
    a = sample_path(lambda t: exp(t[:, None, None] * E1), 4)
    b = sample_path(lambda t: exp((1 + t)[:, None, None] * E1), 6)
    c = concat([a, b])
    assert c.resolution == (10,) and c.seams == ((4,),)
    bad = sample_path(lambda t: exp((1.1 + t)[:, None, None] * E1), 6)
    with pytest.raises(StructureError):
        concat([a, bad])


def test_coarsen_and_reverse():
    sq = sample_square(lambda a, b: exp((a + 2 * b)[..., None, None] * E3), 8)
    co = sq.coarsen(4)
    assert co.resolution == (2, 2) and np.array_equal(co.samples, sq.samples[::4, ::4])
    with pytest.raises(StructureError):
        sq.coarsen(3)
    assert np.array_equal(sq.reversed(1).samples, sq.samples[:, ::-1])


def test_mesh_json_round_trip():
    setup = genus_one_setup(0)
    hh = setup.homotopy(4)
    for m in (hh.h, hh.H, geodesic_path(list(SPEC.random_element(rng(3), (3,))), 2)):
        back = jsonio.mesh_from_json(jsonio.mesh_to_json(m))
        assert type(back) is type(m)
        assert np.array_equal(back.samples, m.samples)
        assert back.seams == m.seams and back.tuple_valued == m.tuple_valued
    with pytest.raises(StructureError):
        jsonio.mesh_from_json({"kind": "blob"})


# -- strings and homotopies ------------------------------------------------------


def test_string_from_path_is_valid():
    data = MapData.relator(1)
    w = geodesic_path([data.basepoint, SPEC.random_element(rng(4), (2,))], 8)
    s = string_from_path(w, data)
    rep = validate_string(s, data)
    assert rep.passed, rep.failures()
    # constant in s; its top edge lies over f(w)
    assert np.array_equal(s.top.samples, data.f(w.samples))


def test_string_over_hits_top_edge():
    setup = genus_one_setup(1)
    s1 = setup.string(1, 8)
    s2 = string_over(s1.w, s1.top, setup.data)
    assert np.array_equal(s2.top.samples, s1.top.samples)
    assert validate_string(s2, setup.data).passed


@pytest.mark.parametrize("key", ["w_based", "left_edge", "bottom_edge", "right_edge_constant"])
def test_string_validator_flags_single_perturbation(key):
    setup = genus_one_setup(0)
    s = setup.string(1, 8)
    w, phi = s.w.samples.copy(), s.phi.samples.copy()
    eps = 1e-6
    bump = exp(eps * E1)
    if key == "w_based":
        w[0, 0] = w[0, 0] @ bump
    elif key == "left_edge":
        phi[0, 3] = phi[0, 3] @ bump
    elif key == "bottom_edge":
        phi[4, 0] = phi[4, 0] @ bump
    else:
        phi[-1, 5] = phi[-1, 5] @ bump
    bad = StringCD1(PathMesh(w, SPEC, tuple_valued=True), SquareMesh(phi, SPEC))
    rep = validate_string(bad, setup.data)
    assert not rep.passed
    assert key in rep.failures()
    assert rep.defects[key] <= 2 * eps


def test_homotopy_validator():
    setup = genus_one_setup(0)
    hh = setup.homotopy(8, detour=1.0, with_bubble=True)
    rep = validate_homotopy(hh, setup.data, start=setup.string(1, 8), end=setup.string(2, 8))
    assert rep.passed, rep.failures()
    H = hh.H.samples.copy()
    H[3, 2, 1] = H[3, 2, 1] @ exp(1e-5 * E2)
    H[3, 0, 1] = H[3, 0, 1] @ exp(1e-5 * E2)
    bad = HomotopyCD11(hh.h, CubeMesh(H, SPEC))
    rep = validate_homotopy(bad, setup.data)
    assert set(rep.failures()) == {"compatibility"}


def test_homotopy_reverse_swaps_ends():
    setup = genus_one_setup(0)
    hh = setup.homotopy(4)
    rev = hh.reversed()
    assert np.array_equal(rev.start().phi.samples, hh.end().phi.samples)
    assert np.array_equal(rev.end().w.samples, hh.start().w.samples)


def test_conjugated_mesh():
    g = SPEC.random_element(rng(5))
    m = sample_path(lambda t: exp(t[:, None, None] * E1), 3)
    c = m.conjugated(g)
    assert np.allclose(c.samples, g @ m.samples @ dagger(g))
