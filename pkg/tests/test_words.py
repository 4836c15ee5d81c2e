import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fiberholonomy.calculus import exterior_derivative, group_chart, refinement_orders
from fiberholonomy.identities import d_zeta_residuals, equivariant_residuals
from fiberholonomy.lie import GroupSpec, StructureError, adjoint, dagger, exp, su2_basis
from fiberholonomy.words import (
    CLASS_SIGN,
    COCYCLE_PAIRING,
    COCYCLE_SIGN,
    ClassForm,
    Word,
    WordForm,
    WordSyntaxError,
    calibrate_class_sign,
    calibrate_cocycle,
    conjugacy_class_data,
    conjugation_field,
    delta_equivariant,
    eval_word,
    parse_word,
    relator_word,
    word_differential,
    zeta_eval,
)

SPEC = GroupSpec()


def rng(seed=0):
    return np.random.Generator(np.random.Philox(seed))


# -- parsing ------------------------------------------------------------------


def test_parse_examples():
    w = parse_word("a1")
    assert w.letters == ((1, 1),) and w.degree_vector.tolist() == [1, 0]
    w = parse_word("[a1,b1]")
    assert w.letters == ((1, 1), (2, 1), (1, -1), (2, -1))
    assert w.degree_vector.tolist() == [0, 0]
    w = parse_word("[a1,b1][a2,b2]")
    assert len(w) == 8 and w.arity == 4 and w.degree_vector.tolist() == [0, 0, 0, 0]
    assert w == relator_word(2)
    assert parse_word("x1 x2^-1 x3").letters == ((1, 1), (2, -1), (3, 1))
    assert parse_word("[a1,b1]^-1") == parse_word("[a1,b1]").inverse()


def test_parse_reduces():
    assert parse_word("x1 x2 x2^-1 x1^-1 x3").letters == ((3, 1),)
    assert parse_word("x1 x1^-1", arity=2).letters == ()


@pytest.mark.parametrize(
    "src,pos",
    [("", 0), ("   ", 0), ("a1 $", 3), ("[a1,b1", 6), ("[a1 b1]", 6), ("c1", 0), ("a0", 0), ("x1 ]", 3), ("^-1", 0)],
)
def test_parse_errors_with_position(src, pos):
    with pytest.raises(WordSyntaxError) as info:
        parse_word(src)
    assert info.value.position == pos


def test_word_invariants():
    with pytest.raises(StructureError):
        Word(((3, 1),), 2)
    with pytest.raises(StructureError):
        Word(((1, 2),), 2)
    with pytest.raises(StructureError):
        parse_word("x3", arity=2)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 4), st.sampled_from([1, -1])), max_size=12),
       st.lists(st.tuples(st.integers(1, 4), st.sampled_from([1, -1])), max_size=12))
def test_degree_additivity(a, b):
    u, v = Word(tuple(a), 4), Word(tuple(b), 4)
    assert np.array_equal((u * v).degree_vector, u.degree_vector + v.degree_vector)
    assert np.array_equal(u.inverse().degree_vector, -u.degree_vector)
    wf = WordForm(u * v, SPEC)
    assert np.array_equal(wf.degree_vector, (u * v).degree_vector)


def test_plan_json():
    wf = WordForm.from_source("x1 x2^-1")
    plan = wf.plan_json()
    assert plan["op"] == "product"
    assert plan["children"][1]["op"] == "inverse"
    assert WordForm(Word((), 1)).plan_json()["op"] == "identity"


# -- evaluation ---------------------------------------------------------------


def test_eval_examples():
    r = rng(1)
    e = np.broadcast_to(np.eye(2), (4, 2, 2))
    assert np.allclose(eval_word(relator_word(2), e), np.eye(2))
    diag = exp(np.array([np.diag([1j * t, -1j * t]) for t in r.uniform(-3, 3, 4)]))
    assert np.max(np.abs(eval_word(relator_word(2), diag) - np.eye(2))) < 1e-14
    a, b = SPEC.random_element(r, (2,))
    oracle = a @ b @ dagger(a) @ dagger(b)
    assert np.max(np.abs(eval_word(parse_word("[a1,b1]"), np.stack([a, b])) - oracle)) < 1e-14
    with pytest.raises(StructureError):
        eval_word(relator_word(1), e)


def test_differential_examples_and_fd():
    r = rng(2)
    pt = SPEC.random_element(r, (4,))
    v = SPEC.random_algebra(r, (4,))
    letter = WordForm(parse_word("x3", arity=4))
    assert np.allclose(letter.differential(pt, v), v[2])
    rel = WordForm(relator_word(2))
    assert np.array_equal(rel.differential(pt, np.zeros_like(v)), np.zeros((2, 2)))
    exact = word_differential(relator_word(2), pt, v)
    res = []
    for h in (1e-3, 5e-4):
        fd = dagger(rel.value(pt)) @ (rel.value(pt @ exp(h * v)) - rel.value(pt @ exp(-h * v))) / (2 * h)
        res.append(np.max(np.abs(fd - exact)))
    assert refinement_orders([1e-3, 5e-4], res)[0] >= 1.9


def test_zeta_examples():
    r = rng(3)
    wf = WordForm(relator_word(1))
    pt = SPEC.random_element(r, (2,))
    t1, t2 = SPEC.random_algebra(r, (2, 2))
    assert zeta_eval(wf, pt, t1, t1) == 0.0
    assert zeta_eval(wf, pt, t1, t2) == pytest.approx(-zeta_eval(wf, pt, t2, t1), abs=1e-18)
    single = WordForm(parse_word("x2", arity=2))
    assert single.zeta(pt, t1, t2) == 0.0


def test_zeta_k_invariance():
    r = rng(4)
    wf = WordForm(relator_word(2))
    pt = SPEC.random_element(r, (10, 4))
    t1, t2 = SPEC.random_algebra(r, (2, 10, 4))
    g = SPEC.random_element(r, (10,))[:, None]
    conj = g @ pt @ dagger(g)
    # left-trivialized tangents transform by Ad_g as well
    lhs = wf.zeta(conj, adjoint(g, t1), adjoint(g, t2))
    assert np.max(np.abs(lhs - wf.zeta(pt, t1, t2))) <= 1e-9


def test_d_zeta_converges_genus_one_and_two():
    for genus in (1, 2):
        res, orders = d_zeta_residuals(WordForm(relator_word(genus)), seed=0, points=5)
        assert min(orders) >= 1.0 and res[-1] <= 1e-4


def test_d_zeta_nonzero_degree_defect():
    # documented defect: d zeta_w = w^* lambda - sum n_i pr_i^* lambda
    wf = WordForm(parse_word("x1 x2 x1"))
    res, orders = d_zeta_residuals(wf, seed=1, points=4)
    assert min(orders) >= 1.0 and res[-1] <= 1e-4


def test_equivariant_identities_relator():
    out = equivariant_residuals(WordForm(relator_word(1)), seed=0, points=10)
    assert out["delta_lambda_plus_d_theta"] <= 1e-8
    assert out["delta_zeta_minus_w_theta"] <= 1e-12
    assert out["delta_theta"] <= 1e-14


def test_delta_equivariant():
    r = rng(5)
    g = SPEC.random_element(r)
    u, v = SPEC.random_algebra(r, (2,))

    def lam(point, a, b, c):
        return SPEC.cartan3(a, b, c)

    assert delta_equivariant(lam, 3, np.zeros((2, 2)), g, u, v) == 0.0
    x = SPEC.random_algebra(r)
    assert delta_equivariant(lam, 3, x, g, u, v) == pytest.approx(-SPEC.cartan3(conjugation_field(g, x), u, v))
    with pytest.raises(StructureError):
        delta_equivariant(lam, 3, x, g, u)

    # delta of theta vanishes: <theta(X_N), X> = 0
    def theta_x(point, a):
        return SPEC.pair(SPEC.theta(point, a), x)

    assert abs(delta_equivariant(theta_x, 1, x, g)) < 1e-16


def test_calibration_is_unique_and_hardcoded():
    choice, table = calibrate_cocycle(seed=0)
    assert choice == (COCYCLE_SIGN, COCYCLE_PAIRING)
    for key, (r0, r1) in table.items():
        if key != choice:
            assert r1 > 0.1


def test_wrong_cocycle_sign_fails():
    res, _ = d_zeta_residuals(WordForm(relator_word(1), SPEC, cocycle_sign=-COCYCLE_SIGN), points=3)
    assert res[-1] > 0.1


# -- conjugacy classes ----------------------------------------------------------


def test_class_central_is_point():
    cf = ClassForm(-np.eye(2, dtype=complex))
    r = rng(6)
    g = SPEC.random_element(r, (1,))
    t1, t2 = SPEC.random_algebra(r, (2, 1))
    assert cf.central and cf.zeta(g, t1, t2) == 0.0


def test_class_zeta_antisymmetric_and_data():
    h = exp(0.8 * su2_basis()[2])
    f, zeta, theta = conjugacy_class_data(h)
    r = rng(7)
    g = SPEC.random_element(r, (1,))
    t = SPEC.random_algebra(r, (1,))
    assert zeta(g, t, t) == 0.0
    assert np.allclose(f(g), g[0] @ h @ dagger(g[0]))


def test_class_d_zeta_su2_trivial():
    # the class is 2-dimensional in SU(2): both sides vanish identically
    cf = ClassForm(exp(0.9 * su2_basis()[2]))
    r = rng(8)
    g = SPEC.random_element(r, (1,))
    dirs = SPEC.random_algebra(r, (3, 1))
    dz = exterior_derivative(cf.zeta, group_chart(g, list(dirs)), 3, 1e-3)
    assert abs(cf.pullback_lambda(g, *dirs)) < 1e-15 and abs(dz) < 1e-8


def test_class_sign_calibration_su3():
    sign, table = calibrate_class_sign()
    assert sign == CLASS_SIGN
    r0, r1 = table[sign]
    assert np.log2(r0 / r1) >= 1.0 and r1 < 1e-4
