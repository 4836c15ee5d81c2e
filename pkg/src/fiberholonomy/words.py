"""Word calculus on products of a matrix group.

A group word over letters ``x_1..x_m`` induces a map ``w: K^m -> K``. This
module parses words, evaluates ``w`` and its left-logarithmic differential,
and evaluates a 2-form ``zeta_w`` on ``K^m`` with

    d zeta_w = w^* lambda - sum_i n_i pr_i^* lambda,

``n_i`` being the signed exponent sum of letter ``i`` and ``lambda`` the
Cartan 3-form. For words with vanishing degree vector (e.g. the surface
relator ``prod [a_j, b_j]``) this is ``d zeta_w = w^* lambda``.

``zeta_w`` is built by recursion over a compiled plan:

* a letter contributes 0,
* an inverse contributes minus the form of its argument,
* a product ``uv`` contributes ``zeta_u + zeta_v`` plus the cocycle
  ``-1/2 <u^* omega ^ v^* omega_bar>``,

where ``omega``/``omega_bar`` are the left/right Maurer-Cartan forms and
``<A ^ B>(T1, T2) = <A(T1), B(T2)> - <A(T2), B(T1)>``. The sign and the
pairing order of the cocycle were fixed by :func:`calibrate_cocycle` (see
the README); they remain parameters of :class:`WordForm` so that wrong
conventions can be exercised on purpose.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .lie import GroupSpec, StructureError, adjoint, dagger

__all__ = [
    "WordSyntaxError",
    "Word",
    "WordForm",
    "parse_word",
    "eval_word",
    "word_differential",
    "zeta_eval",
    "conjugation_field",
    "delta_equivariant",
    "calibrate_cocycle",
    "COCYCLE_SIGN",
    "COCYCLE_PAIRING",
    "CLASS_SIGN",
    "ClassForm",
    "conjugacy_class_data",
    "calibrate_class_sign",
    "relator_word",
    "compile_plan",
    "plan_to_json",
]

#: Calibrated cocycle convention (see :func:`calibrate_cocycle`).
COCYCLE_SIGN = -1
COCYCLE_PAIRING = "left_right"
_PAIRINGS = ("left_right", "right_left")


class WordSyntaxError(ValueError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


@dataclass(frozen=True)
class Word:
    """A word as a tuple of ``(index, exponent)`` pairs; indices are 1-based."""

    letters: tuple
    arity: int

    def __post_init__(self):
        for idx, ex in self.letters:
            if not 1 <= idx <= self.arity:
                raise StructureError(f"letter index {idx} outside arity {self.arity}")
            if ex not in (1, -1):
                raise StructureError(f"exponent must be +-1, got {ex}")

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        if not self.letters:
            return "1"
        return " ".join(f"x{i}" + ("^-1" if e < 0 else "") for i, e in self.letters)

    def inverse(self):
        return Word(tuple((i, -e) for i, e in reversed(self.letters)), self.arity)

    def __mul__(self, other):
        m = max(self.arity, other.arity)
        return Word(self.letters + other.letters, m).reduced()

    def reduced(self):
        """Free reduction (cancel adjacent ``x x^-1`` pairs)."""
        stack = []
        for letter in self.letters:
            if stack and stack[-1][0] == letter[0] and stack[-1][1] == -letter[1]:
                stack.pop()
            else:
                stack.append(letter)
        return Word(tuple(stack), self.arity)

    def with_arity(self, m):
        return Word(self.letters, m)

    @property
    def degree_vector(self):
        deg = np.zeros(self.arity, dtype=int)
        for i, e in self.letters:
            deg[i - 1] += e
        return deg


def relator_word(genus):
    """The surface relator ``[a1,b1]...[a_g,b_g]`` on ``2*genus`` letters."""
    return parse_word("".join(f"[a{j},b{j}]" for j in range(1, genus + 1)))


# ---------------------------------------------------------------------------
# parser

_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z]\d+)|(?P<inv>\^-1)|(?P<punct>[\[\],]))")


def _tokenize(src):
    pos = 0
    out = []
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        m = _TOKEN.match(src, pos)
        if not m:
            start = pos + len(src[pos:]) - len(src[pos:].lstrip())
            raise WordSyntaxError(f"unexpected character {src[start]!r}", start)
        start = m.start(m.lastgroup)
        out.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    out.append(("end", "", len(src)))
    return out


def _letter_index(name, pos):
    head, num = name[0], int(name[1:])
    if num < 1:
        raise WordSyntaxError(f"unknown identifier {name!r}", pos)
    if head == "a":
        return 2 * num - 1
    if head == "b":
        return 2 * num
    if head == "x":
        return num
    raise WordSyntaxError(f"unknown identifier {name!r}", pos)


class _Parser:
    def __init__(self, src):
        self.tokens = _tokenize(src)
        self.k = 0
        self.max_index = 0
        self.uses_ab = False

    def peek(self):
        return self.tokens[self.k]

    def take(self, kind, value=None):
        tok = self.peek()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value or kind
            got = tok[1] or "end of input"
            raise WordSyntaxError(f"expected {want!r}, got {got!r}", tok[2])
        self.k += 1
        return tok

    def word(self):
        letters = []
        while True:
            tok = self.peek()
            if tok[0] == "ident":
                self.k += 1
                idx = _letter_index(tok[1], tok[2])
                self.uses_ab |= tok[1][0] in "ab"
                self.max_index = max(self.max_index, idx)
                ex = 1
                if self.peek()[0] == "inv":
                    self.k += 1
                    ex = -1
                letters.append((idx, ex))
            elif tok[0] == "punct" and tok[1] == "[":
                self.k += 1
                u = self.word()
                self.take("punct", ",")
                v = self.word()
                self.take("punct", "]")
                inv = lambda w: [(i, -e) for i, e in reversed(w)]  # noqa: E731
                comm = u + v + inv(u) + inv(v)
                if self.peek()[0] == "inv":
                    self.k += 1
                    comm = inv(comm)
                letters.extend(comm)
            else:
                break
        if not letters:
            tok = self.peek()
            raise WordSyntaxError(f"expected a letter or '[', got {tok[1] or 'end of input'!r}", tok[2])
        return letters


def parse_word(src, arity=None):
    """Parse the word DSL into a freely reduced :class:`Word`.

    Grammar: ``word := term+``, ``term := atom | atom "^-1"``,
    ``atom := IDENT | "[" word "," word "]"``.
    ``a_j``/``b_j`` map to letters ``2j-1``/``2j``; ``x_k`` maps to letter ``k``.
    The commutator ``[u,v]`` expands to ``u v u^-1 v^-1``.
    """
    if not src or not src.strip():
        raise WordSyntaxError("empty word", 0)
    p = _Parser(src)
    letters = p.word()
    tok = p.peek()
    if tok[0] != "end":
        raise WordSyntaxError(f"unexpected {tok[1]!r}", tok[2])
    m = p.max_index
    if p.uses_ab and m % 2:
        m += 1
    if arity is not None:
        if arity < m:
            raise StructureError(f"word uses {m} letters but arity is {arity}")
        m = arity
    return Word(tuple(letters), m).reduced()


# ---------------------------------------------------------------------------
# compiled plans


def compile_plan(word):
    """Left-fold recursion tree over ``letter``/``inverse``/``product`` nodes."""
    plan = None
    for idx, ex in word.letters:
        node = ("letter", idx)
        if ex < 0:
            node = ("inverse", node)
        plan = node if plan is None else ("product", plan, node)
    return plan


def plan_to_json(plan):
    if plan is None:
        return {"op": "identity", "children": []}
    if plan[0] == "letter":
        return {"op": "letter", "index": plan[1], "children": []}
    return {"op": plan[0], "children": [plan_to_json(c) for c in plan[1:]]}


def _plan_degree(plan, m):
    deg = np.zeros(m, dtype=int)
    if plan is None:
        return deg
    if plan[0] == "letter":
        deg[plan[1] - 1] = 1
        return deg
    if plan[0] == "inverse":
        return -_plan_degree(plan[1], m)
    return _plan_degree(plan[1], m) + _plan_degree(plan[2], m)


def _wedge_pair(spec, p, q):
    """``<P ^ Q>(T1, T2)`` given ``P = (P(T1), P(T2))``, ``Q`` likewise."""
    return spec.inner(p[0], q[1]) - spec.inner(p[1], q[0])


def _evaluate(plan, point, tangents, spec, sign, pairing, want_zeta):
    """Return ``(value, [omega(T_k)], zeta(T_0, T_1) or None)`` for a plan node."""
    kind = plan[0]
    if kind == "letter":
        g = point[..., plan[1] - 1, :, :]
        return g, [t[..., plan[1] - 1, :, :] for t in tangents], 0.0 if want_zeta else None
    if kind == "inverse":
        g, d, z = _evaluate(plan[1], point, tangents, spec, sign, pairing, want_zeta)
        return dagger(g), [-adjoint(g, dk) for dk in d], (-z if want_zeta else None)
    gu, du, zu = _evaluate(plan[1], point, tangents, spec, sign, pairing, want_zeta)
    gv, dv, zv = _evaluate(plan[2], point, tangents, spec, sign, pairing, want_zeta)
    d = [adjoint(dagger(gv), a) + b for a, b in zip(du, dv)]
    z = None
    if want_zeta:
        if pairing == "left_right":
            coc = _wedge_pair(spec, du, [adjoint(gv, b) for b in dv])
        else:
            coc = _wedge_pair(spec, [adjoint(gu, a) for a in du], dv)
        z = zu + zv + sign * 0.5 * coc
    return gu @ gv, d, z


@dataclass(frozen=True)
class WordForm:
    """A compiled word: evaluator for ``w``, its differential, and ``zeta_w``."""

    word: Word
    spec: GroupSpec = field(default_factory=GroupSpec)
    cocycle_sign: int = COCYCLE_SIGN
    pairing: str = COCYCLE_PAIRING

    def __post_init__(self):
        if self.cocycle_sign not in (1, -1):
            raise StructureError("cocycle_sign must be +-1")
        if self.pairing not in _PAIRINGS:
            raise StructureError(f"pairing must be one of {_PAIRINGS}")
        object.__setattr__(self, "word", self.word.reduced())

    @classmethod
    def from_source(cls, src, spec=None, **kwargs):
        return cls(parse_word(src), spec or GroupSpec(), **kwargs)

    @property
    def plan(self):
        return compile_plan(self.word)

    @property
    def arity(self):
        return self.word.arity

    @property
    def degree_vector(self):
        deg = _plan_degree(self.plan, self.arity)
        assert np.array_equal(deg, self.word.degree_vector)
        return deg

    def plan_json(self):
        return plan_to_json(self.plan)

    def _check(self, point, *tangents):
        point = np.asarray(point)
        if point.ndim < 3 or point.shape[-3] != self.arity:
            raise StructureError(f"expected an arity-{self.arity} tuple, got shape {point.shape}")
        for t in tangents:
            if np.shape(t)[-3:] != point.shape[-3:]:
                raise StructureError("tangent does not match the base point")
        return point

    def _run(self, point, tangents, want_zeta):
        point = self._check(point, *tangents)
        if self.plan is None:
            shape = point.shape[:-3]
            eye = self.spec.identity(shape)
            zero = np.zeros((*shape, self.spec.n, self.spec.n), dtype=complex)
            return eye, [zero for _ in tangents], (np.zeros(shape) if want_zeta else None)
        return _evaluate(self.plan, point, tangents, self.spec, self.cocycle_sign, self.pairing, want_zeta)

    def value(self, point):
        return self._run(point, [], False)[0]

    __call__ = value

    def differential(self, point, tangent):
        return self._run(point, [tangent], False)[1][0]

    def zeta(self, point, t1, t2):
        return self._run(point, [t1, t2], True)[2]

    def pullback_lambda(self, point, t1, t2, t3):
        """``(w^* lambda - sum n_i pr_i^* lambda)`` on three tuple tangents."""
        _, d, _ = self._run(point, [t1, t2, t3], False)
        total = self.spec.cartan3(*d)
        for i, n in enumerate(self.degree_vector):
            if n:
                total = total - n * self.spec.cartan3(t1[..., i, :, :], t2[..., i, :, :], t3[..., i, :, :])
        return total


def eval_word(w, point, spec=None):
    return WordForm(w, spec or GroupSpec()).value(point)


def word_differential(w, point, tangent, spec=None):
    return WordForm(w, spec or GroupSpec()).differential(point, tangent)


def zeta_eval(wf, point, t1, t2):
    return wf.zeta(point, t1, t2)


# ---------------------------------------------------------------------------
# equivariant operator


def conjugation_field(point, x):
    """Fundamental field of conjugation, left-trivialized: ``Ad_{g^-1} X - X`` per factor."""
    point = np.asarray(point)
    x = np.asarray(x)
    if point.ndim >= 3 and x.ndim == point.ndim - 1:
        x = x[..., None, :, :]
    return adjoint(dagger(point), x) - x


def delta_equivariant(form, degree, x, point, *tangents, field=conjugation_field):
    """``delta_G(form)(X) = -i_{X_N} form`` evaluated on ``degree - 1`` tangents.

    ``form(point, *tangents)`` has form degree ``degree``; ``field`` maps
    ``(point, X)`` to the left-trivialized fundamental tangent.
    """
    if len(tangents) != degree - 1:
        raise StructureError(f"a {degree}-form needs {degree - 1} extra tangents, got {len(tangents)}")
    return -form(point, field(point, x), *tangents)


# ---------------------------------------------------------------------------
# calibration


def calibrate_cocycle(seed=0, points=10, steps=(1e-2, 5e-3), spec=None):
    """Enumerate the four cocycle conventions and pick the one with ``d zeta = w^* lambda``.

    Uses the genus-1 relator on ``points`` random SU(2) pairs and the
    central-difference exterior derivative at two steps. A convention
    qualifies when its residual shrinks under step halving (observed order
    at least 1) and ends below ``1e-4``. Returns ``(choice, table)`` where
    ``table`` maps ``(sign, pairing)`` to the pair of max residuals.
    """
    from .calculus import exterior_derivative, group_chart

    spec = spec or GroupSpec("SU", 2)
    rng = np.random.Generator(np.random.Philox(seed))
    word = parse_word("a1 b1 a1^-1 b1^-1")
    base = spec.random_element(rng, (points, 2))
    dirs = spec.random_algebra(rng, (points, 3, 2))
    table = {}
    for sign in (1, -1):
        for pairing in _PAIRINGS:
            wf = WordForm(word, spec, sign, pairing)
            res = []
            for h in steps:
                worst = 0.0
                for k in range(points):
                    chart = group_chart(base[k], [dirs[k, j] for j in range(3)])
                    dz = exterior_derivative(wf.zeta, chart, 3, h)
                    exact = wf.pullback_lambda(base[k], *dirs[k])
                    worst = max(worst, abs(float(dz - exact)))
                res.append(worst)
            table[(sign, pairing)] = tuple(res)
    good = [
        key
        for key, (r0, r1) in table.items()
        if r1 < 1e-4 and r1 > 0 and np.log(r0 / r1) / np.log(steps[0] / steps[1]) >= 1.0
    ]
    return (good[0] if len(good) == 1 else None), table


# ---------------------------------------------------------------------------
# conjugacy classes

#: Calibrated sign of the conjugacy-class 2-form (see :func:`calibrate_class_sign`).
CLASS_SIGN = 1


@dataclass(frozen=True)
class ClassForm:
    """Inclusion of the conjugacy class of ``h``, pulled back along ``g -> g h g^-1``.

    Points of the class are parameterized as ``Ad_g h`` and stored as the
    1-tuple ``(g,)``; tangents are left-trivialized tangents ``Y`` at ``g``,
    which generate the class tangent through ``X = Ad_g Y``. The 2-form is

        zeta_C(X1, X2) = sign/2 (<X1, Ad_a X2> - <X2, Ad_a X1>),   a = Ad_g h,

    and it vanishes identically when ``h`` is central (the class is a point).
    """

    h: np.ndarray
    spec: GroupSpec = field(default_factory=GroupSpec)
    sign: int = CLASS_SIGN

    arity = 1

    def __post_init__(self):
        object.__setattr__(self, "h", np.asarray(self.h, dtype=complex))
        self.spec.check_group(self.h)

    @property
    def central(self):
        b = self.spec.basis()
        return bool(np.max(np.abs(adjoint(self.h, b) - b)) < 1e-12)

    @property
    def degree_vector(self):
        return np.zeros(1, dtype=int)

    def value(self, point):
        g = np.asarray(point)[..., 0, :, :]
        return g @ self.h @ dagger(g)

    __call__ = value

    def differential(self, point, tangent):
        g = np.asarray(point)[..., 0, :, :]
        y = np.asarray(tangent)[..., 0, :, :]
        return adjoint(g, adjoint(dagger(self.h), y) - y)

    def zeta_generators(self, a, x1, x2):
        """The class 2-form at ``a`` on the tangents generated by ``x1, x2``."""
        if self.central:
            return np.zeros(np.broadcast_shapes(np.shape(x1)[:-2], np.shape(a)[:-2]))
        s = self.spec
        return self.sign * 0.5 * (s.inner(x1, adjoint(a, x2)) - s.inner(x2, adjoint(a, x1)))

    def zeta(self, point, t1, t2):
        g = np.asarray(point)[..., 0, :, :]
        a = g @ self.h @ dagger(g)
        return self.zeta_generators(a, adjoint(g, t1[..., 0, :, :]), adjoint(g, t2[..., 0, :, :]))

    def pullback_lambda(self, point, t1, t2, t3):
        return self.spec.cartan3(*(self.differential(point, t) for t in (t1, t2, t3)))

    def theta_pullback(self, point, tangent, x):
        """``<theta(f(q), df(v)), X>``: the restriction of theta to the class."""
        return self.spec.pair(self.spec.theta(self.value(point), self.differential(point, tangent)), x)


def conjugacy_class_data(h, spec=None):
    """Return ``(f, zeta_C, theta restricted)`` for the conjugacy class of ``h``."""
    form = ClassForm(h, spec or GroupSpec())
    return form.value, form.zeta, form.theta_pullback


def calibrate_class_sign(seed=0, points=6, steps=(1e-2, 5e-3)):
    """Fix the sign of the class 2-form by ``d zeta_C = f^* lambda`` on a regular SU(3) class.

    On SU(2) every class has dimension at most 2, so both signs pass there;
    SU(3) regular classes are 6-dimensional and separate them.
    """
    from .calculus import exterior_derivative, group_chart
    from .lie import exp

    spec = GroupSpec("SU", 3)
    rng = np.random.Generator(np.random.Philox(seed))
    h = exp(np.diag([0.7j, 0.2j, -0.9j]))
    base = spec.random_element(rng, (points, 1))
    dirs = spec.random_algebra(rng, (points, 3, 1))
    table = {}
    for sign in (1, -1):
        cf = ClassForm(h, spec, sign)
        res = []
        for step in steps:
            worst = 0.0
            for k in range(points):
                chart = group_chart(base[k], list(dirs[k]))
                dz = exterior_derivative(cf.zeta, chart, 3, step)
                worst = max(worst, abs(float(dz - cf.pullback_lambda(base[k], *dirs[k]))))
            res.append(worst)
        table[sign] = tuple(res)
    good = [s for s, (r0, r1) in table.items() if r1 < 1e-4 and r0 / max(r1, 1e-300) >= 2.0]
    return (good[0] if len(good) == 1 else None), table
