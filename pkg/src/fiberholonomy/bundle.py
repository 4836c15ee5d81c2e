"""Points and tangents of the homotopy fiber ``P_f``, its 2-forms, and holonomy.

A fiber point is ``(q, u)`` with ``q`` a point of ``M`` (a tuple in ``K^m``)
and ``u`` a path mesh in ``K`` from ``f(o)`` to ``f(q)``. A tangent is
``(v_q, V)``: a left-trivialized tuple tangent at ``q`` and a left-trivialized
field along ``u`` with ``V(0) = 0`` and ``V(1) = df(v_q)``.

The holonomy exponent of a family of strings is
``A = int_{I^3} H^* lambda - int_{I^2} h^* zeta``; its class modulo integers
is the circle value ``exp(2 pi i A)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lie import GroupSpec, StructureError, adjoint, dagger, exp
from .mesh import (
    MESH_TOL,
    STEP_BOUND,
    CubeMesh,
    HomotopyCD11,
    PathMesh,
    SquareMesh,
    StringCD1,
    concat,
    validate_homotopy,
    validate_string,
)
from .quadrature import (
    PeriodReport,
    integer_snap,
    integrate_2form,
    integrate_3form,
    richardson,
)
from .words import ClassForm, WordForm, conjugation_field, parse_word, relator_word

__all__ = [
    "MapData",
    "FiberPoint",
    "FiberTangent",
    "fiber_point",
    "fiber_chart",
    "beta_lambda",
    "zeta_fiber",
    "fundamental_tangent",
    "homotopy_exponent",
    "holonomy",
    "HolonomyReport",
    "compare_homotopies",
    "relative_period",
    "relative_period_report",
    "boundary_faces",
    "juxtapose",
    "is_loop_string",
]


@dataclass(frozen=True)
class MapData:
    """The map ``f: M -> K`` with its primitive ``zeta`` (``d zeta = f^* lambda``).

    ``form`` is a compiled word (``M = K^m``, conjugation action) or a
    conjugacy-class inclusion (``M = K`` acting by left multiplication on the
    parameter ``g`` of ``Ad_g h``).
    """

    form: object
    basepoint: np.ndarray = None

    def __post_init__(self):
        if self.basepoint is None:
            object.__setattr__(self, "basepoint", self.spec.identity((self.form.arity,)))
        object.__setattr__(self, "basepoint", np.asarray(self.basepoint, dtype=complex))

    @classmethod
    def word(cls, src, spec=None, **kwargs):
        spec = spec or GroupSpec()
        w = relator_word(src) if isinstance(src, int) else parse_word(src) if isinstance(src, str) else src
        return cls(WordForm(w, spec, **kwargs))

    @classmethod
    def relator(cls, genus, spec=None, **kwargs):
        return cls.word(int(genus), spec, **kwargs)

    @classmethod
    def conjugacy_class(cls, h, spec=None, sign=None):
        spec = spec or GroupSpec()
        form = ClassForm(h, spec) if sign is None else ClassForm(h, spec, sign)
        return cls(form)

    @property
    def spec(self):
        return self.form.spec

    @property
    def arity(self):
        return self.form.arity

    @property
    def is_class(self):
        return isinstance(self.form, ClassForm)

    def scaled(self, factor):
        """The same data with the metric scaled by ``factor``."""
        from dataclasses import replace

        return MapData(replace(self.form, spec=self.spec.scaled(factor)), self.basepoint)

    def f(self, points):
        return self.form.value(points)

    def df(self, point, tangent):
        return self.form.differential(point, tangent)

    def zeta(self, point, t1, t2):
        return self.form.zeta(point, t1, t2)

    def lam(self, g, x, y, z):
        """The Cartan 3-form; bi-invariant, so the base point is not used."""
        return self.spec.cartan3(x, y, z)

    @property
    def fo(self):
        return self.f(self.basepoint)

    def fundamental(self, point, x):
        """Left-trivialized fundamental field of ``X`` on ``M``."""
        if self.is_class:
            g = np.asarray(point)
            x = np.asarray(x)
            if x.ndim == g.ndim - 1:
                x = x[..., None, :, :]
            return adjoint(dagger(g), x)
        return conjugation_field(point, x)

    def act(self, g, point):
        """The ``K``-action on ``M``."""
        if self.is_class:
            return g @ point
        return g @ point @ dagger(g)


# ---------------------------------------------------------------------------
# fiber points and tangents


@dataclass(frozen=True)
class FiberPoint:
    q: np.ndarray
    u: PathMesh

    def check(self, data, tol=MESH_TOL):
        d = float(np.max(np.abs(self.u.end - data.f(self.q))))
        d0 = float(np.max(np.abs(self.u.start - data.fo)))
        if max(d, d0) > tol:
            raise StructureError(f"not a fiber point: endpoint defects {d0:.3g}, {d:.3g}")
        return self

    def conjugated(self, g, data):
        """Image under ``g in K``: ``(g.q, g u g^-1)``."""
        return FiberPoint(data.act(g, self.q), self.u.conjugated(g))


@dataclass(frozen=True)
class FiberTangent:
    vq: np.ndarray
    V: np.ndarray

    def check(self, p, data, tol=MESH_TOL):
        if self.V.shape != p.u.samples.shape:
            raise StructureError("field length does not match the path")
        d0 = float(np.max(np.abs(self.V[0])))
        d1 = float(np.max(np.abs(self.V[-1] - data.df(p.q, self.vq))))
        if max(d0, d1) > tol:
            raise StructureError(f"not a fiber tangent: defects {d0:.3g}, {d1:.3g}")
        return self

    def __add__(self, other):
        return FiberTangent(self.vq + other.vq, self.V + other.V)

    def __mul__(self, k):
        return FiberTangent(k * self.vq, k * self.V)

    __rmul__ = __mul__


def fiber_point(s, data, tol=MESH_TOL):
    """``(w(1), phi(., 1))`` for a valid string."""
    rep = validate_string(s, data, tol)
    if not rep.passed:
        raise StructureError(f"invalid string: {rep.failures()}")
    return FiberPoint(s.w.end, s.top)


def fundamental_tangent(p, x, data):
    """``X_P``: the fundamental field at ``q`` and ``Ad_{u^-1} X - X`` along ``u``."""
    return FiberTangent(data.fundamental(p.q, x), conjugation_field(p.u.samples, x))


def fiber_chart(p, tangents):
    """Chart ``s -> (q exp(sum s_i v_i), u exp(sum s_i V_i))`` with exact coordinate tangents.

    Points off ``P_f`` (the endpoint condition holds to second order) are
    allowed; they are only fed to formulas defined on the ambient path space.
    """
    from .lie import dexp

    def chart(s):
        vq = sum(si * t.vq for si, t in zip(s, tangents))
        vu = sum(si * t.V for si, t in zip(s, tangents))
        q = p.q @ exp(vq)
        u = PathMesh(p.u.samples @ exp(vu), p.u.spec, seams=p.u.seams)
        tans = [FiberTangent(dexp(vq, t.vq), dexp(vu, t.V)) for t in tangents]
        return FiberPoint(q, u), tans

    return chart


# ---------------------------------------------------------------------------
# 2-forms


def beta_lambda(u, V, W, spec=None):
    """``beta_lambda = eta(lambda)``: ``sum_i lambda(D_i, V_mid, W_mid)``.

    ``u`` is a path mesh or a raw sample array; fields are averaged over the
    two ends of each edge.
    """
    if isinstance(u, PathMesh):
        spec = spec or u.spec
        steps = u.edge_logs(0)
    else:
        from .lie import log

        u = np.asarray(u)
        steps = log(dagger(u[:-1]) @ u[1:])
    spec = spec or GroupSpec()
    V, W = np.asarray(V), np.asarray(W)
    if V.shape != W.shape or V.shape[0] != steps.shape[0] + 1:
        raise StructureError("fields must have one value per sample")
    vm = 0.5 * (V[:-1] + V[1:])
    wm = 0.5 * (W[:-1] + W[1:])
    import math

    return math.fsum(spec.cartan3(steps, vm, wm).tolist())


def zeta_fiber(p, t1, t2, data):
    """``j_f^* beta_lambda - pi_f^* zeta`` at ``p``."""
    return beta_lambda(p.u, t1.V, t2.V, data.spec) - float(data.zeta(p.q, t1.vq, t2.vq))


# ---------------------------------------------------------------------------
# holonomy


def homotopy_exponent(h, H, data, workers=1):
    """``int H^* lambda - int h^* zeta`` with ``H`` on ``(t1, t2, s)`` and ``h`` on ``(t1, s)``."""
    a = integrate_3form(H, data.lam, workers)
    b = integrate_2form(h, data.zeta)
    return a - b


def _ladder(hh):
    """Sub-resolutions of a single mesh pair usable for Richardson: ``N/4, N/2, N``."""
    n = hh.H.resolution
    if min(n) >= 16 and all(k % 4 == 0 for k in n + hh.h.resolution):
        return [HomotopyCD11(hh.h.coarsen(k), hh.H.coarsen(k)) for k in (4, 2, 1)]
    return None


@dataclass(frozen=True)
class HolonomyReport:
    A: float
    resolutions: tuple
    values: tuple
    error_est: float
    order: float
    order_reliable: bool
    closed: bool
    snap: object = None
    validation: dict = field(default_factory=dict)

    @property
    def circle(self):
        return complex(np.exp(2j * np.pi * self.A))

    @property
    def passed(self):
        return self.snap.passed if self.snap is not None else True

    def to_json(self):
        z = self.circle
        out = {
            "value": self.A,
            "error_est": self.error_est,
            "order": None if not np.isfinite(self.order) else self.order,
            "order_reliable": self.order_reliable,
            "circle": [z.real, z.imag],
            "closed": self.closed,
            "resolutions": list(self.resolutions),
            "values": list(self.values),
        }
        if self.snap is not None:
            out["snap"] = self.snap.to_json()
        if self.validation:
            out["validation"] = self.validation
        return out


def _strings_equal(hh, tol):
    a, b = hh.start(), hh.end()
    return (
        float(np.max(np.abs(a.w.samples - b.w.samples))) <= tol
        and float(np.max(np.abs(a.phi.samples - b.phi.samples))) <= tol
    )


def holonomy(family, data, resolutions=None, *, tol=1e-2, mesh_tol=MESH_TOL, workers=1,
             step_bound=STEP_BOUND, validate=True, nominal_order=2.0):
    """Holonomy exponent and circle value for a homotopy of strings.

    ``family`` is either a :class:`HomotopyCD11` (extrapolated from its own
    ``N/4, N/2`` coarsenings when the resolution allows) or a callable
    ``N -> HomotopyCD11`` evaluated on ``resolutions``. The snap report is
    attached when the two boundary strings coincide.
    """
    if callable(family):
        if resolutions is None:
            raise StructureError("a homotopy family needs a resolution ladder")
        meshes = [family(n) for n in resolutions]
    else:
        ladder = _ladder(family)
        meshes = ladder if ladder is not None else [family]
        resolutions = [m.H.resolution[0] for m in meshes]
    finest = meshes[-1]
    validation = {}
    if validate:
        rep = validate_homotopy(finest, data, mesh_tol)
        validation = rep.to_json()
        if not rep.passed:
            raise StructureError(f"invalid homotopy: {rep.failures()}")
        if finest.H.max_step() > step_bound or finest.h.max_step() > step_bound:
            raise StructureError(f"mesh step exceeds step bound {step_bound:.4g} at N={finest.H.resolution}")
    values = tuple(homotopy_exponent(m.h, m.H, data, workers) for m in meshes)
    if len(values) == 3:
        ex = richardson(values, resolutions, nominal_order)
        A, err, order, reliable = ex.value, ex.error_est, ex.order, ex.reliable
    else:
        A, err, order, reliable = values[-1], float("nan"), float("nan"), False
    closed = _strings_equal(finest, mesh_tol)
    snap = integer_snap(A, tol) if closed else None
    return HolonomyReport(A, tuple(int(r) for r in np.ravel(resolutions)), values, err, order, reliable,
                          closed, snap, validation)


def compare_homotopies(rep1, rep2, tol=1e-2):
    """Integer snap of ``A1 - A2`` for two homotopies between the same strings."""
    return integer_snap(rep1.A - rep2.A, tol)


# ---------------------------------------------------------------------------
# relative periods


def boundary_faces(c):
    """The six faces of a cube mesh as ``(sign, square mesh)``, oriented as the outward boundary."""
    s = c.samples
    kw = dict(tuple_valued=c.tuple_valued)
    faces = []
    # x1 = 1 is oriented by (x2, x3); the other faces follow by cyclic symmetry
    for axis in range(3):
        a, b = (axis + 1) % 3, (axis + 2) % 3
        for end, sign in ((-1, 1), (0, -1)):
            face = np.take(s, end, axis=axis)
            # remaining axes of the face come in increasing order; reorder to (a, b)
            rem = [k for k in range(3) if k != axis]
            if rem != [a, b]:
                face = np.swapaxes(face, 0, 1)
            faces.append((sign, SquareMesh(face, c.spec, **kw)))
    return faces


def relative_period(h, H, data, tol=1e-2, mesh_tol=MESH_TOL, workers=1):
    """``int_C H^* lambda - int_{dC} h^* zeta`` with an integer snap.

    ``h`` is a cube mesh into ``M`` of which only the boundary faces enter;
    ``f o h`` must agree with ``H`` on the boundary of the cube.
    """
    if not isinstance(h, CubeMesh) or not isinstance(H, CubeMesh):
        raise StructureError("relative periods need cube meshes for h and H")
    if h.grid_shape != H.grid_shape:
        raise StructureError("h and H must share the grid")
    defect = 0.0
    for (_, fh), (_, fH) in zip(boundary_faces(h), boundary_faces(H)):
        defect = max(defect, float(np.max(np.abs(data.f(fh.samples) - fH.samples))))
    if defect > mesh_tol:
        raise StructureError(f"boundary incompatibility {defect:.3g}")
    vol = integrate_3form(H, data.lam, workers)
    bdry = sum(sign * integrate_2form(face, data.zeta) for sign, face in boundary_faces(h))
    value = vol - bdry
    return value, integer_snap(value, tol)


def relative_period_report(family, data, resolutions, tol=1e-2, workers=1):
    """Relative period on a ladder ``N -> (h, H)`` with Richardson extrapolation."""
    values = tuple(relative_period(*family(n), data, tol=tol, workers=workers)[0] for n in resolutions)
    ex = richardson(values, resolutions, nominal_order=2.0)
    return PeriodReport(tuple(resolutions), values, ex, integer_snap(ex.value, tol))


# ---------------------------------------------------------------------------
# juxtaposition


def is_loop_string(s, data, tol=MESH_TOL):
    return validate_string(s, data, tol, loop=True)


def juxtapose(s, loop, data, tol=MESH_TOL):
    """Glue a loop-type string before ``s`` along the first parameter.

    The loop must be closed at ``o`` with ``phi = f(o)`` on its left, right and
    top edges. The result is the concatenation on the doubled first-parameter
    range (affinely reparameterized onto ``I``), with the seam recorded.
    """
    rep = is_loop_string(loop, data, tol)
    if not rep.passed:
        raise StructureError(f"not a loop string: {rep.failures()}")
    if loop.phi.grid_shape[1] != s.phi.grid_shape[1]:
        raise StructureError("loop and string need the same s-resolution")
    w = concat([loop.w, s.w], axis=0, tol=tol)
    phi = concat([loop.phi, s.phi], axis=0, tol=tol)
    return StringCD1(w, phi)
