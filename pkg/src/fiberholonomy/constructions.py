"""Analytic test families: period cubes, degree-one bubbles, strings and loops.

Every family is a function of the resolution, so refinement ladders and
Richardson extrapolation apply uniformly. All samplers are vectorized over
grids built with ``indexing="ij"``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bundle import FiberPoint, FiberTangent, MapData
from .lie import GroupSpec, StructureError, dagger, exp, log, su2_basis
from .mesh import CubeMesh, HomotopyCD11, PathMesh, SquareMesh, StringCD1, sample_cube

__all__ = [
    "hopf_element",
    "period_cube",
    "bubble",
    "bubble_cube",
    "canonical_square",
    "canonical_cube",
    "GenusOneSetup",
    "genus_one_setup",
    "curvature_loop",
    "sphere_square",
    "orbit_form",
    "stokes_cube_pair",
    "bubble_cube_pair",
]


def _ax(t):
    return np.asarray(t, dtype=float)[..., None, None]


# ---------------------------------------------------------------------------
# fundamental cycles


def hopf_element(psi, al, be, n=2):
    """``[[cos psi e^{i al}, sin psi e^{i be}], [-sin psi e^{-i be}, cos psi e^{-i al}]]``.

    Embedded in the top-left block for ``n > 2``.
    """
    psi, al, be = np.broadcast_arrays(psi, al, be)
    g = np.zeros(psi.shape + (n, n), dtype=complex)
    for k in range(2, n):
        g[..., k, k] = 1.0
    g[..., 0, 0] = np.cos(psi) * np.exp(1j * al)
    g[..., 0, 1] = np.sin(psi) * np.exp(1j * be)
    g[..., 1, 0] = -np.sin(psi) * np.exp(-1j * be)
    g[..., 1, 1] = np.cos(psi) * np.exp(-1j * al)
    return g


def period_cube(n, spec=None):
    """A degree-one cube over SU(2) (positively oriented), or a null cube for U(1).

    Coordinates ``(psi, beta, alpha)`` on ``[0, pi/2] x [0, 2 pi]^2``; the
    boundary collapses onto lower-dimensional sets, so the cube is a cycle.
    """
    spec = spec or GroupSpec()
    if spec.family == "U1":
        return sample_cube(lambda a, b, c: np.exp(2j * np.pi * (a + b + c))[..., None, None], n, spec)
    if spec.family != "SU":
        raise StructureError(f"no period cube shipped for {spec.family}({spec.n})")
    return sample_cube(
        lambda a, b, c: hopf_element(a * np.pi / 2, c * 2 * np.pi, b * 2 * np.pi, spec.n), n, spec
    )


def bubble(x, center=(0.5, 0.5, 0.5), radius=0.5):
    """A degree-one map ``R^3 -> SU(2)``, equal to ``e`` outside the ball.

    ``B(x) = exp(2 pi (1 - r/R) x_hat . e)`` with ``e_k = -i sigma_k / 2``;
    the sphere ``r = R`` goes to ``e`` and the centre to ``-e``.
    """
    x = np.asarray(x, dtype=float) - np.asarray(center)
    r = np.linalg.norm(x, axis=-1)
    # any axis will do at the centre, where every direction gives -e
    unit = np.where((r > 0)[..., None], x / np.where(r > 0, r, 1.0)[..., None], [0.0, 0.0, 1.0])
    angle = np.where(r < radius, 2 * np.pi * (1 - r / radius), 0.0)
    gen = np.einsum("...k,kij->...ij", unit, su2_basis())
    return exp(angle[..., None, None] * gen)


def bubble_cube(n, spec=None, **kw):
    spec = spec or GroupSpec()
    return sample_cube(lambda a, b, c: bubble(np.stack([a, b, c], -1), **kw), n, spec)


# ---------------------------------------------------------------------------
# canonical strings


def canonical_square(fw, u, n_s):
    """``phi(t, s) = f(w(t)) exp(s log(f(w(t))^-1 u(t)))`` on raw sample arrays.

    ``fw`` and ``u`` share their leading axes; ``s`` is inserted after them.
    """
    frac = np.linspace(0.0, 1.0, n_s + 1)
    step = log(dagger(fw) @ u)
    lead = fw.ndim - 2
    shape = (1,) * lead + (n_s + 1, 1, 1)
    out = fw[..., None, :, :] @ exp(frac.reshape(shape) * step[..., None, :, :])
    out[..., 0, :, :] = fw
    out[..., -1, :, :] = u
    return out


def canonical_cube(h, u, data, n_t2=None):
    """``H(t1, t2, s)`` from ``h(t1, s)`` in ``M`` and top edges ``u(t1, s)`` in ``K``."""
    n_t2 = h.shape[1] - 1 if n_t2 is None else n_t2
    fh = data.f(h)  # (t1, s, n, n)
    H = canonical_square(fh, u, n_t2)  # (t1, s, t2, n, n)
    return np.swapaxes(H, 1, 2)


# ---------------------------------------------------------------------------
# genus-one strings and homotopies


@dataclass(frozen=True)
class GenusOneSetup:
    """Two strings over the same fiber point and two schedules between them."""

    data: MapData
    q: np.ndarray
    log_q: np.ndarray
    Y: np.ndarray
    Y2: np.ndarray
    Z: np.ndarray

    def w(self, t, s=0.0, detour=0.0):
        """``w1(t) exp((s sin(pi t)) Y + detour sin(pi s) sin(pi t) Y2)`` per factor."""
        t = np.asarray(t, dtype=float)
        s = np.asarray(s, dtype=float)
        t, s = np.broadcast_arrays(t, s)
        base = exp(t[..., None, None, None] * self.log_q)
        bump = np.sin(np.pi * t)[..., None, None, None]
        gen = s[..., None, None, None] * bump * self.Y
        if detour:
            gen = gen + detour * np.sin(np.pi * s)[..., None, None, None] * bump * self.Y2
        return base @ exp(gen)

    def u(self, t):
        t = np.asarray(t, dtype=float)
        fw = self.data.f(exp(t[..., None, None, None] * self.log_q))
        return fw @ exp(np.sin(np.pi * t)[..., None, None] * self.Z)

    def string(self, which, n):
        t = np.linspace(0.0, 1.0, n + 1)
        w = self.w(t, 0.0 if which == 1 else 1.0)
        phi = canonical_square(self.data.f(w), self.u(t), n)
        spec = self.data.spec
        return StringCD1(PathMesh(w, spec, tuple_valued=True), SquareMesh(phi, spec))

    def homotopy(self, n, detour=0.0, with_bubble=False):
        t1, s = np.meshgrid(np.linspace(0, 1, n + 1), np.linspace(0, 1, n + 1), indexing="ij")
        h = self.w(t1, s, detour)
        u = np.broadcast_to(self.u(t1[:, 0])[:, None], h.shape[:2] + h.shape[-2:])
        H = canonical_cube(h, u, self.data, n)
        if with_bubble:
            H = H @ bubble_cube(n, self.data.spec).samples
        spec = self.data.spec
        return HomotopyCD11(SquareMesh(h, spec, tuple_valued=True), CubeMesh(H, spec))


def genus_one_setup(seed=0, spec=None, scale=0.35):
    """Seeded genus-one data; perturbations are small enough to stay off the cut locus."""
    spec = spec or GroupSpec()
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    data = MapData.relator(1, spec)
    m = data.arity
    log_q = spec.random_algebra(rng, (m,), 1.2)
    q = exp(log_q)
    Y = spec.random_algebra(rng, (m,), scale)
    Y2 = spec.random_algebra(rng, (m,), scale)
    Z = spec.random_algebra(rng, (), scale)
    return GenusOneSetup(data, q, log_q, Y, Y2, Z)


# ---------------------------------------------------------------------------
# small loops of fiber points


@dataclass(frozen=True)
class CurvatureLoop:
    """A two-parameter family of fiber points through ``p0`` with tangents ``T1, T2`` at ``(0, 0)``.

    ``q(a, b) = q exp(a v1 + b v2)`` and
    ``u(a, b)(t) = u0(t) exp(t log(f(q)^-1 f(q(a, b))) + sin(pi t)(a X1 + b X2))``,
    with based paths ``w(a, b)(t) = w0(t) exp(t (a v1 + b v2))`` in ``M``.
    """

    data: MapData
    log_q: np.ndarray
    Z: np.ndarray
    v: tuple
    X: tuple

    def w0(self, t):
        return exp(np.asarray(t, dtype=float)[..., None, None, None] * self.log_q)

    def u0(self, t):
        t = np.asarray(t, dtype=float)
        return self.data.f(self.w0(t)) @ exp(np.sin(np.pi * t)[..., None, None] * self.Z)

    @property
    def q(self):
        return exp(self.log_q)

    def point(self, n):
        t = np.linspace(0.0, 1.0, n + 1)
        return FiberPoint(self.q, PathMesh(self.u0(t), self.data.spec))

    def tangents(self, n):
        t = np.linspace(0.0, 1.0, n + 1)
        out = []
        for v, x in zip(self.v, self.X):
            V = t[:, None, None] * self.data.df(self.q, v) + np.sin(np.pi * t)[:, None, None] * x
            out.append(FiberTangent(v, V))
        return out

    def family(self, t, a, b):
        """``(w(a,b)(t), u(a,b)(t))`` broadcast over arrays ``t, a, b``."""
        t, a, b = np.broadcast_arrays(*(np.asarray(z, dtype=float) for z in (t, a, b)))
        A, B, T = (z[..., None, None, None] for z in (a, b, t))
        gen_q = A * self.v[0] + B * self.v[1]
        w = self.w0(t) @ exp(T * gen_q)
        fq = self.data.f(self.q)
        fqab = self.data.f(self.q @ exp(gen_q))
        end = log(dagger(fq) @ fqab)
        gen_u = t[..., None, None] * end + np.sin(np.pi * t)[..., None, None] * (
            a[..., None, None] * self.X[0] + b[..., None, None] * self.X[1]
        )
        return w, self.u0(t) @ exp(gen_u)

    def loop(self, eps, n, n_side=None, centered=True):
        """Exponent data for the counterclockwise boundary of an ``eps``-square.

        The square is ``[-eps/2, eps/2]^2`` (or ``[0, eps]^2`` with
        ``centered=False``). Returns ``(h, H)`` meshes on ``(t1, s)`` and
        ``(t1, t2, s)``; the four sides are seams of the ``s`` axis.
        """
        n_side = n if n_side is None else n_side
        r = np.linspace(0.0, 1.0, n_side + 1)
        o = 0.5 if centered else 0.0
        corners = [(-o, -o), (1 - o, -o), (1 - o, 1 - o), (-o, 1 - o), (-o, -o)]
        ab = [np.array(corners[0], dtype=float)[None]]
        for c0, c1 in zip(corners[:-1], corners[1:]):
            seg = np.array(c0)[None] + r[1:, None] * (np.array(c1) - np.array(c0))[None]
            ab.append(seg)
        ab = eps * np.concatenate(ab, 0)
        t = np.linspace(0.0, 1.0, n + 1)
        T, S = np.meshgrid(t, np.arange(ab.shape[0]), indexing="ij")
        w, u = self.family(T, ab[S, 0], ab[S, 1])
        H = canonical_cube(w, u, self.data, n)
        spec = self.data.spec
        seams = [(), [k * n_side for k in range(1, 4)]]
        h = SquareMesh(w, spec, tuple_valued=True, seams=seams)
        return h, CubeMesh(H, spec, seams=[(), (), seams[1]])


def curvature_loop(seed=0, spec=None, genus=1, scale=0.5):
    spec = spec or GroupSpec()
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    data = MapData.relator(genus, spec)
    m = 2 * genus
    log_q = spec.random_algebra(rng, (m,), 1.0)
    Z = spec.random_algebra(rng, (), 0.3)
    v = tuple(spec.random_algebra(rng, (m,), scale) for _ in range(2))
    X = tuple(spec.random_algebra(rng, (), scale) for _ in range(2))
    return CurvatureLoop(data, log_q, Z, v, X)


# ---------------------------------------------------------------------------
# spheres in a conjugacy class


def sphere_square(n, which=0, spec=None):
    """Degree-one squares ``g(t, s)`` whose orbit map ``Ad_g e3`` wraps the sphere once.

    ``which=0``: ``exp(pi t (cos 2 pi s e1 + sin 2 pi s e2))``;
    ``which=1``: ``exp(2 pi s e3) exp(pi t e1)``.
    """
    spec = spec or GroupSpec()
    e = su2_basis()

    def g0(t, s):
        gen = np.cos(2 * np.pi * s)[..., None, None] * e[0] + np.sin(2 * np.pi * s)[..., None, None] * e[1]
        return exp(np.pi * _ax(t) * gen)

    def g1(t, s):
        return exp(2 * np.pi * _ax(s) * e[2]) @ exp(np.pi * _ax(t) * e[0])

    t, s = np.meshgrid(np.linspace(0, 1, n + 1), np.linspace(0, 1, n + 1), indexing="ij")
    return SquareMesh((g0, g1)[which](t, s), spec)


def orbit_form(xi, spec=None):
    """The orbit 2-form ``<xi, [Y1, Y2]> / (2 pi c)`` on left-trivialized tangents at ``g``.

    It is the pullback of the symplectic form of the adjoint orbit through
    ``xi`` along ``g -> Ad_g xi``, normalized so that the orbit of a unit
    vector (for ``-2 tr``) has total volume one.
    """
    spec = spec or GroupSpec()
    k = 1.0 / (2 * np.pi * spec.metric_scale)

    def form(g, y1, y2):
        return k * spec.inner(xi, y1 @ y2 - y2 @ y1)

    return form


# ---------------------------------------------------------------------------
# relative cycles


def stokes_cube_pair(n, data, seed=0, scale=0.6):
    """``(h, f o h)`` for a smooth cube ``h`` in ``M``; the relative period vanishes."""
    spec = data.spec
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    m = data.arity
    base = spec.random_algebra(rng, (m,), scale)
    dirs = spec.random_algebra(rng, (3, m), scale)

    def fn(a, b, c):
        x = [a, b, c]
        gen = base + sum(np.sin(np.pi * (k + 1) * x[k])[..., None, None, None] * dirs[k] for k in range(3))
        gen2 = (a * b * c)[..., None, None, None] * dirs[0]
        return exp(gen) @ exp(gen2)

    h = sample_cube(fn, n, spec, tuple_valued=True)
    return h, CubeMesh(data.f(h.samples), spec)


def bubble_cube_pair(n, data):
    """Constant ``h = o`` with ``H`` the degree-one bubble; the relative period is one."""
    spec = data.spec
    h = np.broadcast_to(data.basepoint, (n + 1,) * 3 + data.basepoint.shape)
    H = data.fo @ bubble_cube(n, spec).samples
    return CubeMesh(h, spec, tuple_valued=True), CubeMesh(H, spec)
