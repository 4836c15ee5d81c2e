"""Discretized maps from I, I^2, I^3 into a matrix group or a product ``K^m``.

Samples live on uniform axis-aligned grids. A mesh into ``K^m`` carries an
extra arity axis (``tuple_valued=True``), so samples have shape
``(*grid, m, n, n)``; plain group-valued meshes have shape ``(*grid, n, n)``.
Meshes may be concatenations of analytic pieces; the joints are recorded as
per-axis seam indices.

Also here: the strings and homotopies of the fiber construction, their
boundary-condition validators, and constructive generators for strings.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lie import CutLocusError, GroupSpec, StructureError, dagger, exp, log, step_size

__all__ = [
    "MESH_TOL",
    "STEP_BOUND",
    "PathMesh",
    "SquareMesh",
    "CubeMesh",
    "sample_path",
    "sample_square",
    "sample_cube",
    "geodesic",
    "geodesic_path",
    "concat",
    "refine",
    "StringCD1",
    "HomotopyCD11",
    "ConstraintReport",
    "validate_string",
    "validate_homotopy",
    "string_from_path",
    "string_over",
]

MESH_TOL = 1e-8
STEP_BOUND = np.pi / 8

KINDS = {1: "path", 2: "square", 3: "cube"}


class GridMesh:
    """Samples of a map on a uniform grid; immutable after construction."""

    ndim = 0

    def __init__(self, samples, spec=None, *, tuple_valued=False, seams=None):
        samples = np.array(samples, dtype=complex)
        spec = spec or GroupSpec()
        tail = 3 if tuple_valued else 2
        if samples.ndim != self.ndim + tail:
            raise StructureError(
                f"{type(self).__name__} expects {self.ndim} grid axes, got samples of shape {samples.shape}"
            )
        if samples.shape[-2:] != (spec.n, spec.n):
            raise StructureError(f"samples are not {spec.n}x{spec.n} matrices")
        if any(d < 2 for d in samples.shape[: self.ndim]):
            raise StructureError("every grid axis needs at least two samples")
        samples.flags.writeable = False
        self.samples = samples
        self.spec = spec
        self.tuple_valued = bool(tuple_valued)
        if seams is None:
            seams = ((),) * self.ndim
        self.seams = tuple(tuple(sorted(int(i) for i in s)) for s in seams)
        if len(self.seams) != self.ndim:
            raise StructureError("one seam list per grid axis")

    def __repr__(self):
        return f"{type(self).__name__}(grid={self.grid_shape}, tuple_valued={self.tuple_valued})"

    @property
    def grid_shape(self):
        return self.samples.shape[: self.ndim]

    @property
    def resolution(self):
        return tuple(d - 1 for d in self.grid_shape)

    @property
    def arity(self):
        return self.samples.shape[-3] if self.tuple_valued else None

    def replace(self, samples, seams=None):
        return type(self)(samples, self.spec, tuple_valued=self.tuple_valued,
                          seams=self.seams if seams is None else seams)

    def edge_logs(self, axis=0, margin=1e-6):
        """``log(g_i^-1 g_{i+1})`` along ``axis``; left-trivialized at ``g_i``."""
        g = np.moveaxis(self.samples, axis, 0)
        out = log(dagger(g[:-1]) @ g[1:], margin)
        return np.moveaxis(out, 0, axis)

    def max_step(self):
        return max(float(np.max(step_size(self.edge_logs(ax)))) for ax in range(self.ndim))

    def check_steps(self, step_bound=STEP_BOUND):
        s = self.max_step()
        if s > step_bound:
            raise StructureError(f"mesh step {s:.4g} exceeds step bound {step_bound:.4g}")
        return s

    def reversed(self, axis):
        n = self.grid_shape[axis] - 1
        seams = list(self.seams)
        seams[axis] = tuple(n - i for i in self.seams[axis])
        return self.replace(np.flip(self.samples, axis), seams)

    def coarsen(self, stride):
        """Every ``stride``-th sample along each axis (resolutions must divide)."""
        stride = int(stride)
        if any(k % stride for k in self.resolution):
            raise StructureError(f"resolution {self.resolution} not divisible by {stride}")
        idx = tuple(slice(None, None, stride) for _ in range(self.ndim))
        seams = [[i // stride for i in s if i % stride == 0] for s in self.seams]
        return self.replace(self.samples[idx], seams)

    def conjugated(self, g):
        """Every sample conjugated by the fixed element ``g``."""
        return self.replace(g @ self.samples @ dagger(g))

    def with_spec(self, spec):
        return type(self)(self.samples, spec, tuple_valued=self.tuple_valued, seams=self.seams)


class PathMesh(GridMesh):
    """Samples ``g_0..g_N`` of a path ``I -> K`` (or ``K^m``)."""

    ndim = 1

    @property
    def start(self):
        return self.samples[0]

    @property
    def end(self):
        return self.samples[-1]


class SquareMesh(GridMesh):
    """An ``(N+1) x (M+1)`` grid, axis 0 is the first parameter."""

    ndim = 2


class CubeMesh(GridMesh):
    ndim = 3


def mesh_class(ndim):
    return {1: PathMesh, 2: SquareMesh, 3: CubeMesh}[ndim]


# ---------------------------------------------------------------------------
# construction


def _grid(n, ndim):
    axes = [np.linspace(0.0, 1.0, k + 1) for k in n]
    return np.meshgrid(*axes, indexing="ij") if ndim > 1 else axes


def _res(n, ndim):
    if np.isscalar(n):
        return (int(n),) * ndim
    return tuple(int(k) for k in n)


def sample_path(fn, n, spec=None, tuple_valued=False):
    """Sample ``fn(t)`` (vectorized over a 1-d array of times) on ``n`` intervals."""
    (t,) = _grid(_res(n, 1), 1)
    return PathMesh(fn(t), spec, tuple_valued=tuple_valued)


def sample_square(fn, n, spec=None, tuple_valued=False):
    t1, t2 = _grid(_res(n, 2), 2)
    return SquareMesh(fn(t1, t2), spec, tuple_valued=tuple_valued)


def sample_cube(fn, n, spec=None, tuple_valued=False):
    t1, t2, t3 = _grid(_res(n, 3), 3)
    return CubeMesh(fn(t1, t2, t3), spec, tuple_valued=tuple_valued)


def geodesic(g0, g1, fractions):
    """``g0 exp(f log(g0^-1 g1))`` for each fraction ``f``; exact at ``f = 0``."""
    step = log(dagger(g0) @ g1)
    f = np.asarray(fractions, dtype=float)
    shape = f.shape + (1,) * (np.ndim(step) - 0)
    out = g0 @ exp(f.reshape(shape) * step)
    return out


def geodesic_path(points, n, spec=None, tuple_valued=None):
    """Piecewise geodesic through control points, ``n`` intervals per piece.

    Two points give ``g_i = g_0 exp((i/n) log(g_0^-1 g_n))``; more points are
    concatenated with seams at the joints.
    """
    points = [np.asarray(p, dtype=complex) for p in points]
    if len(points) < 2:
        raise StructureError("need at least two control points")
    if tuple_valued is None:
        tuple_valued = points[0].ndim == 3
    f = np.arange(n + 1) / n
    pieces = []
    for a, b in zip(points[:-1], points[1:]):
        s = geodesic(a, b, f)
        s = s.copy()
        s[0], s[-1] = a, b
        pieces.append(PathMesh(s, spec, tuple_valued=tuple_valued))
    return concat(pieces, axis=0) if len(pieces) > 1 else pieces[0]


def concat(meshes, axis=0, tol=MESH_TOL):
    """Glue meshes along ``axis``; shared boundary samples must agree within ``tol``."""
    first = meshes[0]
    parts = [first.samples]
    seams = [list(s) for s in first.seams]
    offset = first.grid_shape[axis] - 1
    for m in meshes[1:]:
        a = np.take(parts[-1], -1, axis=axis)
        b = np.take(m.samples, 0, axis=axis)
        defect = float(np.max(np.abs(a - b)))
        if defect > tol:
            raise StructureError(f"glued edges differ by {defect:.3g}")
        seams[axis].append(offset)
        for ax in range(first.ndim):
            shift = offset if ax == axis else 0
            seams[ax].extend(i + shift for i in m.seams[ax])
        parts.append(np.delete(m.samples, 0, axis=axis))
        offset += m.grid_shape[axis] - 1
    samples = np.concatenate(parts, axis=axis)
    seams = [sorted(set(s)) for s in seams]
    return type(first)(samples, first.spec, tuple_valued=first.tuple_valued, seams=seams)


def refine(mesh, factor):
    """Geodesic subdivision of every edge, axis by axis (first axis first).

    Original samples are kept bit-for-bit.
    """
    factor = int(factor)
    if factor < 1:
        raise StructureError("refinement factor must be a positive integer")
    if factor == 1:
        return mesh
    samples = mesh.samples
    frac = np.arange(factor) / factor
    for axis in range(mesh.ndim):
        g = np.moveaxis(samples, axis, 0)
        steps = log(dagger(g[:-1]) @ g[1:])
        tail = (1,) * (steps.ndim - 1)
        new = g[:-1, None] @ exp(frac.reshape(1, factor, *tail) * steps[:, None])
        new[:, 0] = g[:-1]
        new = new.reshape(-1, *g.shape[1:])
        new = np.concatenate([new, g[-1:]], axis=0)
        samples = np.moveaxis(new, 0, axis)
    seams = [[i * factor for i in s] for s in mesh.seams]
    return mesh.replace(samples, seams)


# ---------------------------------------------------------------------------
# strings and homotopies


@dataclass(frozen=True)
class ConstraintReport:
    """Per-condition maximal defects; passes iff every defect is within ``tol``."""

    defects: dict
    tol: float = MESH_TOL

    @property
    def passed(self):
        return all(v <= self.tol for v in self.defects.values())

    def failures(self):
        return {k: v for k, v in self.defects.items() if v > self.tol}

    def to_json(self):
        return {"defects": {k: float(v) for k, v in self.defects.items()}, "tol": self.tol, "pass": self.passed}


def _dist(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)), initial=0.0))


def _spread(a, axis):
    """Max deviation of samples from the first sample along ``axis``."""
    first = np.take(a, [0], axis=axis)
    return _dist(a, first)


@dataclass(frozen=True)
class StringCD1:
    """A based path ``w`` in ``M`` and a square ``phi`` in ``N`` with bottom edge ``f o w``."""

    w: PathMesh
    phi: SquareMesh

    @property
    def top(self):
        return PathMesh(self.phi.samples[:, -1], self.phi.spec, seams=(self.phi.seams[0],))


def validate_string(s, data, tol=MESH_TOL, loop=False):
    """Check the boundary conditions of a string against the map ``data.f``.

    With ``loop=True`` the conditions of the loop-type strings are checked
    instead (closed ``w`` and ``phi`` equal to ``f(o)`` on the top edge too).
    """
    w, phi = s.w.samples, s.phi.samples
    fo = data.f(data.basepoint)
    d = {}
    if w.shape[0] != phi.shape[0]:
        d["resolution_mismatch"] = float("inf")
        return ConstraintReport(d, tol)
    d["w_based"] = _dist(w[0], data.basepoint)
    d["left_edge"] = _dist(phi[0, :], fo)
    d["right_edge_constant"] = _spread(phi[-1, :], 0)
    d["bottom_edge"] = _dist(phi[:, 0], data.f(w))
    if loop:
        d["w_closed"] = _dist(w[-1], data.basepoint)
        d["top_edge"] = _dist(phi[:, -1], fo)
    return ConstraintReport(d, tol)


@dataclass(frozen=True)
class HomotopyCD11:
    """``h: I x I -> M`` (axes ``t1, s``) and ``H: I^3 -> N`` (axes ``t1, t2, s``)."""

    h: SquareMesh
    H: CubeMesh

    def start(self):
        return StringCD1(PathMesh(self.h.samples[:, 0], self.h.spec, tuple_valued=self.h.tuple_valued),
                         SquareMesh(self.H.samples[:, :, 0], self.H.spec))

    def end(self):
        return StringCD1(PathMesh(self.h.samples[:, -1], self.h.spec, tuple_valued=self.h.tuple_valued),
                         SquareMesh(self.H.samples[:, :, -1], self.H.spec))

    def reversed(self):
        """The same homotopy run backwards in ``s``."""
        return HomotopyCD11(self.h.reversed(1), self.H.reversed(2))


def validate_homotopy(hh, data, tol=MESH_TOL, start=None, end=None):
    """Defects of the eight requirements plus ``f o h = H(., 0, .)``.

    ``start``/``end`` strings, when given, are compared with the homotopy's
    ``s = 0`` and ``s = 1`` faces.
    """
    h, H = hh.h.samples, hh.H.samples
    fo = data.f(data.basepoint)
    d = {}
    if h.shape[:2] != (H.shape[0], H.shape[2]):
        d["resolution_mismatch"] = float("inf")
        return ConstraintReport(d, tol)
    if start is not None:
        d["h_start"] = _dist(h[:, 0], start.w.samples)
        d["H_start"] = _dist(H[:, :, 0], start.phi.samples)
    if end is not None:
        d["h_end"] = _dist(h[:, -1], end.w.samples)
        d["H_end"] = _dist(H[:, :, -1], end.phi.samples)
    d["h_right_constant"] = _spread(h[-1, :], 0)
    d["h_based"] = _dist(h[0, :], data.basepoint)
    d["H_left_face"] = _dist(H[0], fo)
    d["H_right_face_constant"] = _spread(H[-1], 1)
    d["H_top_face_constant"] = _spread(H[:, -1], 1)
    d["compatibility"] = _dist(H[:, 0, :], data.f(h))
    return ConstraintReport(d, tol)


def string_from_path(w, data, n_s=None):
    """The canonical string over a based path: ``phi(t, s) = f(w(t))`` for all ``s``."""
    n_s = w.resolution[0] if n_s is None else n_s
    fw = data.f(w.samples)
    phi = np.broadcast_to(fw[:, None], (fw.shape[0], n_s + 1, *fw.shape[1:]))
    return StringCD1(w, SquareMesh(phi, data.spec, seams=(w.seams[0], ())))


def string_over(w, u, data, n_s=None):
    """A string with bottom edge ``f o w`` and top edge ``u`` (same endpoint).

    ``phi(t, s) = f(w(t)) exp(s log(f(w(t))^-1 u(t)))``: the pointwise geodesic
    from the bottom edge to ``u``.
    """
    if w.grid_shape[0] != u.grid_shape[0]:
        raise StructureError("w and u need the same resolution")
    n_s = w.resolution[0] if n_s is None else n_s
    fw = data.f(w.samples)
    frac = np.linspace(0.0, 1.0, n_s + 1)
    steps = log(dagger(fw) @ u.samples)
    phi = fw[:, None] @ exp(frac[None, :, None, None] * steps[:, None])
    phi[:, 0] = fw
    phi[:, -1] = u.samples
    return StringCD1(w, SquareMesh(phi, data.spec, seams=(sorted(set(w.seams[0]) | set(u.seams[0])), ())))
