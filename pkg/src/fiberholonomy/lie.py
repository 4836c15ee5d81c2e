"""Compact matrix Lie group kernels.

Group elements and algebra elements are plain complex ``ndarray`` objects of
shape ``(..., n, n)``; every function broadcasts over leading batch axes.
Tangent vectors are always carried left-trivialized: an algebra element ``v``
at ``g`` stands for the actual tangent ``g @ v``.

The invariant inner product is ``<X, Y> = -c Re tr(XY)`` with ``c`` the
``metric_scale`` of a :class:`GroupSpec`. Dual (co-algebra) elements are
identified with algebra elements through this inner product, so a momentum
value or a value of ``theta`` is stored as an algebra-shaped array.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CutLocusError",
    "StructureError",
    "GroupSpec",
    "DEFAULT_METRIC_SCALE",
    "dagger",
    "inverse",
    "bracket",
    "adjoint",
    "exp",
    "log",
    "dexp",
    "su2_basis",
    "algebra_norm",
    "step_size",
]

#: ``1/(4 pi^2)``: makes the Cartan 3-form of SU(n) integrate to 1 on SU(2).
DEFAULT_METRIC_SCALE = 1.0 / (4.0 * math.pi**2)

_FAMILIES = ("SU", "SO", "U1")


class CutLocusError(ValueError):
    """Raised when a principal logarithm is requested too close to -1."""


class StructureError(ValueError):
    """Shape, arity or invariant violation of a group/algebra element."""


def dagger(a):
    return np.conj(np.swapaxes(a, -1, -2))


def inverse(g):
    """Inverse of a unitary matrix (its conjugate transpose)."""
    return dagger(g)


def _check_pair(x, y):
    if np.shape(x)[-2:] != np.shape(y)[-2:]:
        raise StructureError(f"matrix shape mismatch: {np.shape(x)} vs {np.shape(y)}")


def bracket(x, y):
    _check_pair(x, y)
    return x @ y - y @ x


def adjoint(g, x):
    """``Ad_g x = g x g^{-1}``."""
    _check_pair(g, x)
    return g @ x @ dagger(g)


def su2_basis():
    """The basis ``e_k = -(i/2) sigma_k`` of su(2), with ``[e1, e2] = e3``."""
    s1 = np.array([[0, 1], [1, 0]], dtype=complex)
    s2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
    s3 = np.array([[1, 0], [0, -1]], dtype=complex)
    return np.stack([-0.5j * s1, -0.5j * s2, -0.5j * s3])


def algebra_norm(x):
    """Frobenius norm over the last two axes."""
    return np.sqrt(np.sum(np.abs(x) ** 2, axis=(-2, -1)))


def step_size(x):
    """Operator norm of an anti-Hermitian matrix (largest rotation angle)."""
    x = np.asarray(x)
    if x.shape[-1] == 2:
        # eigenvalues of a 2x2 anti-Hermitian matrix are tr/2 +- i r
        tr = np.trace(x, axis1=-2, axis2=-1) / 2
        y = x - tr[..., None, None] * np.eye(2)
        r = np.sqrt(np.abs(np.real(-0.5 * np.trace(y @ y, axis1=-2, axis2=-1))))
        return np.abs(np.imag(tr)) + r
    return np.max(np.abs(np.linalg.eigvalsh(-1j * x)), axis=-1)


# ---------------------------------------------------------------------------
# exponential and logarithm


def _is_su2_batch(x, tol=1e-13):
    if x.shape[-1] != 2:
        return False
    return bool(np.all(np.abs(np.trace(x, axis1=-2, axis2=-1)) <= tol))


def _exp_su2(x):
    # X^2 = -theta^2 I for traceless anti-Hermitian 2x2 X
    theta2 = np.real(-0.5 * np.trace(x @ x, axis1=-2, axis2=-1))
    theta = np.sqrt(np.maximum(theta2, 0.0))
    c = np.cos(theta)[..., None, None]
    s = np.sinc(theta / np.pi)[..., None, None]
    return c * np.eye(2) + s * x


def exp(x):
    """Matrix exponential of an anti-Hermitian (or real antisymmetric) matrix.

    Traceless 2x2 input uses the closed form ``cos(t) 1 + sin(t)/t X``;
    everything else goes through ``eigh`` of the Hermitian matrix ``-iX``.
    """
    x = np.asarray(x, dtype=complex)
    if x.shape[-1] == 1:
        return np.exp(x)
    if _is_su2_batch(x):
        return _exp_su2(x)
    w, v = np.linalg.eigh(-1j * x)
    return (v * np.exp(1j * w)[..., None, :]) @ dagger(v)


def _log_su2(g, margin):
    a = 0.5 * (g - dagger(g))
    cos_t = 0.5 * np.real(np.trace(g, axis1=-2, axis2=-1))
    sin_t = np.sqrt(np.maximum(np.real(-0.5 * np.trace(a @ a, axis1=-2, axis2=-1)), 0.0))
    theta = np.arctan2(sin_t, cos_t)
    if np.any(theta > np.pi - margin):
        raise CutLocusError(
            f"eigenvalue within {margin:g} of -1 (max angle {float(np.max(theta)):.12g})"
        )
    return a / np.sinc(theta / np.pi)[..., None, None]


_MIX = 0.6180339887498949


def _log_general(g, margin):
    # A unitary matrix is diagonalized by the eigenvectors of a generic real
    # combination of its Hermitian and skew parts; verify and fall back to a
    # per-matrix Schur form where eigenvalues collide.
    herm = 0.5 * (g + dagger(g)) + _MIX * (-0.5j) * (g - dagger(g))
    _, v = np.linalg.eigh(herm)
    d = dagger(v) @ g @ v
    diag = np.diagonal(d, axis1=-2, axis2=-1)
    off = np.abs(d - diag[..., :, None] * np.eye(g.shape[-1]))
    bad = np.max(off, axis=(-2, -1)) > 1e-10
    if np.any(bad):
        import scipy.linalg

        flat_g = g.reshape(-1, *g.shape[-2:])
        flat_v = v.reshape(flat_g.shape).copy()
        flat_d = diag.reshape(-1, g.shape[-1]).copy()
        for k in np.flatnonzero(bad.reshape(-1)):
            t, z = scipy.linalg.schur(flat_g[k], output="complex")
            flat_v[k] = z
            flat_d[k] = np.diagonal(t)
        v = flat_v.reshape(v.shape)
        diag = flat_d.reshape(diag.shape)
    ang = np.angle(diag)
    if np.any(np.abs(ang) > np.pi - margin):
        raise CutLocusError(f"eigenvalue within {margin:g} of -1")
    return (v * (1j * ang)[..., None, :]) @ dagger(v)


def log(g, margin=1e-6):
    """Principal logarithm of a unitary matrix.

    Raises :class:`CutLocusError` when an eigenvalue argument lies within
    ``margin`` of ``+-pi``.
    """
    g = np.asarray(g, dtype=complex)
    n = g.shape[-1]
    if n == 1:
        ang = np.angle(g)
        if np.any(np.abs(ang) > np.pi - margin):
            raise CutLocusError(f"eigenvalue within {margin:g} of -1")
        return 1j * ang
    if n == 2:
        det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
        if np.all(np.abs(det - 1.0) < 1e-9):
            return _log_su2(g, margin)
    out = _log_general(g, margin)
    if np.all(np.abs(np.imag(g)) == 0):
        out = np.real(out).astype(complex)
    return out


def dexp(s, v, terms=40):
    """Left-trivialized derivative of ``exp`` at ``s`` in direction ``v``.

    Returns ``exp(-S) d/de exp(S + e V)|_0 = sum_k (-ad_S)^k V / (k+1)!``.
    """
    s = np.asarray(s, dtype=complex)
    term = np.asarray(v, dtype=complex)
    total = term.copy()
    for k in range(1, terms):
        term = -(s @ term - term @ s) / (k + 1)
        total = total + term
        if np.max(np.abs(term), initial=0.0) < 1e-18:
            break
    return total


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroupSpec:
    """A compact matrix group together with its invariant metric.

    ``family`` is one of ``"SU"``, ``"SO"``, ``"U1"``; ``metric_scale`` is the
    constant ``c`` in ``<X, Y> = -c tr(XY)`` and must be positive.
    """

    family: str = "SU"
    n: int = 2
    metric_scale: float = DEFAULT_METRIC_SCALE

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise StructureError(f"unknown group family {self.family!r}")
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise StructureError(f"rank parameter must be a positive integer, got {self.n!r}")
        if self.family == "U1" and self.n != 1:
            raise StructureError("U1 requires n = 1")
        if self.family in ("SU", "SO") and self.n < 2:
            raise StructureError(f"{self.family}({self.n}) is trivial; need n >= 2")
        if not (np.isfinite(self.metric_scale) and self.metric_scale > 0):
            # degenerate or indefinite metrics are not supported
            raise StructureError(f"metric_scale must be positive, got {self.metric_scale!r}")

    # -- json -------------------------------------------------------------
    def to_json(self):
        return {"family": self.family, "n": int(self.n), "metric_scale": float(self.metric_scale)}

    @classmethod
    def from_json(cls, obj):
        try:
            return cls(str(obj["family"]), int(obj["n"]), float(obj.get("metric_scale", DEFAULT_METRIC_SCALE)))
        except KeyError as exc:
            raise StructureError(f"GroupSpec JSON missing field {exc}") from None

    def scaled(self, factor):
        return GroupSpec(self.family, self.n, self.metric_scale * factor)

    @property
    def dim(self):
        n = self.n
        return {"SU": n * n - 1, "SO": n * (n - 1) // 2, "U1": 1}[self.family]

    def identity(self, shape=()):
        return np.broadcast_to(np.eye(self.n, dtype=complex), (*shape, self.n, self.n)).copy()

    # -- metric and invariant forms ---------------------------------------
    def inner(self, x, y):
        """``-c Re tr(XY)``."""
        _check_pair(x, y)
        return -self.metric_scale * np.real(np.einsum("...ij,...ji->...", x, y))

    def cartan3(self, x, y, z):
        """The Cartan 3-form on left-trivialized tangents: ``<[X,Y],Z>/2``."""
        return 0.5 * self.inner(bracket(x, y), z)

    def theta_flat(self, g, v):
        """``(v + Ad_g v)/2``: the value of ``(omega + omega_bar)/2`` on ``g v``."""
        return 0.5 * (v + adjoint(g, v))

    def theta(self, g, v):
        """Co-algebra valued 1-form; stored as its metric dual (same as ``theta_flat``)."""
        return self.theta_flat(g, v)

    def pair(self, mu, x):
        """Pairing of a co-algebra element (stored as its dual) with ``x``."""
        return self.inner(mu, x)

    def norm(self, x):
        return np.sqrt(np.maximum(self.inner(x, x), 0.0))

    # -- basis, projections, sampling -------------------------------------
    def basis(self):
        """An orthogonal basis of the algebra (orthonormal for ``-2 tr`` on SU)."""
        n = self.n
        if self.family == "U1":
            return np.array([[[1j]]])
        out = []
        if self.family == "SO":
            for i in range(n):
                for j in range(i + 1, n):
                    e = np.zeros((n, n), dtype=complex)
                    e[i, j], e[j, i] = -1, 1
                    out.append(e)
            return np.array(out)
        for i in range(n):
            for j in range(i + 1, n):
                e = np.zeros((n, n), dtype=complex)
                e[i, j], e[j, i] = -1, 1
                out.append(0.5 * e)
                e = np.zeros((n, n), dtype=complex)
                e[i, j], e[j, i] = 1j, 1j
                out.append(-0.5 * e)
        for k in range(1, n):
            e = np.zeros((n, n), dtype=complex)
            e[np.arange(k), np.arange(k)] = 1
            e[k, k] = -k
            out.append(-0.5j * e / math.sqrt(k * (k + 1) / 2))
        return np.array(out)

    def project_algebra(self, x):
        """Orthogonal projection of a complex matrix onto the algebra."""
        x = np.asarray(x, dtype=complex)
        a = 0.5 * (x - dagger(x))
        if self.family == "SO":
            return np.real(a).astype(complex)
        if self.family == "SU":
            tr = np.trace(a, axis1=-2, axis2=-1) / self.n
            a = a - tr[..., None, None] * np.eye(self.n)
        return a

    def random_algebra(self, rng, shape=(), scale=1.0):
        b = self.basis()
        coeffs = rng.standard_normal((*shape, len(b))) * scale
        return np.einsum("...k,kij->...ij", coeffs, b)

    def random_element(self, rng, shape=()):
        """Haar-distributed element(s)."""
        n = self.n
        count = int(np.prod(shape, dtype=int))
        if self.family == "U1":
            return np.exp(1j * rng.uniform(-np.pi, np.pi, (*shape, 1, 1)))
        if self.family == "SO":
            z = rng.standard_normal((count, n, n))
            q, r = np.linalg.qr(z)
            q = q * np.sign(np.diagonal(r, axis1=-2, axis2=-1))[:, None, :]
            neg = np.linalg.det(q) < 0
            q[neg, :, 0] *= -1
            return q.astype(complex).reshape(*shape, n, n)
        z = rng.standard_normal((count, n, n)) + 1j * rng.standard_normal((count, n, n))
        q, r = np.linalg.qr(z)
        d = np.diagonal(r, axis1=-2, axis2=-1)
        q = q * (d / np.abs(d))[:, None, :]
        det = np.linalg.det(q)
        q[:, :, 0] /= det[:, None]
        return q.reshape(*shape, n, n)

    # -- validation -------------------------------------------------------
    def check_group(self, g, tol=1e-10):
        g = np.asarray(g)
        if g.shape[-2:] != (self.n, self.n):
            raise StructureError(f"expected ({self.n},{self.n}) matrices, got {g.shape}")
        defect = np.max(np.abs(dagger(g) @ g - np.eye(self.n)), initial=0.0)
        if defect > tol:
            raise StructureError(f"unitarity defect {defect:.3g} exceeds {tol:g}")
        if self.family in ("SU", "SO"):
            det_defect = np.max(np.abs(np.linalg.det(g) - 1.0), initial=0.0)
            if det_defect > tol:
                raise StructureError(f"determinant defect {det_defect:.3g} exceeds {tol:g}")
        if self.family == "SO" and np.max(np.abs(np.imag(g)), initial=0.0) > tol:
            raise StructureError("SO element has imaginary entries")
        return g

    def check_algebra(self, x, tol=1e-10):
        x = np.asarray(x)
        if x.shape[-2:] != (self.n, self.n):
            raise StructureError(f"expected ({self.n},{self.n}) matrices, got {x.shape}")
        defect = np.max(np.abs(x + dagger(x)), initial=0.0)
        if defect > tol:
            raise StructureError(f"anti-Hermitian defect {defect:.3g} exceeds {tol:g}")
        if self.family == "SU":
            tr = np.max(np.abs(np.trace(x, axis1=-2, axis2=-1)), initial=0.0)
            if tr > tol:
                raise StructureError(f"trace defect {tr:.3g} exceeds {tol:g}")
        if self.family == "SO" and np.max(np.abs(np.imag(x)), initial=0.0) > tol:
            raise StructureError("so(n) element has imaginary entries")
        return x
