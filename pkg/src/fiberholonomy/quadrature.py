"""Quadrature of pulled-back forms over path, square and cube meshes.

Form evaluators are pointwise and vectorized over leading axes:
``alpha(g, X)``, ``c(g, X, Y)``, ``lam(g, X, Y, Z)`` with left-trivialized
tangents. Cell values are computed from edge logs only, so no sample ever
leaves the group. Scalar totals are reduced with ``math.fsum``; since that sum
is correctly rounded, the result does not depend on how cells are split
between workers.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy.optimize import brentq

from .lie import exp

__all__ = [
    "integrate_1form",
    "integrate_2form",
    "integrate_3form",
    "cell_values_2form",
    "cell_values_3form",
    "eta_theta",
    "richardson",
    "RichardsonResult",
    "integer_snap",
    "Snap",
    "PeriodReport",
    "converge",
]


def _fsum(values):
    values = np.asarray(values)
    if values.dtype.kind == "c":
        return complex(_fsum(values.real), _fsum(values.imag))
    return math.fsum(values.ravel().tolist())


def _fsum_axis0(values):
    """Correctly rounded sum over the first axis, componentwise."""
    values = np.asarray(values)
    if values.ndim == 1:
        return _fsum(values)
    flat = values.reshape(values.shape[0], -1)
    if values.dtype.kind == "c":
        out = np.array([complex(math.fsum(col.real.tolist()), math.fsum(col.imag.tolist())) for col in flat.T])
    else:
        out = np.array([math.fsum(col.tolist()) for col in flat.T])
    return out.reshape(values.shape[1:])


# ---------------------------------------------------------------------------
# 1-forms


def integrate_1form(u, alpha):
    """Midpoint rule ``sum_i alpha(g_i exp(D_i/2), D_i)`` with ``D_i = log(g_i^-1 g_{i+1})``.

    Returns a float for scalar forms and an array for vector-valued ones.
    """
    steps = u.edge_logs(0)
    mids = u.samples[:-1] @ exp(0.5 * steps)
    return _fsum_axis0(alpha(mids, steps))


def eta_theta(u, spec=None):
    """``eta(theta)(u)``: the integral of ``(omega + omega_bar)/2`` along ``u`` (as a dual vector).

    Exact on one-parameter subgroups, since the integrand is constant there.
    """
    spec = spec or u.spec
    return integrate_1form(u, spec.theta_flat)


# ---------------------------------------------------------------------------
# 2- and 3-forms


def cell_values_2form(phi, c):
    """Per-plaquette values: ``c`` on the two edge logs, averaged over the four corners."""
    g = phi.samples
    l1 = phi.edge_logs(0)  # (N, M+1, ...)
    l2 = phi.edge_logs(1)  # (N+1, M, ...)
    total = 0.0
    for a, b in product((0, 1), repeat=2):
        corner = g[a : a + l1.shape[0], b : b + l2.shape[1]]
        x = l1[:, b : b + l2.shape[1]]
        y = l2[a : a + l1.shape[0], :]
        total = total + c(corner, x, y)
    return 0.25 * total


def integrate_2form(phi, c):
    return _fsum(cell_values_2form(phi, c))


def _cube_cells(g, lam, margin):
    from .lie import dagger, log

    l1 = log(dagger(g[:-1]) @ g[1:], margin)
    l2 = log(dagger(g[:, :-1]) @ g[:, 1:], margin)
    l3 = log(dagger(g[:, :, :-1]) @ g[:, :, 1:], margin)
    n1, n2, n3 = l1.shape[0], l2.shape[1], l3.shape[2]
    total = 0.0
    for a, b, c in product((0, 1), repeat=3):
        corner = g[a : a + n1, b : b + n2, c : c + n3]
        x = l1[:, b : b + n2, c : c + n3]
        y = l2[a : a + n1, :, c : c + n3]
        z = l3[a : a + n1, b : b + n2, :]
        total = total + lam(corner, x, y, z)
    return 0.125 * total


def cell_values_3form(H, lam, workers=1, margin=1e-6):
    """Per-cell values of a 3-form, eight-corner average; slabs along axis 0 go to workers."""
    g = H.samples
    n = g.shape[0] - 1
    workers = max(1, min(int(workers), n))
    bounds = np.linspace(0, n, workers + 1).round().astype(int)
    slabs = [g[lo : hi + 1] for lo, hi in zip(bounds[:-1], bounds[1:])]
    if workers == 1:
        parts = [_cube_cells(slabs[0], lam, margin)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda s: _cube_cells(s, lam, margin), slabs))
    return np.concatenate(parts, axis=0)


def integrate_3form(H, lam, workers=1):
    return _fsum(cell_values_3form(H, lam, workers))


# ---------------------------------------------------------------------------
# extrapolation and integrality


@dataclass(frozen=True)
class RichardsonResult:
    value: float
    error_est: float
    order: float
    reliable: bool

    def to_json(self):
        order = None if not math.isfinite(self.order) else self.order
        return {"value": self.value, "error_est": self.error_est, "order": order, "order_reliable": self.reliable}


def _order_equation(n, ratio):
    n1, n2, n3 = n

    def g(p):
        return (n1**-p - n2**-p) / (n2**-p - n3**-p) - ratio

    return g


def richardson(values, resolutions=None, nominal_order=None):
    """Extrapolate three values computed at increasing resolutions.

    The observed order ``p`` solves ``(v1-v2)/(v2-v3) = (N1^-p - N2^-p)/(N2^-p - N3^-p)``,
    which is ``log2`` of the difference ratio for the ladder ``N, 2N, 4N``.
    Non-monotone or vanishing differences flag the order as unreliable; the
    extrapolation then falls back to ``nominal_order`` (or to the finest value).
    """
    v1, v2, v3 = (float(v) for v in values)
    n = tuple(float(k) for k in (resolutions or (1, 2, 4)))
    d1, d2 = v1 - v2, v2 - v3
    p = float("nan")
    reliable = False
    if d1 != 0 and d2 != 0 and d1 * d2 > 0:
        ratio = d1 / d2
        g = _order_equation(n, ratio)
        lo, hi = 1e-3, 20.0
        if g(lo) * g(hi) < 0:
            p = brentq(g, lo, hi, xtol=1e-14)
            reliable = True
    use = p if reliable else nominal_order
    if use is None:
        return RichardsonResult(v3, max(abs(d1), abs(d2)), p, reliable)
    w2, w3 = n[1] ** -use, n[2] ** -use
    limit = v3 - d2 * w3 / (w2 - w3)
    return RichardsonResult(limit, abs(limit - v3), p, reliable)


@dataclass(frozen=True)
class Snap:
    int: int
    defect: float
    passed: bool

    def to_json(self):
        return {"int": self.int, "defect": self.defect, "pass": self.passed}


def integer_snap(x, tol):
    if not tol > 0:
        raise ValueError("tol must be positive")
    k = round(float(x))
    defect = abs(float(x) - k)
    return Snap(int(k), defect, defect <= tol)


@dataclass(frozen=True)
class PeriodReport:
    """Values on a resolution ladder, their extrapolation, and an integer snap."""

    resolutions: tuple
    values: tuple
    extrapolation: RichardsonResult
    snap: Snap | None = None
    extra: dict = field(default_factory=dict)

    @property
    def value(self):
        return self.extrapolation.value

    @property
    def passed(self):
        return self.snap.passed if self.snap is not None else True

    def to_json(self):
        out = self.extrapolation.to_json()
        out["resolutions"] = list(self.resolutions)
        out["values"] = list(self.values)
        if self.snap is not None:
            out["snap"] = self.snap.to_json()
        out.update(self.extra)
        return out


def converge(compute, resolutions, tol=None, nominal_order=None):
    """Evaluate ``compute(N)`` on a ladder, extrapolate, and snap when ``tol`` is given."""
    values = tuple(float(compute(n)) for n in resolutions)
    ex = richardson(values, resolutions, nominal_order)
    snap = integer_snap(ex.value, tol) if tol is not None else None
    return PeriodReport(tuple(int(n) for n in resolutions), values, ex, snap)
