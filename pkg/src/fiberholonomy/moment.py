"""Momentum map on fiber points, its defect check, and the zero-locus probe."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bundle import FiberPoint, FiberTangent, fiber_chart, fundamental_tangent, zeta_fiber
from .lie import StructureError, algebra_norm, log
from .mesh import geodesic_path
from .quadrature import eta_theta

__all__ = [
    "momentum",
    "momentum_pairing",
    "momentum_derivative",
    "momentum_defect",
    "ProbeReport",
    "flatness_probe",
    "completion_path",
]


def _require_word(data):
    if data.is_class:
        raise StructureError("the momentum map needs f(o) fixed by the action (word data)")


def momentum(p, data=None):
    """``-eta(theta)(u)`` as a dual vector; only the path ``u`` enters."""
    if data is not None:
        _require_word(data)
    return -eta_theta(p.u)


def momentum_pairing(p, x, data=None):
    spec = p.u.spec
    return float(spec.pair(momentum(p, data), x))


def momentum_derivative(p, x, t, data, h=1e-4):
    """Central difference of ``<mu, X>`` along the curve ``s -> (q exp(s v_q), u exp(s V))``."""
    if not h > 0 or h < 1e-12:
        raise StructureError("finite-difference step underflow")
    chart = fiber_chart(p, [t])
    plus, _ = chart(np.array([h]))
    minus, _ = chart(np.array([-h]))
    return (momentum_pairing(plus, x, data) - momentum_pairing(minus, x, data)) / (2 * h)


def momentum_defect(p, x, t, data, h=1e-4):
    """``|d<mu, X>(T) - zeta_fiber(T, X_P)|``.

    The fundamental tangent ``X_P`` uses the conjugation field at ``q`` and
    pointwise along ``u``.
    """
    _require_word(data)
    xp = fundamental_tangent(p, x, data)
    return abs(momentum_derivative(p, x, t, data, h) - zeta_fiber(p, t, xp, data))


# ---------------------------------------------------------------------------
# zero locus


def completion_path(r, n=8, spec=None):
    """Geodesic from ``e`` to ``r``; the constant path when ``r = e``."""
    r = np.asarray(r)
    e = np.eye(r.shape[-1], dtype=complex)
    return geodesic_path([e, r], n, spec)


@dataclass(frozen=True)
class ProbeReport:
    relator_defect: float
    momentum_norm: float
    momentum: np.ndarray
    tol: float

    @property
    def passed(self):
        return self.relator_defect <= self.tol and self.momentum_norm <= self.tol

    def to_json(self):
        return {"relator_defect": self.relator_defect, "momentum_norm": self.momentum_norm, "pass": self.passed}


def flatness_probe(point, data, tol=1e-10, n=8):
    """Relator defect ``|r - e|`` and ``|mu|`` at the canonical fiber point over ``point``.

    Norms are entrywise maxima / Frobenius norms of matrices, so they do not
    scale with the metric.
    """
    _require_word(data)
    point = np.asarray(point, dtype=complex)
    r = data.f(point)
    e = np.eye(r.shape[-1])
    defect = float(np.max(np.abs(r - e)))
    u = completion_path(r, n, data.spec)
    mu = momentum(FiberPoint(point, u), data)
    return ProbeReport(defect, float(algebra_norm(mu)), mu, tol)


def expected_momentum(point, data):
    """``-log r(point)``: the momentum at the geodesic completion."""
    return -log(data.f(np.asarray(point)))
