"""Finite-difference exterior derivatives along exponential charts.

A *chart* is a callable ``chart(s) -> (point, tangents)`` taking a parameter
vector ``s`` of length ``k`` and returning a point together with the ``k``
coordinate tangents at that point (in whatever representation the form
evaluator expects). The exterior derivative of a ``(k-1)``-form is then the
alternating sum of central differences of the form evaluated on the
remaining coordinate tangents; coordinate fields commute, so no bracket terms
appear.
"""
from __future__ import annotations

from itertools import combinations

import numpy as np

from .lie import dexp, exp


def group_chart(point, directions):
    """Chart ``s -> point * exp(sum_i s_i V_i)`` on a (product) matrix group.

    ``point`` has shape ``(..., n, n)`` (a tuple of group elements when a
    leading arity axis is present); ``directions`` is a sequence of
    left-trivialized tangents of the same shape. Coordinate tangents are
    returned left-trivialized and exact (via :func:`dexp`).
    """
    point = np.asarray(point)
    directions = [np.asarray(v) for v in directions]

    def chart(s):
        big = sum(si * v for si, v in zip(s, directions))
        return point @ exp(big), [dexp(big, v) for v in directions]

    return chart


def exterior_derivative(form, chart, degree, h=1e-3):
    """Central-difference value of ``d(form)`` on the chart's coordinate tangents at ``s = 0``.

    ``form(point, *tangents)`` must be a ``(degree-1)``-form; ``degree`` is the
    degree of the result. For ``degree == 1`` this is just the directional
    derivative of a function.
    """
    total = 0.0
    for i in range(degree):
        rest = [j for j in range(degree) if j != i]
        sign = -1.0 if i % 2 else 1.0
        for step in (h, -h):
            s = np.zeros(degree)
            s[i] = step
            point, tangents = chart(s)
            val = form(point, *[tangents[j] for j in rest])
            total = total + sign * np.sign(step) * val / (2 * h)
    return total


def evaluate_on_chart(form, chart, degree):
    """Value of a ``degree``-form on the chart's coordinate tangents at ``s = 0``."""
    point, tangents = chart(np.zeros(degree))
    return form(point, *tangents)


def refinement_orders(steps, residuals):
    """Observed orders ``log(r_k/r_{k+1}) / log(h_k/h_{k+1})`` along a ladder."""
    steps = np.asarray(steps, dtype=float)
    res = np.asarray(residuals, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(res[:-1] / res[1:]) / np.log(steps[:-1] / steps[1:])


def alternation_signs(k):
    """All permutations of ``range(k)`` with their signs (small k only)."""
    from itertools import permutations

    out = []
    for perm in permutations(range(k)):
        inv = sum(1 for a, b in combinations(range(k), 2) if perm[a] > perm[b])
        out.append((perm, -1 if inv % 2 else 1))
    return out
