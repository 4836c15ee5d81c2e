"""Residual suites for the form identities of word maps.

* ``d zeta_w = w^* lambda - sum n_i pr_i^* lambda`` by central differences on a
  step ladder (residual order ~2),
* the equivariant identities ``delta lambda + d theta = 0`` on ``K``,
  ``delta zeta_w - (w^* theta - sum n_i pr_i^* theta) = 0`` and
  ``delta theta = 0``, pointwise at seeded points.

Points are drawn from Philox streams keyed by the seed, so reports are
reproducible bit for bit.
"""
from __future__ import annotations

import numpy as np

from .calculus import exterior_derivative, group_chart, refinement_orders
from .lie import GroupSpec
from .words import WordForm, conjugation_field

__all__ = ["rng_for", "d_zeta_residuals", "equivariant_residuals", "default_form"]


def rng_for(seed, *key):
    """A Philox generator for ``seed`` and an integer stream key."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, key)])))


def _sample_points(spec, m, points, rng, scale=1.0):
    base = spec.random_element(rng, (points, m))
    dirs = spec.random_algebra(rng, (points, 3, m), scale)
    return base, dirs


def d_zeta_residuals(form, seed=0, points=10, steps=(1e-2, 5e-3, 2.5e-3), stream=0):
    """Worst residual of ``d zeta_w - w^* lambda`` at each step, and the observed orders."""
    spec = form.spec
    rng = rng_for(seed, 1, stream)
    base, dirs = _sample_points(spec, form.arity, points, rng)
    res = []
    for h in steps:
        worst = 0.0
        for k in range(points):
            chart = group_chart(base[k], list(dirs[k]))
            dz = exterior_derivative(form.zeta, chart, 3, h)
            worst = max(worst, abs(float(dz - form.pullback_lambda(base[k], *dirs[k]))))
        res.append(worst)
    return res, refinement_orders(steps, res).tolist()


def equivariant_residuals(form, seed=0, points=20, h=1e-4, stream=0):
    """Pointwise residuals of the three equivariant identities (max over points)."""
    spec = form.spec
    rng = rng_for(seed, 2, stream)
    m = form.arity
    g = spec.random_element(rng, (points,))
    uv = spec.random_algebra(rng, (points, 2))
    xs = spec.random_algebra(rng, (points,))
    q, dq = _sample_points(spec, m, points, rng)
    r_lam = r_zeta = r_theta = 0.0
    for k in range(points):
        x = xs[k]

        # delta lambda + d theta on K
        def theta_x(point, v, x=x):
            return spec.pair(spec.theta(point, v), x)

        chart = group_chart(g[k], list(uv[k]))
        d_theta = exterior_derivative(theta_x, chart, 2, h)
        xn = conjugation_field(g[k], x)
        delta_lam = -spec.cartan3(xn, uv[k, 0], uv[k, 1])
        r_lam = max(r_lam, abs(float(delta_lam + d_theta)))

        # delta zeta - (w^* theta - sum n_i pr_i^* theta) on M
        v = dq[k, 0]
        xm = conjugation_field(q[k], x)
        delta_zeta = -form.zeta(q[k], xm, v)
        w_theta = spec.pair(spec.theta(form.value(q[k]), form.differential(q[k], v)), x)
        for i, n in enumerate(form.degree_vector):
            if n:
                w_theta = w_theta - n * spec.pair(spec.theta(q[k][i], v[i]), x)
        r_zeta = max(r_zeta, abs(float(delta_zeta - w_theta)))

        # delta theta: <theta(X_N), X>
        r_theta = max(r_theta, abs(float(spec.pair(spec.theta(g[k], xn), x))))
    return {"delta_lambda_plus_d_theta": r_lam, "delta_zeta_minus_w_theta": r_zeta, "delta_theta": r_theta}


def default_form(genus=1, spec=None, **kwargs):
    from .words import relator_word

    return WordForm(relator_word(genus), spec or GroupSpec(), **kwargs)
