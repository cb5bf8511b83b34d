"""Test curves: regular polygons, random closed curves with normalized lifts,
Toda reduction data, quadrics and elastica chains.

Random constructors take a seed and are deterministic.
"""

import numpy as np

from .curve_core import (
    CurveC2,
    PlaneCurve,
    closing_scale,
    det2,
    lift_plane,
    normalize_arclength,
)
from .euclidean import elastica_generate
from .toda import quadric_curve


def regular_polygon(n, radius=None):
    """Closed regular n-gon with unit edges (or the given circumradius)."""
    if radius is None:
        radius = 1 / (2 * np.sin(np.pi / n))
    return PlaneCurve(radius * np.exp(2j * np.pi * np.arange(n) / n), periodic=True)


def _noisy_polygon(n, rng, noise):
    c = np.exp(2j * np.pi * np.arange(n) / n)
    return c + noise * (rng.normal(size=n) + 1j * rng.normal(size=n))


def _close_even(c, sign=-1):
    """Move the last point so that the g == 1 rescaling of the (c, 1) lift closes
    up to ``sign``.

    Near-regular even polygons have closing ratio close to -1, so the default
    twisted closure is a small correction.
    """
    c = c.copy()
    n = len(c)
    g = c[:-1] - c[1:]
    K = np.prod(g[0 : n - 2 : 2]) / np.prod(g[1 : n - 2 : 2])
    c[n - 1] = (K * c[n - 2] + sign * c[0]) / (K + sign)
    return c


def arclength_lift(plane):
    """Periodic lift with g == 1 of a closed plane curve.

    Even periods need an alternating closing ratio of +1 or -1 (the latter
    gives a twisted lift, see :func:`random_arclength_curve`); odd periods
    always admit one.
    """
    lift = lift_plane(plane)
    if len(plane) % 2 == 1:
        return normalize_arclength(lift, closing_scale(lift))
    return normalize_arclength(lift)


def random_arclength_curve(n=8, seed=0, noise=0.1):
    """Random closed curve near the regular n-gon, lifted with g == 1.

    For even n the last vertex is nudged so that the lift closes; the result
    is then twisted like the regular polygon.
    """
    rng = np.random.default_rng(seed)
    c = _noisy_polygon(n, rng, noise)
    if n % 2 == 0:
        c = _close_even(c)
    return arclength_lift(PlaneCurve(c))


def regular_lift(n):
    """Regular n-gon lifted with g == 1 (n even or odd)."""
    return arclength_lift(regular_polygon(n))


def random_curve(n=6, seed=0, noise=0.1, scale_noise=0.2, scale=1.0):
    """Random closed curve near the regular n-gon with a randomly scaled lift.

    ``scale`` multiplies the whole lift; p scales like scale^-2 and g^-2 like
    scale^-4, so larger values slow the Toda flows down.
    """
    rng = np.random.default_rng(seed)
    c = _noisy_polygon(n, rng, noise)
    scales = scale * (1 + scale_noise * (rng.normal(size=n) + 1j * rng.normal(size=n)))
    pts = np.stack([c, np.ones(n)], axis=1) * scales[:, None]
    return CurveC2(pts, periodic=True)


def toda_curve(n=6, seed=1):
    """Generic closed lift with |p| and |g^-2| of order 1/2, slow enough for
    central differences at dt = 1e-3 under all three Toda flows."""
    return random_curve(n, seed=seed, scale=2.0)


def p_zero_curve(n=7, seed=0, noise=0.1):
    """Closed curve with u_k = g_k g_{k-1}, i.e. p == 0 for lam = 1 (odd n).

    The lift is chosen with g_k^2 = 1 / Q_k.
    """
    if n % 2 == 0:
        raise ValueError("p_zero_curve needs an odd number of points")
    rng = np.random.default_rng(seed)
    base = lift_plane(PlaneCurve(_noisy_polygon(n, rng, noise)))
    target = base.Q ** -0.5
    g = base.g
    lam = np.empty(n + 1, dtype=complex)
    lam[0] = 1.0
    for k in range(n):
        lam[k + 1] = target[k] / (g[k] * lam[k])
    lam0 = np.sqrt(lam[n] / lam[0])
    lam[0] = lam0
    for k in range(n - 1):
        lam[k + 1] = target[k] / (g[k] * lam[k])
    curve = CurveC2(base.points * lam[:n, None], periodic=True)
    w = curve.u / (curve.g * np.roll(curve.g, 1))
    if np.real(w.mean()) < 0:
        curve = CurveC2(curve.points * 1j, periodic=True)
    return curve


def closed_quadric(n=8, g=1.0):
    """Periodic discrete quadric with u = 2 g cos(2 pi / n); g and u are constant."""
    u = 2 * g * np.cos(2 * np.pi / n)
    return quadric_curve((1.0, 0.0), (0.0, g), u, g, n, periodic=True), u


def random_closed_arclength_polygon(n=12, seed=0, spread=0.15, iters=50):
    """Closed unit-edge polygon with randomly perturbed turning angles.

    Edge directions phi_k = 2 pi k / n + delta_k; delta is corrected by
    minimum-norm Gauss-Newton steps until sum exp(i phi_k) = 0.
    """
    rng = np.random.default_rng(seed)
    base = 2 * np.pi * np.arange(n) / n
    delta = spread * rng.normal(size=n)
    for _ in range(iters):
        S = np.exp(1j * (base + delta))
        F = S.sum()
        if abs(F) < 1e-15:
            break
        J = np.stack([(1j * S).real, (1j * S).imag])
        delta -= np.linalg.pinv(J) @ np.array([F.real, F.imag])
    S = np.exp(1j * (base + delta))
    c = np.concatenate([[0.0], np.cumsum(S[:-1])])
    return PlaneCurve(c, periodic=True)


def elastica_chain(a=1.25, kappa0=0.3, kappa1=0.5, n=80):
    """Open elastica polygon of n + 1 points and its curvatures."""
    return elastica_generate(kappa0, kappa1, a, 0.0, 0.0, n)


def is_normalized(curve, tol=1e-12):
    g = curve.g[np.isfinite(curve.g)]
    return bool(np.all(np.abs(g - 1) <= tol))


def unit_seed_det(gamma0, gamma1):
    return det2(np.asarray(gamma0, complex), np.asarray(gamma1, complex))
