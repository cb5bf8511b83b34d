"""Backlund transformations by constant cross-ratio.

A transform gamma~ of gamma satisfies cr(gamma_k, gamma_{k+1}, gamma~_{k+1},
gamma~_k) = mu on every quadrilateral.  Each step gamma~_k -> gamma~_{k+1} is a
Mobius map; their product around a closed curve is the monodromy, whose fixed
points seed closed transforms.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .curve_core import (
    CurveC2,
    ZERO_TOL,
    as_point,
    closing_scale,
    cross_ratio,
    det2,
    normalize_arclength,
    shift,
)
from .errors import (
    DefectiveMonodromy,
    DegenerateStep,
    IdentityMonodromy,
    PeriodicityObstruction,
)

# relative eigenvalue gap below which the monodromy counts as defective
DEFECT_TOL = 1e-10
# projective mismatch tolerated when closing a transform
CLOSE_TOL = 1e-8


@dataclass(frozen=True)
class BacklundParams:
    """Transform parameter mu and the initial point gamma~_0."""

    mu: complex
    initial: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mu", complex(self.mu))
        object.__setattr__(self, "initial", as_point(self.initial))


def _unit(p):
    return p / np.linalg.norm(p)


def projective_distance(p, q):
    """|det(p, q)| / (|p| |q|), zero iff p and q agree projectively."""
    p = np.asarray(p)
    q = np.asarray(q)
    return float(np.abs(det2(p, q)) / (np.linalg.norm(p) * np.linalg.norm(q)))


def step_matrix(a, b, mu):
    """Mobius matrix M with M d = det(a, b) d + mu det(d, a) b.

    det M = det(a, b)^2 (1 - mu).
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    return det2(a, b) * np.eye(2) + mu * np.outer(b, [a[1], -a[0]])


def backlund_step(gk, gk1, gtk, mu):
    """gamma~_{k+1} solving cr(gamma_k, gamma_{k+1}, gamma~_{k+1}, gamma~_k) = mu.

    Returned with unit norm.

    Raises
    ------
    DegenerateStep
        If gamma~_k agrees projectively with gamma_{k+1}, or gamma_k with
        gamma_{k+1}.
    """
    a, b, d = (np.asarray(x, dtype=complex) for x in (gk, gk1, gtk))
    if projective_distance(d, b) <= ZERO_TOL:
        raise DegenerateStep("gamma~_k coincides with gamma_{k+1}")
    ab = det2(a, b)
    if abs(ab) <= ZERO_TOL * np.linalg.norm(a) * np.linalg.norm(b):
        raise DegenerateStep("gamma_k coincides with gamma_{k+1}")
    x = ab * d + mu * det2(d, a) * b
    n = np.linalg.norm(x)
    if n <= ZERO_TOL * abs(ab) * np.linalg.norm(d):
        raise DegenerateStep("step maps to the zero vector")
    return x / n


def inverse_step(gk, gk1, gtk1, mu):
    """gamma~_k from gamma~_{k+1} on the same quadrilateral."""
    return backlund_step(gk1, gk, gtk1, mu)


def monodromy(curve, mu):
    """Product of the N step matrices of a closed curve, scaled to unit norm."""
    if not curve.periodic:
        raise ValueError("monodromy needs a periodic curve")
    pts, nxt = curve.points, curve.shifted(1)
    M = np.eye(2, dtype=complex)
    for k in range(len(curve)):
        M = step_matrix(pts[k], nxt[k], mu) @ M
        M /= np.abs(M).max()
    return M


def periodic_fixpoints(curve, mu):
    """Fixed points of the monodromy, the dominant eigenvector first.

    Forward stepping from the first point and backward stepping from the
    second are numerically stable.

    Raises
    ------
    DegenerateStep
        For mu = 1 (every step collapses onto gamma_k).
    IdentityMonodromy
        If the monodromy is scalar (mu = 0), so every seed closes.
    DefectiveMonodromy
        If both eigenvalues agree; the single fixed point is attached.
    """
    mu = complex(mu)
    if abs(mu - 1) <= ZERO_TOL:
        raise DegenerateStep("mu = 1: the monodromy has rank one")
    M = monodromy(curve, mu)
    scale = np.abs(M).max()
    if abs(M[0, 1]) + abs(M[1, 0]) + abs(M[0, 0] - M[1, 1]) <= DEFECT_TOL * scale:
        raise IdentityMonodromy("monodromy is a multiple of the identity")
    w, v = np.linalg.eig(M)
    order = np.argsort(-np.abs(w))
    w, v = w[order], v[:, order]
    if abs(w[0] - w[1]) <= DEFECT_TOL * np.abs(w).max():
        raise DefectiveMonodromy(v[:, 0])
    return v[:, 0], v[:, 1]


def _chain(curve):
    """Points and their successors, the last successor twisted if needed."""
    return curve.points, curve.shifted(1)


def _forward(curve, initial, mu):
    pts, nxt = _chain(curve)
    n = len(curve)
    m = n if curve.periodic else n - 1
    out = np.empty((m + 1, 2), dtype=complex)
    out[0] = _unit(as_point(initial))
    for k in range(m):
        try:
            out[k + 1] = backlund_step(pts[k], nxt[k], out[k], mu)
        except DegenerateStep as exc:
            raise DegenerateStep(str(exc), k) from exc
    return out


def _backward(curve, final, mu):
    pts, nxt = _chain(curve)
    n = len(curve)
    m = n if curve.periodic else n - 1
    out = np.empty((m + 1, 2), dtype=complex)
    out[m] = _unit(as_point(final))
    for k in range(m - 1, -1, -1):
        try:
            out[k] = inverse_step(pts[k], nxt[k], out[k + 1], mu)
        except DegenerateStep as exc:
            raise DegenerateStep(str(exc), k) from exc
    return out


def backlund_transform(curve, params, direction="forward", normalize=True):
    """Backlund transform of a lifted curve.

    Parameters
    ----------
    curve : CurveC2
        Normally g == 1.
    params : BacklundParams
        ``initial`` is gamma~_0 for ``direction="forward"``; for
        ``"backward"`` it is gamma~_N (periodic) or the last point (open),
        and the steps are inverted.
    normalize : bool
        Rescale the result to unit edge determinants.

    Returns
    -------
    CurveC2
        Periodic if the transform closes up.  Otherwise an open chain of
        N + 1 points is returned with a :class:`PeriodicityObstruction` warning.
    """
    if direction == "forward":
        pts = _forward(curve, params.initial, params.mu)
    elif direction == "backward":
        pts = _backward(curve, params.initial, params.mu)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    periodic = False
    if curve.periodic:
        gap = projective_distance(pts[-1], pts[0])
        if gap <= CLOSE_TOL:
            periodic = True
            pts = pts[:-1]
        else:
            warnings.warn(
                f"transform does not close (mismatch {gap:.3e}); returning an open chain",
                PeriodicityObstruction,
                stacklevel=2,
            )
    out = CurveC2(pts, periodic)
    if not normalize:
        return out
    if periodic and len(out) % 2 == 1:
        return normalize_arclength(out, closing_scale(out))
    return normalize_arclength(out)


def closure_residual(curve, mu, initial, direction="forward"):
    """Projective mismatch between gamma~_N and gamma~_0 after one sweep.

    ``initial`` is gamma~_0 for a forward sweep and gamma~_N for a backward one.
    """
    if direction == "forward":
        pts = _forward(curve, initial, mu)
    elif direction == "backward":
        pts = _backward(curve, initial, mu)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    return projective_distance(pts[-1], pts[0])


def periodic_transform(curve, mu, which=0):
    """Closed transform seeded at fixed point ``which`` (0 dominant, 1 subdominant)."""
    fixed = periodic_fixpoints(curve, mu)
    direction = "forward" if which == 0 else "backward"
    return backlund_transform(curve, BacklundParams(mu, fixed[which]), direction)


def _neighbours(curve, periodic):
    if curve.periodic and periodic:
        return curve.shifted(-1), curve.shifted(1)
    return shift(curve.points, -1, False), shift(curve.points, 1, False)


def s_sequence(curve, transformed):
    """s_k = cr(gamma_{k-1}, gamma~_k, gamma_{k+1}, gamma_k)."""
    g = curve.points
    t = transformed.points
    if len(t) != len(g):
        raise ValueError("curves must have the same number of points")
    prev, nxt = _neighbours(curve, transformed.periodic)
    ok = np.isfinite(prev).all(axis=1) & np.isfinite(nxt).all(axis=1)
    s = np.full(len(g), np.nan, dtype=complex)
    s[ok] = cross_ratio(prev[ok], t[ok], nxt[ok], g[ok])
    return s


def quad_cross_ratios(curve, transformed):
    """cr(gamma_k, gamma_{k+1}, gamma~_{k+1}, gamma~_k) for every quadrilateral.

    A transform of a closed curve that failed to close (an open chain of N + 1
    points) is compared with gamma_0 .. gamma_N.
    """
    g, t = curve.points, transformed.points
    if curve.periodic and not transformed.periodic and len(t) == len(g) + 1:
        g = np.vstack([g, curve.shifted(1)[-1:]])
        g1, t1 = shift(g, 1, False), shift(t, 1, False)
    else:
        _, g1 = _neighbours(curve, transformed.periodic)
        t1 = transformed.shifted(1)
    ok = np.isfinite(g1).all(axis=1) & np.isfinite(t1).all(axis=1)
    return cross_ratio(g[ok], g1[ok], t1[ok], t[ok])


def _max(x):
    x = np.abs(x)
    x = x[np.isfinite(x)]
    return float(x.max()) if x.size else 0.0


def qevol_residuals(Q, Q_t, s, mu, periodic=True):
    """Residuals of Q~_k s_{k+1} = Q_k s_k and (1 - mu) Q_k (1 - s_k)(s_{k+1} - 1) = s_{k+1}."""
    s1 = shift(s, 1, periodic)
    r1 = _max(Q_t * s1 - Q * s)
    r2 = _max((1 - mu) * Q * (1 - s) * (s1 - 1) - s1)
    return r1, r2


def discrete_volterra_check(Q, Q_t, s, mu, periodic=True):
    """Residuals of the discrete-time Volterra relations.

    With h = mu - 1, alpha_k = Q_k, alpha~_k = Q~_{k+1} and
    beta_k = h Q_k / s_{k+1}:

    alpha~_k = alpha_k beta_{k+1} / beta_k,
    beta_k - h alpha_k = beta_{k-1} / (beta_{k-1} - h alpha_{k-1}).
    """
    h = mu - 1

    def sh(a, j):
        return shift(np.asarray(a, dtype=complex), j, periodic)

    alpha = np.asarray(Q, dtype=complex)
    alpha_t = sh(Q_t, 1)
    beta = h * alpha / sh(s, 1)
    r1 = _max(alpha_t - alpha * sh(beta, 1) / beta)
    r2 = _max(beta - h * alpha - sh(beta, -1) / (sh(beta, -1) - h * sh(alpha, -1)))
    return r1, r2


def concircularity_defect(z1, z2, z3, z4):
    """Normalized determinant of rows (|z|^2, Re z, Im z, 1); zero iff concircular or collinear."""
    zs = np.array([z1, z2, z3, z4], dtype=complex)
    centre = zs.mean()
    w = zs - centre
    scale = np.abs(w).max()
    w = w / scale
    m = np.stack([np.abs(w) ** 2, w.real, w.imag, np.ones(4)], axis=1)
    return abs(np.linalg.det(m))


def continuum_limit_residual(curve, h=1e-3):
    """Relative distance of (Q~_{k+1} - Q_k) / h from the Volterra rate Q_k (Q_{k+1} - Q_{k-1}).

    Uses the closed transform with mu = 1 + h seeded at the dominant fixed
    point; the residual is O(h).
    """
    from .arclength import volterra_rhs

    transformed = periodic_transform(curve, 1 + h, 0)
    Q = curve.Q
    rate = volterra_rhs(Q, curve.periodic)
    step = (shift(transformed.Q, 1, True) - Q) / h
    return float(np.abs(step - rate).max() / np.abs(rate).max())
