"""Toda lattice hierarchy as flows on lifted curves.

With p_k = u_k / (g_k g_{k-1}) - lam and g_k = exp((q_k - q_{k+1}) / 2) the
pair (p, g^-2) are Flaschka-Manakov variables.  Suitable coefficients
(alpha, beta) make the induced evolution of (g, p) the first three Toda flows.
Curves with constant g and u are discrete quadrics.
"""

from dataclasses import dataclass

import numpy as np

from .curve_core import CurveC2, as_point, check_immersed, det2, shift
from .errors import InconsistentSeed, ZeroG
from .flows import FlowCoefficients, integrate, velocity

FLOWS = (1, 2, 3)


@dataclass(frozen=True)
class TodaState:
    """Flaschka-Manakov data of a curve: g, p, q (q_0 = 0) and lam."""

    g: np.ndarray
    p: np.ndarray
    q: np.ndarray
    lam: complex

    def u(self, periodic=True):
        """Recover u_k = (p_k + lam) g_k g_{k-1}."""
        return (self.p + self.lam) * self.g * shift(self.g, -1, periodic)


def q_from_g(g, q0=0.0):
    """q_{k+1} = q_k - 2 log g_k (principal branch), one entry per point."""
    g = np.asarray(g, dtype=complex)
    steps = -2 * np.log(g[:-1])
    return q0 + np.concatenate([[0.0], np.cumsum(steps)])


def flaschka_vars(curve, lam=0.0):
    """Flaschka-Manakov variables of an immersed lift.

    Raises
    ------
    NotImmersed
    """
    check_immersed(curve)
    g, u = curve.g, curve.u
    with np.errstate(invalid="ignore"):
        p = u / (g * curve.seq_shift(g, -1)) - lam
    return TodaState(g=g, p=p, q=q_from_g(g), lam=complex(lam))


def _check_g(g):
    g = np.asarray(g, dtype=complex)
    bad = np.flatnonzero(g == 0)
    if bad.size:
        raise ZeroG(f"g[{bad[0]}] = 0")
    return g


def toda_coeffs(flow, curve, lam=0.0):
    """Curve-flow coefficients inducing the ``flow``-th Toda flow.

    With r_k = (g_{k-1} - g_k) / (g_{k-1} + g_k):

    flow 1: alpha = -(p + lam) r / 2,
            beta = -g_{k-1} g_k (p + lam) / (g_{k-1} + g_k)
    flow 2: alpha = -(p^2 - lam^2) r / 2 - (g_k^-2 - g_{k-1}^-2) / 2,
            beta = -g_{k-1} g_k (p^2 - lam^2) / (g_{k-1} + g_k)
    flow 3: alpha = -r (p^3 + lam^3 - 2 (p + lam) / (g_k g_{k-1})) / 2
                    - g_k^-2 (2 p_k + p_{k+1}) / 2 + g_{k-1}^-2 (p_{k-1} + 2 p_k) / 2,
            beta = -g_{k-1} g_k (p + lam) / (g_{k-1} + g_k)
                   * (g_{k-1}^-2 + g_k^-2 + p^2 - lam p + lam^2)
    """
    with np.errstate(invalid="ignore"):
        return _toda_coeffs(flow, curve, lam)


def _toda_coeffs(flow, curve, lam):
    st = flaschka_vars(curve, lam)
    sh = curve.seq_shift
    g, p = st.g, st.p
    gm = sh(g, -1)
    r = (gm - g) / (gm + g)
    w = gm * g / (gm + g)
    if flow == 1:
        alpha = -0.5 * (p + lam) * r
        beta = -w * (p + lam)
    elif flow == 2:
        alpha = -0.5 * (p**2 - lam**2) * r - 0.5 * (g**-2 - gm**-2)
        beta = -w * (p**2 - lam**2)
    elif flow == 3:
        alpha = (
            -0.5 * r * (p**3 + lam**3 - 2 * (p + lam) / (g * gm))
            - 0.5 * g**-2 * (2 * p + sh(p, 1))
            + 0.5 * gm**-2 * (sh(p, -1) + 2 * p)
        )
        beta = -w * (p + lam) * (gm**-2 + g**-2 + p**2 - lam * p + lam**2)
    else:
        raise ValueError(f"Toda flow must be one of {FLOWS}, got {flow!r}")
    return FlowCoefficients(alpha, beta)


def toda_field(flow, lam=0.0):
    """Coefficient generator for :func:`todacurves.flows.integrate`."""

    def field(curve):
        return toda_coeffs(flow, curve, lam)

    return field


def toda_V1(curve, lam=0.0):
    """Classical first-flow matrix [[-(p_k + lam)/2, 1/g_{k-1}], [-1/g_{k-1}, (p_{k-1} + lam)/2]]."""
    st = flaschka_vars(curve, lam)
    sh = curve.seq_shift
    gm = sh(st.g, -1)
    V = np.empty((len(curve), 2, 2), dtype=complex)
    V[:, 0, 0] = -0.5 * (st.p + lam)
    V[:, 0, 1] = 1 / gm
    V[:, 1, 0] = -1 / gm
    V[:, 1, 1] = 0.5 * (sh(st.p, -1) + lam)
    return V


def toda_rhs(flow, g, p, periodic=True):
    """Right-hand sides (g_dot / g, p_dot) of the Toda flows in Flaschka-Manakov form.

    flow 1: g_dot/g = (p_k - p_{k+1})/2,  p_dot = g_k^-2 - g_{k-1}^-2
    flow 2: g_dot/g = -(p_{k+1}^2 - p_k^2 + g_{k+1}^-2 - g_{k-1}^-2)/2,
            p_dot = g_k^-2 (p_{k+1} + p_k) - g_{k-1}^-2 (p_k + p_{k-1})
    flow 3: see the third-flow system; cubic in p.

    Raises
    ------
    ZeroG
        If some g_k = 0.
    """
    g = _check_g(g)
    p = np.asarray(p, dtype=complex)

    def sh(a, j):
        return shift(a, j, periodic)

    gm, gp = sh(g, -1), sh(g, 1)
    pp, pm = sh(p, 1), sh(p, -1)
    if flow == 1:
        return 0.5 * (p - pp), g**-2 - gm**-2
    if flow == 2:
        return (
            -0.5 * (pp**2 - p**2 + gp**-2 - gm**-2),
            g**-2 * (pp + p) - gm**-2 * (p + pm),
        )
    if flow == 3:
        g_rate = -0.5 * (
            (pp**3 + sh(p, 2) * gp**-2 + 2 * pp * gp**-2 + pp * g**-2)
            - (p**3 + pm * gm**-2 + p * g**-2 + 2 * p * gm**-2)
        )
        p_rate = g**-2 * (pp**2 + p**2 + pp * p + gp**-2 + g**-2) - gm**-2 * (
            p**2 + pm**2 + p * pm + gm**-2 + sh(g, -2) ** -2
        )
        return g_rate, p_rate
    raise ValueError(f"Toda flow must be one of {FLOWS}, got {flow!r}")


def toda_qdot(flow, g, p, lam=0.0, periodic=True):
    """q_dot_k for each flow.

    flow 1: p_k + lam
    flow 2: g_k^-2 + g_{k-1}^-2 + p_k^2 - lam^2
    flow 3: g_k^-2 (2 p_k + p_{k+1}) + g_{k-1}^-2 (p_{k-1} + 2 p_k) + p_k^3 + lam^3
    """
    g = _check_g(g)
    p = np.asarray(p, dtype=complex)
    gm = shift(g, -1, periodic)
    if flow == 1:
        return p + lam
    if flow == 2:
        return g**-2 + gm**-2 + p**2 - lam**2
    if flow == 3:
        return (
            g**-2 * (2 * p + shift(p, 1, periodic))
            + gm**-2 * (shift(p, -1, periodic) + 2 * p)
            + p**3
            + lam**3
        )
    raise ValueError(f"Toda flow must be one of {FLOWS}, got {flow!r}")


def _log_series(g_series):
    """Elementwise log of a (T, N) series, continuous in time."""
    return np.log(np.abs(g_series)) + 1j * np.unwrap(np.angle(g_series), axis=0)


def _max_rel(err, ref):
    err = np.abs(err)
    scale = max(1.0, float(np.nanmax(np.abs(ref))))
    return float(np.nanmax(err)) / scale


def toda_consistency(flow, curve, lam=0.0, dt=1e-3, steps=300):
    """Integrate a Toda flow on the curve and compare differences with the lattice equations.

    q_0(t) is integrated from the flow's q_dot_0 with the trapezoidal rule and
    q_k = q_0 - 2 sum_{j<k} log g_j, continued in time.

    Returns
    -------
    dict
        Max errors of g_dot/g, p_dot and q_dot (central differences), and for
        flow 1 of q_ddot = g_k^-2 - g_{k-1}^-2 (second differences), each
        divided by max(1, max |reference|).
    """
    traj = integrate(curve, toda_field(flow, lam), dt, steps)
    periodic = curve.periodic
    g = np.array([s.g for s in traj.states])
    p = np.array([flaschka_vars(s, lam).p for s in traj.states])
    logg = _log_series(g)
    qdot_rel = np.array([toda_qdot(flow, gi, pi, lam, periodic) for gi, pi in zip(g, p)])
    # trapezoidal anchor for q_0
    q0 = np.concatenate([[0.0], np.cumsum(0.5 * dt * (qdot_rel[1:, 0] + qdot_rel[:-1, 0]))])
    q = q0[:, None] - 2 * np.concatenate(
        [np.zeros((len(g), 1)), np.cumsum(logg[:, :-1], axis=1)], axis=1
    )

    mid = slice(1, -1)
    rates = [toda_rhs(flow, gi, pi, periodic) for gi, pi in zip(g[mid], p[mid])]
    g_ref = np.array([r[0] for r in rates])
    p_ref = np.array([r[1] for r in rates])
    g_fd = (logg[2:] - logg[:-2]) / (2 * dt)
    p_fd = (p[2:] - p[:-2]) / (2 * dt)
    q_fd = (q[2:] - q[:-2]) / (2 * dt)
    report = {
        "flow": flow,
        "g": _max_rel(g_fd - g_ref, g_ref),
        "p": _max_rel(p_fd - p_ref, p_ref),
        "q": _max_rel(q_fd - qdot_rel[mid], qdot_rel[mid]),
    }
    if flow == 1:
        q_dd = (q[2:] - 2 * q[1:-1] + q[:-2]) / dt**2
        gm = np.array([shift(gi, -1, periodic) for gi in g[mid]])
        toda = g[mid] ** -2 - gm**-2
        report["qddot"] = _max_rel(q_dd - toda, toda)
    return report


def tangent_form_residual(curve, coeffs):
    """Distance of the flow from gamma_dot_k = rho (gamma_{k+1} - gamma_{k-1}) with one constant rho.

    Returns
    -------
    (float, complex)
        Max deviation of the velocity from that form and the fitted rho.
    """
    c = coeffs(curve) if callable(coeffs) else coeffs
    rho_k = c.beta / curve.u
    rho = complex(np.nanmean(rho_k))
    v = velocity(curve, c)
    target = rho * (curve.shifted(1) - curve.shifted(-1))
    d = np.abs(v - target)
    return float(np.nanmax(d)), rho


def reduction_residual(trajectory, periodic=True):
    """Central-difference defect of Volterra for v_k = g_k^-2 along a trajectory."""
    from .arclength import volterra_rhs

    v = np.array([s.g**-2 for s in trajectory.states])
    fd = (v[2:] - v[:-2]) / (2 * trajectory.dt)
    ref = np.array([volterra_rhs(vi, periodic) for vi in v[1:-1]])
    return _max_rel(fd - ref, ref)


# discrete quadrics


def bilinear(a, b):
    """<a, b> = a.x b.x + a.y b.y (no conjugation)."""
    a = np.asarray(a)
    b = np.asarray(b)
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1]


@dataclass(frozen=True)
class QuadricData:
    """Symmetric M with <M gamma_k, gamma_k> = 1, <M gamma_k, gamma_{k+1}> = u/(2g)."""

    M: np.ndarray
    u: complex
    g: complex

    def det(self):
        """det M = (1 - u^2 / (4 g^2)) / g^2."""
        return (1 - self.u**2 / (4 * self.g**2)) / self.g**2


def quadric_matrix(gamma0, gamma1, u):
    """The symmetric matrix of the quadric through gamma0, gamma1 with parameter u.

    Raises
    ------
    ZeroG
        If det(gamma0, gamma1) = 0.
    """
    x0, y0 = as_point(gamma0)
    x1, y1 = as_point(gamma1)
    g = x0 * y1 - y0 * x1
    if g == 0:
        raise ZeroG("det(gamma0, gamma1) = 0")
    h = u / (2 * g)
    off = (x0 * y1 + y0 * x1) * h - (x0 * y0 + x1 * y1)
    M = np.array(
        [[y0**2 + y1**2 - 2 * y0 * y1 * h, off], [off, x0**2 + x1**2 - 2 * x0 * x1 * h]],
        dtype=complex,
    ) / g**2
    return QuadricData(M, complex(u), complex(g))


def quadric_curve(gamma0, gamma1, u, g, n, periodic=False):
    """gamma_{k+2} = (u / g) gamma_{k+1} - gamma_k for k = 0 .. n - 3.

    Raises
    ------
    InconsistentSeed
        If det(gamma0, gamma1) != g.
    ZeroG
        If g = 0.
    """
    if g == 0:
        raise ZeroG("g = 0")
    gamma0 = as_point(gamma0)
    gamma1 = as_point(gamma1)
    d = det2(gamma0, gamma1)
    if abs(d - g) > 1e-12 * max(1.0, abs(g)):
        raise InconsistentSeed(f"det(gamma0, gamma1) = {d} but g = {g}")
    pts = np.empty((n, 2), dtype=complex)
    pts[0], pts[1] = gamma0, gamma1
    for k in range(n - 2):
        pts[k + 2] = (u / g) * pts[k + 1] - pts[k]
    return CurveC2(pts, periodic)


def quadric_identity_residuals(curve, quadric):
    """max |<M gamma_k, gamma_k> - 1| and max |<M gamma_k, gamma_{k+1}> - u/(2g)|."""
    pts = curve.points
    Mg = pts @ quadric.M.T
    r1 = np.abs(bilinear(Mg, pts) - 1).max()
    nxt = curve.shifted(1)
    r2 = np.abs(bilinear(Mg, nxt) - quadric.u / (2 * quadric.g))
    return float(r1), float(np.nanmax(r2))


def quadric_tangency_residual(curve, quadric, rho):
    """Largest time derivative of the quadric identities under gamma_dot = rho (gamma_{k+1} - gamma_{k-1}).

    Derivatives are taken with the product rule at the interior points.
    """
    M = quadric.M
    pts = curve.points
    vel = rho * (curve.shifted(1) - curve.shifted(-1))
    Mg = pts @ M.T
    Mv = vel @ M.T
    d_self = 2 * bilinear(Mv, pts)
    d_next = bilinear(Mv, curve.shifted(1)) + bilinear(Mg, curve.shift_points(vel, 1))
    vals = np.abs(np.concatenate([d_self, d_next]))
    vals = vals[np.isfinite(vals)]
    return float(vals.max()) if vals.size else 0.0
