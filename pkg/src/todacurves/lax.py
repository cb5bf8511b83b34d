"""Zero-curvature representation of curve flows.

The frames F_k (rows gamma_k, gamma_{k-1}) satisfy F_{k+1} = L_k F_k and
F_dot_k = V_k F_k, so every flow obeys L_dot_k = V_{k+1} L_k - L_k V_k.
Matrices are stored as (N, 2, 2) complex arrays.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .arclength import require_arclength, volterra_rhs
from .curve_core import check_immersed, shift
from .errors import ConstraintViolated
from .flows import FlowCoefficients, _coeffs_for, induced_rates


@dataclass(frozen=True)
class LaxData:
    """Per-index L and V matrices, with the spectral parameter when present."""

    L: np.ndarray
    V: np.ndarray
    lam: Optional[complex] = None


def mat_norm(m):
    """Max absolute entry, ignoring undefined (NaN) entries."""
    a = np.abs(np.asarray(m))
    a = a[np.isfinite(a)]
    return float(a.max()) if a.size else 0.0


def _mat(a, b, c, d):
    out = np.empty(np.shape(a) + (2, 2), dtype=complex)
    out[..., 0, 0], out[..., 0, 1] = a, b
    out[..., 1, 0], out[..., 1, 1] = c, d
    return out


def frames(curve):
    """F_k with rows gamma_k and gamma_{k-1}."""
    return np.stack([curve.points, curve.shifted(-1)], axis=1)


def build_L(curve):
    """L_k = [[u_k / g_{k-1}, -g_k / g_{k-1}], [1, 0]]."""
    check_immersed(curve)
    g, u = curve.g, curve.u
    g_m1 = curve.seq_shift(g, -1)
    with np.errstate(invalid="ignore"):
        return _mat(u / g_m1, -g / g_m1, np.ones_like(g), np.zeros_like(g))


def build_V(curve, coeffs):
    """V_k with F_dot_k = V_k F_k for the flow (alpha, beta).

    v11 = alpha_k + beta_k / g_{k-1}
    v12 = -(1 + g_k / g_{k-1}) beta_k / u_k
    v21 = (1 + g_{k-2} / g_{k-1}) beta_{k-1} / u_{k-1}
    v22 = alpha_{k-1} - beta_{k-1} / g_{k-1}
    """
    check_immersed(curve)
    c = _coeffs_for(curve, coeffs)
    sh = curve.seq_shift
    g, u = curve.g, curve.u
    g_m1, g_m2 = sh(g, -1), sh(g, -2)
    al, be = c.alpha, c.beta
    al_m1, be_m1 = sh(al, -1), sh(be, -1)
    return _mat(
        al + be / g_m1,
        -(1 + g / g_m1) * be / u,
        (1 + g_m2 / g_m1) * be_m1 / sh(u, -1),
        al_m1 - be_m1 / g_m1,
    )


def transport_residual(curve):
    """max |L_k F_k - F_{k+1}|."""
    F = frames(curve)
    return mat_norm(build_L(curve) @ F - curve.seq_shift(F, 1))


def frame_velocity_residual(curve, coeffs):
    """max |V_k F_k - F_dot_k| with F_dot from the curve velocity."""
    from .flows import velocity

    v = velocity(curve, coeffs)
    F_dot = np.stack([v, curve.seq_shift(v, -1)], axis=1)
    return mat_norm(build_V(curve, coeffs) @ frames(curve) - F_dot)


def zero_curvature(L, V, periodic=True):
    """V_{k+1} L_k - L_k V_k."""
    return shift(V, 1, periodic) @ L - L @ V


def L_rate(curve, coeffs):
    """Exact L_dot_k from the induced rates of g and u."""
    r = induced_rates(curve, coeffs)
    sh = curve.seq_shift
    g, u = curve.g, curve.u
    g_m1, gd_m1 = sh(g, -1), sh(r.g_rate, -1)
    zero = np.zeros_like(g)
    return _mat(
        r.u_rate / g_m1 - u * gd_m1 / g_m1**2,
        -r.g_rate / g_m1 + g * gd_m1 / g_m1**2,
        zero,
        zero,
    )


def instant_compat_residual(curve, coeffs):
    """max |L_dot_k - (V_{k+1} L_k - L_k V_k)| at one instant, L_dot exact."""
    c = _coeffs_for(curve, coeffs)
    L = build_L(curve)
    V = build_V(curve, c)
    return mat_norm(L_rate(curve, c) - zero_curvature(L, V, curve.periodic))


def compat_residual(trajectory, coeffs):
    """Zero-curvature residual along a trajectory with L_dot by central differences.

    Parameters
    ----------
    trajectory : Trajectory
        Output of :func:`todacurves.flows.integrate` on a lifted curve.
    coeffs : FlowCoefficients or callable
        The flow that produced the trajectory.

    Returns
    -------
    float
        max over interior times and indices of |L_dot - (V_{k+1} L - L V_k)|.
    """
    states = trajectory.states
    if len(states) < 3:
        raise ValueError("need at least three states for central differences")
    Ls = [build_L(s) for s in states]
    worst = 0.0
    for n in range(1, len(states) - 1):
        L_dot = (Ls[n + 1] - Ls[n - 1]) / (2 * trajectory.dt)
        V = build_V(states[n], coeffs)
        worst = max(worst, mat_norm(L_dot - zero_curvature(Ls[n], V, states[n].periodic)))
    return worst


# Volterra gauge chain


def volterra_gauge(curve, coeffs=None):
    """Gauge the tangential-flow pair by E_k = prod_{i<k} u_i diag(1, u_k).

    Returns
    -------
    LaxData
        L~_k = E_{k+1}^-1 L_k E_k, which equals [[1, -1], [Q_k, 0]], and
        V~_k = E_k^-1 V_k E_k - E_k^-1 E_dot_k with its constant scalar part
        (see :func:`volterra_gauge_constant`) removed.

    Raises
    ------
    NotArcLength
        If g is not identically 1.
    """
    require_arclength(curve)
    from .arclength import tangential_coeffs

    if coeffs is None:
        coeffs = tangential_coeffs(curve)
    Lt, Vt = _gauged(curve, coeffs)
    const = volterra_gauge_constant(curve)
    return LaxData(Lt, Vt - const * np.eye(2))


def _gauged(curve, coeffs):
    sh = curve.seq_shift
    u = curve.u
    u_p1 = sh(u, 1)
    L = build_L(curve)
    V = build_V(curve, coeffs)
    # prefix products cancel in L~ up to the factor u_k
    E = _mat(np.ones_like(u), 0 * u, 0 * u, u)
    E_next_inv = _mat(1 / u, 0 * u, 0 * u, 1 / (u * u_p1))
    Lt = E_next_inv @ L @ E
    E_inv = _mat(np.ones_like(u), 0 * u, 0 * u, 1 / u)
    ud_over_u = induced_rates(curve, coeffs).u_rate / u
    # derivative of the log of the empty-at-k=0 prefix product
    prefix = np.concatenate([[0.0], np.cumsum(ud_over_u[:-1])])
    EdE = _mat(prefix, 0 * u, 0 * u, prefix + ud_over_u)
    Vt = E_inv @ V @ E - EdE
    return Lt, Vt


def volterra_gauge_constant(curve):
    """Scalar -(Q_{-1} + 1/2) dropped from V~ (the prefix starts at index 0)."""
    return -(curve.Q[-1] + 0.5)


def volterra_principal_V(Q, periodic=True):
    """[[1 + Q_{k-1}, -1], [Q_{k-1}, Q_k]]."""
    Q = np.asarray(Q, dtype=complex)
    Qm = shift(Q, -1, periodic)
    return _mat(1 + Qm, -np.ones_like(Q), Qm, Q)


def volterra_lax_pair(Q, lam, periodic=True):
    """Spectral form L^v_k = [[1, lam Q_k], [-1, 0]],
    V^v_k = [[1 + lam Q_{k+1}, lam Q_{k+1}], [-1, lam Q_k]].

    They satisfy lam L^v_dot_k = V^v_k L^v_k - L^v_k V^v_{k-1} whenever Q solves
    the Volterra lattice.
    """
    Q = np.asarray(Q, dtype=complex)
    Qp = shift(Q, 1, periodic)
    one = np.ones_like(Q)
    L = _mat(one, lam * Q, -one, 0 * Q)
    V = _mat(1 + lam * Qp, lam * Qp, -one, lam * Q)
    return LaxData(L, V, lam)


def volterra_lax_defect(Q, Q_dot, lam, periodic=True):
    """lam L^v_dot - (V^v_k L^v_k - L^v_k V^v_{k-1}) for given Q and Q_dot."""
    pair = volterra_lax_pair(Q, lam, periodic)
    L_dot = _mat(0 * Q, lam * np.asarray(Q_dot), 0 * Q, 0 * Q)
    rhs = pair.V @ pair.L - pair.L @ shift(pair.V, -1, periodic)
    return lam * L_dot - rhs


def volterra_lax_residual(Q, lam, periodic=True):
    """Instantaneous residual with Q_dot from the Volterra lattice."""
    return mat_norm(volterra_lax_defect(Q, volterra_rhs(Q, periodic), lam, periodic))


def gauged_compat_residual(trajectory, lam=1.0):
    """Spectral-form compatibility along a trajectory, Q_dot by central differences."""
    states = trajectory.states
    Qs = np.array([s.Q for s in states])
    Q_dot = (Qs[2:] - Qs[:-2]) / (2 * trajectory.dt)
    periodic = states[0].periodic
    return max(
        mat_norm(volterra_lax_defect(Qs[n + 1], Q_dot[n], lam, periodic))
        for n in range(len(Q_dot))
    )


def classical_volterra_form(pair, zeta):
    """Constant gauge diag(zeta^(1/2), zeta^(-1/2)) applied to the spectral pair at lam = zeta^-2.

    ``pair`` must have been built with ``lam = zeta**-2``.  Principal square
    roots are used.
    """
    r = np.sqrt(complex(zeta))
    E = np.diag([r, 1 / r])
    E_inv = np.diag([1 / r, r])
    return LaxData(E @ pair.L @ E_inv, E @ pair.V @ E_inv, zeta)


# Toda identification


def constraint_residual(V, g, periodic=True):
    """v12_k + v21_{k+1} g_k / g_{k-1} at every index."""
    g = np.asarray(g, dtype=complex)
    return V[:, 0, 1] + shift(V[:, 1, 0], 1, periodic) * g / shift(g, -1, periodic)


def coeffs_from_V(V, g, u, periodic=True, tol=1e-10):
    """Read the curve-flow coefficients off a V-matrix.

    alpha_k = v11_k + v12_k u_k / (g_{k-1} + g_k),
    beta_k = -v12_k g_{k-1} u_k / (g_{k-1} + g_k).

    Raises
    ------
    ConstraintViolated
        If v12_k != -v21_{k+1} g_k / g_{k-1} (relative to the entry size).
    """
    V = np.asarray(V, dtype=complex)
    g = np.asarray(g, dtype=complex)
    u = np.asarray(u, dtype=complex)
    res = np.abs(constraint_residual(V, g, periodic))
    scale = np.maximum(1.0, np.abs(V[:, 0, 1]))
    bad = np.flatnonzero(res > tol * scale)
    if bad.size:
        k = int(bad[0])
        raise ConstraintViolated(k, float(res[k]))
    g_m1 = shift(g, -1, periodic)
    v11, v12 = V[:, 0, 0], V[:, 0, 1]
    alpha = v11 + v12 * u / (g_m1 + g)
    beta = -v12 * g_m1 * u / (g_m1 + g)
    return FlowCoefficients(alpha, beta)


def trace_identity_residual(curve, coeffs):
    """max |tr V_{k+1} - g_dot_k / g_k|."""
    c = _coeffs_for(curve, coeffs)
    V = build_V(curve, c)
    tr = np.trace(V, axis1=1, axis2=2)
    r = induced_rates(curve, c)
    d = np.abs(curve.seq_shift(tr, 1) - r.g_rate / curve.g)
    d = d[np.isfinite(d)]
    return float(d.max()) if d.size else 0.0


def omega_regauge(L, V, q_ext, qdot_ext):
    """Regauge by Omega_k = diag(exp(q_k / 2), -exp(q_{k-1} / 2)).

    ``q_ext`` and ``qdot_ext`` hold q_{-1} .. q_N (length N + 2).  Returns
    L^_k = Omega_{k+1} L_k Omega_k^-1 and
    V^_k = Omega_k V_k Omega_k^-1 + Omega_dot_k Omega_k^-1.
    """
    q = np.asarray(q_ext, dtype=complex)
    qd = np.asarray(qdot_ext, dtype=complex)
    n = len(L)
    e = np.exp(q / 2)
    diag_k = (e[1 : n + 1], -e[0:n])
    diag_k1 = (e[2 : n + 2], -e[1 : n + 1])

    def dmat(d):
        return _mat(d[0], 0 * d[0], 0 * d[0], d[1])

    Om, Om1 = dmat(diag_k), dmat(diag_k1)
    Om_inv = dmat((1 / diag_k[0], 1 / diag_k[1]))
    L_hat = Om1 @ L @ Om_inv
    V_hat = Om @ V @ Om_inv + dmat((qd[1 : n + 1] / 2, qd[0:n] / 2))
    return LaxData(L_hat, V_hat)
