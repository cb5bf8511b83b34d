"""Arc-length parametrized plane polygons.

Edges S_k = c_{k+1} - c_k have unit length.  Flows are written as
c_dot_k = beta_k M^h(S_{k-1}, S_k) with the harmonic mean
M^h(a, b) = 2ab / (a + b), which points along the vertex tangent.  Then
S_dot_k = i mu_k S_k and the flow keeps |S_k| = 1 exactly when mu is real.
"""

import numpy as np

from .curve_core import PlaneCurve, shift
from .errors import BlowUp, CuspError, NotArcLength

UNIT_TOL = 1e-8
IMAG_TOL = 1e-10
# guard inside the flows: Runge-Kutta stage states leave |S_k| = 1 by O(dt^2)
FLOW_TOL = 1e-3
# clamped ends of open chains stretch their edges; the defect decays roughly
# 40-fold per edge inwards, so the guard skips this many edges at each end
OPEN_MARGIN = 8


def require_unit_edges(plane, tol=UNIT_TOL):
    S = plane.edges[np.isfinite(plane.edges)]
    dev = float(np.abs(np.abs(S) - 1).max()) if S.size else 0.0
    if dev > tol:
        raise NotArcLength(f"max ||S_k| - 1| = {dev:.3e}")


def _require_flow_edges(plane):
    """Unit-edge guard used inside the flows; see ``OPEN_MARGIN`` for open chains."""
    if plane.periodic:
        require_unit_edges(plane, FLOW_TOL)
        return
    S = plane.edges[OPEN_MARGIN : len(plane) - 1 - OPEN_MARGIN]
    dev = float(np.abs(np.abs(S) - 1).max()) if S.size else 0.0
    if dev > FLOW_TOL:
        raise NotArcLength(f"max ||S_k| - 1| = {dev:.3e}")


def harmonic_mean(a, b):
    with np.errstate(invalid="ignore"):
        return 2 * a * b / (a + b)


def _cusp_check(S_prev, S):
    bad = np.flatnonzero(np.abs(S_prev + S) <= 1e-12)
    if bad.size:
        raise CuspError(int(bad[0]))


def curvature(plane, check=True):
    """kappa_k = 2 tan(theta_k / 2) for the turning angle theta_k at vertex k.

    Evaluated as 2i(1 - r)/(1 + r), r = S_k / S_{k-1}.  Undefined ends of open
    chains are NaN.

    Raises
    ------
    NotArcLength
        If some |S_k| differs from 1 (only when ``check``).
    CuspError
        If S_{k-1} + S_k = 0.
    """
    if check:
        require_unit_edges(plane)
    S = plane.edges
    S_prev = plane.seq_shift(S, -1)
    _cusp_check(S_prev, S)
    with np.errstate(invalid="ignore"):
        r = S / S_prev
        kappa = 2j * (1 - r) / (1 + r)
    if check:
        im = np.abs(kappa.imag)
        bad = np.flatnonzero(im > IMAG_TOL * (1 + np.abs(kappa.real)))
        if bad.size:
            raise NotArcLength(f"curvature at {bad[0]} has imaginary part {im[bad[0]]:.3e}")
    return kappa.real


def curvature_values(plane):
    """Curvature without validation (for output of drifting states)."""
    return curvature(plane, check=False)


def mu_from_beta(kappa, beta, periodic=True):
    """Edge rotation rate mu_k with S_dot_k = i mu_k S_k.

    mu_k = (beta_{k+1} kappa_{k+1} + beta_k kappa_k)/2 - i (beta_{k+1} - beta_k).
    """
    kappa = np.asarray(kappa, dtype=float)
    beta = np.asarray(beta, dtype=complex)
    k1, b1 = shift(kappa, 1, periodic), shift(beta, 1, periodic)
    return 0.5 * (b1 * k1 + beta * kappa) - 1j * (b1 - beta)


def plane_flow(plane, beta):
    """c_dot_k = beta_k M^h(S_{k-1}, S_k)."""
    S = plane.edges
    S_prev = plane.seq_shift(S, -1)
    _cusp_check(S_prev, S)
    return np.asarray(beta) * harmonic_mean(S_prev, S)


def tangential_flow(plane):
    """Tangential flow c_dot_k = 2 M^h(S_{k-1}, S_k) = 2 (S_{k-1} + S_k) / (1 + <S_{k-1}, S_k>).

    Under it kappa_dot_k = (1 + kappa_k^2 / 4)(kappa_{k+1} - kappa_{k-1}).
    """
    _require_flow_edges(plane)
    return plane_flow(plane, 2.0)


def mkdv_beta(kappa, periodic=True):
    """beta_k = (kappa_k kappa_{k-1} + kappa_{k+1} kappa_k + 2i(kappa_{k+1} - kappa_{k-1}) + 96) / 128."""
    kappa = np.asarray(kappa, dtype=float)
    kp, km = shift(kappa, 1, periodic), shift(kappa, -1, periodic)
    return (kappa * km + kp * kappa + 2j * (kp - km) + 96) / 128


def mkdv_flow(plane):
    """Discrete mKdV flow c_dot_k = mkdv_beta(kappa)_k M^h(S_{k-1}, S_k).

    The curvature then evolves by :func:`discrete_mkdv_rhs`.  On open chains
    the two end vertices on each side have no velocity and stay clamped.
    """
    _require_flow_edges(plane)
    kappa = curvature_values(plane)
    return plane_flow(plane, mkdv_beta(kappa, plane.periodic))


def kappa_tangential_rhs(kappa, periodic=True):
    """(1 + kappa_k^2 / 4)(kappa_{k+1} - kappa_{k-1})."""
    kappa = np.asarray(kappa, dtype=float)
    return (1 + kappa**2 / 4) * (shift(kappa, 1, periodic) - shift(kappa, -1, periodic))


def _mkdv_bracket(kappa, periodic):
    def sh(j):
        return shift(kappa, j, periodic)

    return (1 / 64) * (
        (sh(1) ** 2 / 4 + 1) * (sh(2) + kappa) - (sh(-1) ** 2 / 4 + 1) * (kappa + sh(-2))
    )


def discrete_mkdv_rhs(kappa, periodic=True):
    """kappa_dot_k = (1 + kappa_k^2/4) [ (11/32)(kappa_{k+1} - kappa_{k-1})
    + (1/64)((kappa_{k+1}^2/4 + 1)(kappa_{k+2} + kappa_k)
             - (kappa_{k-1}^2/4 + 1)(kappa_k + kappa_{k-2})) ]."""
    kappa = np.asarray(kappa, dtype=float)
    diff = shift(kappa, 1, periodic) - shift(kappa, -1, periodic)
    return (1 + kappa**2 / 4) * (11 / 32 * diff + _mkdv_bracket(kappa, periodic))


def arc_preservation_residual(kappa, beta, periodic=True):
    """max_k |Re(beta_{k+1} - beta_k) - Im(kappa_{k+1} beta_{k+1} + kappa_k beta_k) / 2|.

    Zero exactly when every mu_k is real, i.e. when c_dot = beta M^h keeps
    all edge lengths.
    """
    kappa = np.asarray(kappa, dtype=float)
    beta = np.asarray(beta, dtype=complex)
    b1, k1 = shift(beta, 1, periodic), shift(kappa, 1, periodic)
    r = np.abs((b1 - beta).real - 0.5 * (k1 * b1 + kappa * beta).imag)
    r = r[np.isfinite(r)]
    return float(r.max()) if r.size else 0.0


def edge_rate(plane, rate):
    """S_dot_k / S_k for a vertex velocity ``rate``."""
    rate = np.asarray(rate, dtype=complex)
    return (plane.seq_shift(rate, 1) - rate) / plane.edges


def q_from_kappa(kappa, periodic=True):
    """Q_k = (2i(kappa_{k+1} - kappa_k) + kappa_k kappa_{k+1} + 4) / 16."""
    kappa = np.asarray(kappa, dtype=float)
    k1 = shift(kappa, 1, periodic)
    return (2j * (k1 - kappa) + kappa * k1 + 4) / 16


def q_from_edges(plane):
    """Q_k = S_{k-1} S_{k+1} / ((S_{k-1} + S_k)(S_k + S_{k+1}))."""
    S = plane.edges
    Sm, Sp = plane.seq_shift(S, -1), plane.seq_shift(S, 1)
    return Sm * Sp / ((Sm + S) * (S + Sp))


def curve_from_curvature(kappa, start=0.0, first_edge=1.0):
    """Open unit-edge polygon with turning angle 2 atan(kappa_k / 2) at vertex k.

    ``kappa`` has N entries; the polygon has N + 1 points c_0 .. c_N with
    c_0 = ``start`` and S_0 = ``first_edge``.  kappa_0 belongs to the edge
    before c_0 and is not realized; vertices 1 .. N-1 carry kappa_1 .. kappa_{N-1}.
    """
    kappa = np.asarray(kappa, dtype=float)
    theta = 2 * np.arctan(kappa / 2)
    theta[0] = 0.0
    S = first_edge * np.exp(1j * np.cumsum(theta))
    pts = np.concatenate([[start], start + np.cumsum(S)])
    return PlaneCurve(pts, periodic=False)


def elastica_kappa(kappa0, kappa1, a, b=0.0, c0=0.0, n=50, guard=1e8):
    """Curvatures kappa_0 .. kappa_{n-1} of a generalized discrete elastica.

    kappa_{k+1} = 2a kappa_k / (1 + kappa_k^2/4) - kappa_{k-1} + b + c_k,
    c_k = c0 (-1)^k.

    Raises
    ------
    BlowUp
        If some |kappa| exceeds ``guard``.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    kappa = np.empty(n)
    kappa[0], kappa[1] = kappa0, kappa1
    for k in range(1, n - 1):
        c_k = c0 * (-1) ** k
        kappa[k + 1] = 2 * a * kappa[k] / (1 + kappa[k] ** 2 / 4) - kappa[k - 1] + b + c_k
        if not np.isfinite(kappa[k + 1]) or abs(kappa[k + 1]) > guard:
            raise BlowUp(k + 1, abs(kappa[k + 1]))
    return kappa


def elastica_generate(kappa0, kappa1, a, b=0.0, c0=0.0, n=50):
    """Generalized elastica: curvature sequence and its polygon from c_0 = 0, S_0 = 1."""
    kappa = elastica_kappa(kappa0, kappa1, a, b, c0, n)
    return kappa, curve_from_curvature(kappa)


def elastica_recursion_residual(kappa, a, b=0.0, c0=0.0):
    kappa = np.asarray(kappa, dtype=float)
    k = np.arange(1, len(kappa) - 1)
    pred = 2 * a * kappa[k] / (1 + kappa[k] ** 2 / 4) - kappa[k - 1] + b + c0 * (-1.0) ** k
    return float(np.abs(kappa[k + 1] - pred).max()) if k.size else 0.0


def invariance_constant(a):
    """Constant a_c for which an elastica with parameter a solves the mKdV
    stationarity condition, a_c = (a + 11) / 32."""
    return (a + 11) / 32


def kappa_constraint_defect(kappa, a_c, periodic=False):
    """(a_c - 11/32)(kappa_{k+1} - kappa_{k-1}) - (1/64)(...), NaN where undefined.

    Vanishing means the mKdV curvature rate is a_c times the tangential one.
    """
    kappa = np.asarray(kappa, dtype=float)
    diff = shift(kappa, 1, periodic) - shift(kappa, -1, periodic)
    return (a_c - 11 / 32) * diff - _mkdv_bracket(kappa, periodic)


def kappa_constraint_residual(kappa, a_c, periodic=False):
    d = np.abs(kappa_constraint_defect(kappa, a_c, periodic))
    d = d[np.isfinite(d)]
    return float(d.max()) if d.size else 0.0


def elastica_invariance_residual(kappa, a, periodic=False):
    """Constraint residual of ``kappa`` with the constant belonging to elastica parameter ``a``."""
    return kappa_constraint_residual(kappa, invariance_constant(a), periodic)
