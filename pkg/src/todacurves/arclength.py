"""Flows preserving conformal arc length (g == 1).

With g == 1 the general flow keeps the edge determinants fixed exactly when
alpha_{k+1} + alpha_k = beta_k - beta_{k+1}.  The cross-ratios then follow
the Volterra hierarchy: beta == 1/2 gives the Volterra lattice, and
beta_k = (Q_{k-1} + Q_k + 1) / 2 its second flow.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .curve_core import shift
from .errors import (
    ExperimentalLevelWarning,
    NonTelescoping,
    NotArcLength,
    PeriodicityObstruction,
    ZeroLambda,
)
from .flows import FlowCoefficients

# max |g_k - 1| accepted by the coefficient builders; Runge-Kutta stage
# states sit O(dt^2) off the normalized lifts, unnormalized lifts are off by O(1)
ARCLENGTH_TOL = 1e-3


def check_arclength_constraint(coeffs, periodic=True, tol=1e-12):
    """Test alpha_{k+1} + alpha_k = beta_k - beta_{k+1}, i.e. g_dot = 0 at g == 1.

    Returns
    -------
    (bool, float)
        Whether every defined residual is within ``tol`` and the largest one.
    """
    a, b = coeffs.alpha, coeffs.beta
    res = np.abs(shift(a, 1, periodic) + a + (shift(b, 1, periodic) - b))
    res = res[np.isfinite(res)]
    worst = float(res.max()) if res.size else 0.0
    return worst <= tol, worst


def require_arclength(curve, tol=ARCLENGTH_TOL):
    g = curve.g[np.isfinite(curve.g)]
    dev = float(np.abs(g - 1).max()) if g.size else 0.0
    if dev > tol:
        raise NotArcLength(f"max |g - 1| = {dev:.3e} exceeds {tol:.1e}")


def alpha_from_beta(beta, periodic=True):
    """Solve alpha_{k+1} + alpha_k = beta_k - beta_{k+1} for alpha.

    The recursion starts from alpha_0 = (beta_0 - beta_1) / 2.  For an odd
    period the unique periodic solution is returned instead.  For an even
    period a periodic alpha exists only if the alternating sum of the beta
    differences vanishes; otherwise a warning is issued and the returned alpha
    violates the constraint on the closing edge.  Alpha never affects the
    projected curve.
    """
    beta = np.asarray(beta, dtype=complex)
    n = len(beta)
    d = beta - shift(beta, 1, periodic)
    alpha = np.full(n, np.nan, dtype=complex)
    finite = np.flatnonzero(np.isfinite(d))
    if finite.size == 0:
        return alpha
    start = finite[0]
    signs = (-1.0) ** np.arange(n)
    if periodic and n % 2 == 1:
        alpha[0] = 0.5 * np.sum(signs * d)
    else:
        alpha[start] = 0.5 * d[start]
    for k in range(start, n - 1):
        alpha[k + 1] = d[k] - alpha[k]
    if periodic and n % 2 == 0:
        gap = abs(alpha[n - 1] + alpha[0] - d[n - 1])
        if gap > 1e-10 * max(1.0, np.abs(beta).max()):
            warnings.warn(
                f"no periodic alpha for this beta (closing residual {gap:.3e})",
                PeriodicityObstruction,
                stacklevel=2,
            )
    return alpha


def tangential_coeffs(curve):
    """Conformal tangential flow alpha == 0, beta == 1/2.

    Raises
    ------
    NotArcLength
        If the lift is not normalized to g == 1.
    """
    require_arclength(curve)
    n = len(curve)
    return FlowCoefficients(np.zeros(n), np.full(n, 0.5))


def volterra_rhs(Q, periodic=True):
    """Q_dot_k = Q_k (Q_{k+1} - Q_{k-1})."""
    Q = np.asarray(Q, dtype=complex)
    return Q * (shift(Q, 1, periodic) - shift(Q, -1, periodic))


def volterra2_rhs(Q, periodic=True):
    """Second Volterra flow.

    Q_dot_k = Q_k (Q_{k+1}(Q_{k+2} + Q_{k+1} + Q_k)
                   - Q_{k-1}(Q_k + Q_{k-1} + Q_{k-2})).
    """
    Q = np.asarray(Q, dtype=complex)
    p1, p2 = shift(Q, 1, periodic), shift(Q, 2, periodic)
    m1, m2 = shift(Q, -1, periodic), shift(Q, -2, periodic)
    return Q * (p1 * (p2 + p1 + Q) - m1 * (Q + m1 + m2))


def volterra2_coeffs(curve):
    """beta_k = (Q_{k-1} + Q_k + 1) / 2 with alpha from :func:`alpha_from_beta`."""
    require_arclength(curve)
    Q = curve.Q
    beta = 0.5 * (curve.seq_shift(Q, -1) + Q + 1)
    return FlowCoefficients(alpha_from_beta(beta, curve.periodic), beta)


def q_rate_unit_g(Q, beta, periodic=True):
    """Induced Q_dot for g == 1, written with Q and beta only."""
    Q = np.asarray(Q, dtype=complex)
    beta = np.asarray(beta, dtype=complex)

    def sh(a, j):
        return shift(a, j, periodic)

    return 2 * Q * (
        (Q - 1) * (sh(beta, 1) - beta) + sh(Q, 1) * sh(beta, 2) - sh(Q, -1) * sh(beta, -1)
    )


def conjecture_rhs(Q, a1, a2, periodic=True):
    """Level-two flow in bracket form, Q_dot_k / Q_k without the overall factor 2.

    a1 ((Q_k - 1)(Q_{k+1} - Q_{k-1}) + Q_{k+1}(Q_{k+2} + Q_{k+1})
        - Q_{k-1}(Q_{k-1} + Q_{k-2})) + a2 (Q_{k+1} - Q_{k-1}), times Q_k.

    The flow induced by beta_k = a1 (Q_k + Q_{k-1}) + a2 is twice this.
    """
    Q = np.asarray(Q, dtype=complex)
    p1, p2 = shift(Q, 1, periodic), shift(Q, 2, periodic)
    m1, m2 = shift(Q, -1, periodic), shift(Q, -2, periodic)
    bracket = (Q - 1) * (p1 - m1) + p1 * (p2 + p1) - m1 * (m1 + m2)
    return Q * (a1 * bracket + a2 * (p1 - m1))


@dataclass(frozen=True)
class HierarchyLevel:
    """Level of the beta iteration and its integration constants a_1..a_level.

    Missing constants default to 1/2, which reproduces the Volterra lattice at
    level 1 and its second flow at level 2.
    """

    level: int
    constants: tuple = field(default=())

    def __post_init__(self):
        if int(self.level) != self.level or self.level < 0:
            raise ValueError("level must be a non-negative integer")
        consts = tuple(complex(c) for c in self.constants)
        if len(consts) > self.level:
            raise ValueError(f"{len(consts)} constants given for level {self.level}")
        consts = consts + (0.5,) * (self.level - len(consts))
        object.__setattr__(self, "level", int(self.level))
        object.__setattr__(self, "constants", consts)


def _telescope(r, tol=1e-9):
    """Periodic zero-mean antiderivative b with b_{k+1} - b_k = r_k."""
    total = np.sum(r)
    if abs(total) > tol * max(1.0, np.abs(r).sum()):
        raise NonTelescoping(f"sum of rates over the period is {total:.3e}, not 0")
    b = np.concatenate([[0.0], np.cumsum(r[:-1])])
    return b - b.mean()


def hierarchy_beta(level, Q, periodic=True):
    """Beta of the given hierarchy level on a g == 1 curve with cross-ratios Q.

    Starting from the zero flow, each level solves
    beta^new_{k+1} - beta^new_k = (Q_dot_k / Q_k) / 2 for the flow induced by
    the previous beta (built with unit leading constant), scales it by a_1 and
    adds a_level.  Level 1 gives beta == a_1 and level 2 gives
    beta_k = a_1 (Q_k + Q_{k-1}) + a_2.  Levels above 2 need a periodic Q and
    emit :class:`ExperimentalLevelWarning`.

    Raises
    ------
    NonTelescoping
        If the rates do not sum to zero around the period.
    """
    if not isinstance(level, HierarchyLevel):
        level = HierarchyLevel(level)
    Q = np.asarray(Q, dtype=complex)
    n = level.level
    a = level.constants
    if n == 0:
        return np.zeros(len(Q), dtype=complex)
    if n == 1:
        return np.full(len(Q), a[0], dtype=complex)
    if n == 2:
        return a[0] * (Q + shift(Q, -1, periodic)) + a[1]
    if not periodic:
        raise ValueError("levels above 2 need a periodic Q")
    warnings.warn(
        f"hierarchy level {n} is produced by an unproven iteration",
        ExperimentalLevelWarning,
        stacklevel=2,
    )
    # unit-normalized chain: beta^(1) = 1, beta^(j) = telescope(rate(beta^(j-1)) / 2)
    beta = Q + shift(Q, -1, periodic)
    for _ in range(3, n + 1):
        r = q_rate_unit_g(Q, beta, periodic) / (2 * Q)
        beta = _telescope(r)
    return a[0] * beta + a[n - 1]


def hierarchy_coeffs(level, curve):
    """FlowCoefficients of a hierarchy level on a g == 1 curve."""
    require_arclength(curve)
    beta = hierarchy_beta(level, curve.Q, curve.periodic)
    return FlowCoefficients(alpha_from_beta(beta, curve.periodic), beta)


def associated_family(Q, lam):
    """Cross-ratios lam * Q_k of the associated curve c(lam).

    Such a family solves lam Q_dot(lam) = Q(lam)(Q_{k+1}(lam) - Q_{k-1}(lam))
    whenever Q solves the Volterra lattice.
    """
    if lam == 0:
        raise ZeroLambda("associated family needs lam != 0")
    return lam * np.asarray(Q, dtype=complex)
