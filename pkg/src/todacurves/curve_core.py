"""Discrete curves in homogeneous coordinates.

A curve in CP^1 is stored through a lift gamma_k = (x_k, y_k) in C^2.  The
lift carries the edge determinants g_k = det(gamma_k, gamma_{k+1}), the second
determinants u_k = det(gamma_{k-1}, gamma_{k+1}) and the cross-ratios Q_k of
four consecutive points.

A periodic lift may be antiperiodic, gamma_{k+N} = -gamma_k (``twist=-1``);
it still describes a closed polygon, and g, u, Q stay N-periodic.  Regular
polygons with an even number of vertices only admit such unit-determinant
lifts.

Sequences are numpy arrays indexed like the points.  On an open chain the
entries whose stencil leaves the chain are NaN, so shifted formulas stay
aligned and undefined values propagate instead of wrapping around.
"""

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    DegenerateCrossRatio,
    HitsInfinity,
    InconsistentSeed,
    NotImmersed,
    PeriodicityObstruction,
    ZeroDeterminant,
)

# relative zero test for determinants, |det| < ZERO_TOL * |a| * |b|
ZERO_TOL = 1e-12
# relative mismatch tolerated when closing a periodic lift
CLOSURE_TOL = 1e-9


def shift(a, j, periodic):
    """Return ``b`` with ``b[k] = a[k + j]`` along the first axis.

    Periodic sequences wrap around; open ones are padded with NaN.
    """
    a = np.asarray(a)
    if periodic:
        return np.roll(a, -j, axis=0)
    out = np.full_like(a, np.nan, dtype=np.result_type(a.dtype, float))
    n = a.shape[0]
    if j >= 0:
        if j < n:
            out[: n - j] = a[j:]
    elif -j < n:
        out[-j:] = a[: n + j]
    return out


def as_point(p):
    """Validate a homogeneous coordinate pair and return it as a complex array."""
    p = np.asarray(p, dtype=complex).reshape(2)
    if not np.all(np.isfinite(p)):
        raise ValueError(f"non-finite homogeneous coordinates {p}")
    if p[0] == 0 and p[1] == 0:
        raise ValueError("(0, 0) is not a valid homogeneous coordinate")
    return p


def det2(a, b):
    """Determinant a.x*b.y - a.y*b.x; broadcasts over leading axes."""
    a = np.asarray(a)
    b = np.asarray(b)
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _small(d, a, b):
    scale = np.linalg.norm(np.asarray(a), axis=-1) * np.linalg.norm(np.asarray(b), axis=-1)
    return np.abs(d) <= ZERO_TOL * scale


def cross_ratio(a, b, c, d):
    """Cross-ratio det(a,b) det(c,d) / (det(b,c) det(d,a)) of four points of C^2.

    The value only depends on the projective classes of the arguments.

    Raises
    ------
    DegenerateCrossRatio
        If b ~ c or d ~ a projectively.
    """
    a, b, c, d = (np.asarray(x, dtype=complex) for x in (a, b, c, d))
    dbc = det2(b, c)
    dda = det2(d, a)
    if np.any(_small(dbc, b, c)) or np.any(_small(dda, d, a)):
        raise DegenerateCrossRatio("cross-ratio denominator vanishes")
    return det2(a, b) * det2(c, d) / (dbc * dda)


@dataclass(frozen=True)
class InvariantData:
    """Edge determinants g, second determinants u and cross-ratios Q."""

    g: np.ndarray
    u: np.ndarray
    Q: np.ndarray


@dataclass(frozen=True, eq=False)
class CurveC2:
    """Lifted discrete curve gamma: index -> C^2.

    Parameters
    ----------
    points : array_like, shape (N, 2)
        Homogeneous coordinates (x_k, y_k).
    periodic : bool
        If True, index k + N is identified with k.
    twist : {1, -1}
        gamma_{k+N} = twist * gamma_k for periodic curves.
    """

    points: np.ndarray
    periodic: bool = True
    twist: int = 1

    def __post_init__(self):
        if self.twist not in (1, -1):
            raise ValueError(f"twist must be 1 or -1, got {self.twist!r}")
        object.__setattr__(self, "twist", int(self.twist))
        pts = np.array(self.points, dtype=complex)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"points must have shape (N, 2), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("curve points must be finite")
        if np.any(np.all(pts == 0, axis=1)):
            raise ValueError("(0, 0) is not a valid homogeneous coordinate")
        min_len = 3 if self.periodic else 2
        if len(pts) < min_len:
            raise ValueError(f"need at least {min_len} points")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def shifted(self, j):
        """Point array with ``out[k] = gamma[k + j]`` (NaN-padded if open)."""
        return self.shift_points(self.points, j)

    def shift_points(self, a, j):
        """Shift a per-point vector array, applying the twist on wrapped rows."""
        out = shift(a, j, self.periodic)
        if self.periodic and self.twist != 1:
            n = len(self)
            laps = (np.arange(n) + j) // n
            out = out * (self.twist ** np.abs(laps))[:, None]
        return out

    def seq_shift(self, a, j):
        return shift(a, j, self.periodic)

    @cached_property
    def g(self):
        return det2(self.points, self.shifted(1))

    @cached_property
    def u(self):
        return det2(self.shifted(-1), self.shifted(1))

    @cached_property
    def Q(self):
        g, u, sh = self.g, self.u, self.seq_shift
        with np.errstate(invalid="ignore"):
            return sh(g, -1) * sh(g, 1) / (u * sh(u, 1))

    def with_points(self, points):
        return CurveC2(points, self.periodic, self.twist)

    def __eq__(self, other):
        if not isinstance(other, CurveC2):
            return NotImplemented
        return (
            self.periodic == other.periodic
            and self.twist == other.twist
            and np.array_equal(self.points, other.points)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class PlaneCurve:
    """Discrete curve c: index -> C (a curve in CP^1 avoiding infinity)."""

    points: np.ndarray
    periodic: bool = True

    def __post_init__(self):
        pts = np.array(self.points, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(pts)):
            raise ValueError("plane curve points must be finite")
        if len(pts) < (3 if self.periodic else 2):
            raise ValueError("too few points")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def seq_shift(self, a, j):
        return shift(a, j, self.periodic)

    @cached_property
    def edges(self):
        """S_k = c_{k+1} - c_k."""
        return self.seq_shift(self.points, 1) - self.points

    def is_arclength(self, tol=1e-10):
        S = self.edges
        S = S[np.isfinite(S)]
        return bool(np.all(np.abs(np.abs(S) - 1) <= tol))

    def with_points(self, points):
        return PlaneCurve(points, self.periodic)

    def __eq__(self, other):
        if not isinstance(other, PlaneCurve):
            return NotImplemented
        return self.periodic == other.periodic and np.array_equal(self.points, other.points)

    __hash__ = None


def check_immersed(curve):
    """Raise NotImmersed unless every defined g_k and u_k is nonzero."""
    pts = curve.points
    g_small = _small(curve.g, pts, curve.shifted(1))
    u_small = _small(curve.u, curve.shifted(-1), curve.shifted(1))
    for name, bad in (("g", g_small), ("u", u_small)):
        idx = np.flatnonzero(bad)
        if idx.size:
            raise NotImmersed(f"{name}[{idx[0]}] vanishes; curve is not immersed", int(idx[0]))


def extract_invariants(curve):
    """Compute (g, u, Q) of an immersed lifted curve.

    Raises
    ------
    NotImmersed
        If some defined g_k or u_k is zero.
    """
    check_immersed(curve)
    return InvariantData(g=curve.g, u=curve.u, Q=curve.Q)


def reconstruct(g, u, gamma0, gamma1, periodic=False):
    """Rebuild a lift from its determinants.

    Applies gamma_{k+1} = (u_k gamma_k - g_k gamma_{k-1}) / g_{k-1}.  For an open
    chain ``g`` has one entry per edge and the result has ``len(g) + 1`` points;
    ``u[0]`` is ignored.  For ``periodic=True`` both sequences have length N and
    the rebuilt points must close up, possibly with a sign (twisted lift).
    """
    g = np.asarray(g, dtype=complex)
    u = np.asarray(u, dtype=complex)
    gamma0 = as_point(gamma0)
    gamma1 = as_point(gamma1)
    d = det2(gamma0, gamma1)
    if abs(d - g[0]) > 1e-10 * max(1.0, abs(g[0])):
        raise InconsistentSeed(f"det(gamma0, gamma1) = {d} but g[0] = {g[0]}")
    n_edges = len(g)
    zeros = np.flatnonzero(np.abs(g) <= ZERO_TOL)
    if zeros.size:
        raise ZeroDeterminant(f"g[{zeros[0]}] = 0")
    n_points = n_edges if periodic else n_edges + 1
    pts = np.empty((n_points + (2 if periodic else 0), 2), dtype=complex)
    pts[0], pts[1] = gamma0, gamma1
    for k in range(1, len(pts) - 1):
        kk = k % n_edges
        pts[k + 1] = (u[kk] * pts[k] - g[kk] * pts[k - 1]) / g[kk - 1]
    twist = 1
    if periodic:
        scale = np.abs(pts[:2]).max()
        for twist in (1, -1):
            if np.abs(pts[n_points:] - twist * pts[:2]).max() <= 1e-8 * scale:
                break
        else:
            raise InconsistentSeed("invariants do not define a closed curve for this seed")
        pts = pts[:n_points]
    return CurveC2(pts, periodic, twist)


def normalize_arclength(curve, scale0=1.0):
    """Rescale the lift so that every edge determinant equals one.

    gamma_k is multiplied by lambda_k with lambda_0 = ``scale0`` and
    lambda_{k+1} = 1 / (g_k lambda_k).  A periodic curve whose scalings do not
    close up around the period cannot be normalized periodically; then a
    :class:`PeriodicityObstruction` warning is issued and the normalized open
    chain gamma_0 .. gamma_N is returned.  If they close up to a sign the
    result is a twisted lift.
    """
    check_immersed(curve)
    g = curve.g
    n = len(curve)
    n_edges = n if curve.periodic else n - 1
    lam = np.empty(n_edges + 1, dtype=complex)
    lam[0] = scale0
    for k in range(n_edges):
        lam[k + 1] = 1.0 / (g[k] * lam[k])
    if not curve.periodic:
        return CurveC2(curve.points * lam[:, None], periodic=False)
    # gamma'_N = lam_N gamma_N = lam_N twist gamma_0, so the new twist is twist lam_N / lam_0
    for sign in (1, -1):
        if abs(lam[n] - sign * lam[0]) <= CLOSURE_TOL * abs(lam[0]):
            return CurveC2(curve.points * lam[:n, None], True, curve.twist * sign)
    warnings.warn(
        f"no periodic unit-determinant lift (closing scale {lam[n] / lam[0]:.6g}); "
        "returning an open chain",
        PeriodicityObstruction,
        stacklevel=2,
    )
    pts = np.vstack([curve.points, curve.twist * curve.points[:1]]) * lam[:, None]
    return CurveC2(pts, periodic=False)


def closing_scale(curve):
    """Initial scale that lets an odd periodic curve normalize periodically.

    With N odd, lambda_N = P / lambda_0 for a fixed product P, so choosing
    lambda_0 = sqrt(P) closes the lift.
    """
    if not curve.periodic or len(curve) % 2 == 0:
        raise ValueError("closing_scale needs an odd periodic curve")
    g = curve.g
    lam = 1.0 + 0j
    for k in range(len(curve)):
        lam = 1.0 / (g[k] * lam)
    return np.sqrt(lam)


def project(curve):
    """Project a lift to the plane, c_k = x_k / y_k."""
    y = curve.points[:, 1]
    bad = np.flatnonzero(y == 0)
    if bad.size:
        raise HitsInfinity(int(bad[0]))
    return PlaneCurve(curve.points[:, 0] / y, curve.periodic)  # twist is projectively trivial


def lift_plane(plane):
    """The standard lift gamma_k = (c_k, 1)."""
    pts = np.stack([plane.points, np.ones(len(plane), dtype=complex)], axis=1)
    return CurveC2(pts, plane.periodic)
