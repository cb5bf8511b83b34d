"""General flows gamma_dot = alpha gamma + (beta / u)(gamma_{k+1} - gamma_{k-1}).

Any variation of an immersed lift has this form.  The module evaluates the
velocity, the rates it induces on g, u, Q and on the projected curve, and
integrates flows with a fixed-step classical Runge-Kutta method.
"""

import csv
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .curve_core import CurveC2, PlaneCurve, ZERO_TOL, check_immersed, shift
from .errors import DegenerateTriple, FlowSingularity, NotImmersed


@dataclass(frozen=True)
class FlowCoefficients:
    """Per-index coefficients (alpha_k, beta_k) of the general flow."""

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=complex)
        b = np.asarray(self.beta, dtype=complex)
        a, b = np.broadcast_arrays(a, b)
        object.__setattr__(self, "alpha", np.array(a))
        object.__setattr__(self, "beta", np.array(b))

    @classmethod
    def constant(cls, n, alpha=0.0, beta=0.0):
        return cls(np.full(n, alpha, dtype=complex), np.full(n, beta, dtype=complex))

    def beta_hat(self, g, periodic=True):
        """Normalized variable beta_k (g_{k+1} + g_{k-1}).  Not used elsewhere."""
        return self.beta * (shift(g, 1, periodic) + shift(g, -1, periodic))

    def __add__(self, other):
        return FlowCoefficients(self.alpha + other.alpha, self.beta + other.beta)

    def __mul__(self, scalar):
        return FlowCoefficients(scalar * self.alpha, scalar * self.beta)

    __rmul__ = __mul__


CoefficientField = Union[FlowCoefficients, Callable[[CurveC2], FlowCoefficients]]


def _coeffs_for(curve, coeffs):
    c = coeffs(curve) if callable(coeffs) else coeffs
    if c.alpha.shape != (len(curve),):
        raise ValueError(
            f"coefficients have shape {c.alpha.shape}, curve has {len(curve)} points"
        )
    return c


def velocity(curve, coeffs):
    """gamma_dot_k = alpha_k gamma_k + (beta_k / u_k)(gamma_{k+1} - gamma_{k-1}).

    ``coeffs`` is a FlowCoefficients or a callable producing one from the curve.
    Returns an (N, 2) array; on open chains the rows whose stencil is
    incomplete are NaN.
    """
    check_immersed(curve)
    c = _coeffs_for(curve, coeffs)
    tangent = curve.shifted(1) - curve.shifted(-1)
    with np.errstate(invalid="ignore"):
        return c.alpha[:, None] * curve.points + (c.beta / curve.u)[:, None] * tangent


@dataclass(frozen=True)
class InducedRates:
    g_rate: np.ndarray
    u_rate: np.ndarray
    q_rate: np.ndarray


def induced_rates(curve, coeffs):
    """Time derivatives of g, u and Q produced by the flow ``coeffs``."""
    check_immersed(curve)
    c = _coeffs_for(curve, coeffs)
    sh = curve.seq_shift
    g, u, Q = curve.g, curve.u, curve.Q
    al, be = c.alpha, c.beta
    g_m1, g_m2, g_p1, g_p2 = sh(g, -1), sh(g, -2), sh(g, 1), sh(g, 2)
    be_m1, be_p1, be_p2 = sh(be, -1), sh(be, 1), sh(be, 2)

    g_rate = g * (sh(al, 1) + al) + be_p1 - be
    u_rate = (
        u * (sh(al, -1) + sh(al, 1))
        + be_m1 * g / (sh(u, -1) * g_m1) * (g_m2 + g_m1)
        - be_p1 * g_m1 / (sh(u, 1) * g) * (g + g_p1)
        + u * (be_p1 / g - be_m1 / g_m1)
    )
    q_rate = Q * (
        (Q - 1) * (be_p1 * (1 / g_p1 + 1 / g) - be * (1 / g + 1 / g_m1))
        + sh(Q, 1) * be_p2 * (1 / g_p2 + 1 / g_p1)
        - sh(Q, -1) * be_m1 * (1 / g_m1 + 1 / g_m2)
    )
    return InducedRates(g_rate, u_rate, q_rate)


def plane_rate(plane, coeffs, g):
    """Velocity of c = x / y induced by the general flow.

    c_dot_k = beta_k (g_k + g_{k-1}) / (2 g_k g_{k-1})
              * 2 (c_{k+1} - c_k)(c_k - c_{k-1}) / (c_{k+1} - c_{k-1}).

    The alpha part does not move the projected curve.
    """
    beta = coeffs.beta if isinstance(coeffs, FlowCoefficients) else np.asarray(coeffs)
    g = np.asarray(g, dtype=complex)
    sh = plane.seq_shift
    c = plane.points
    c_next, c_prev = sh(c, 1), sh(c, -1)
    chord = c_next - c_prev
    bad = np.flatnonzero(np.abs(chord) <= ZERO_TOL * np.maximum(1.0, np.abs(c)))
    if bad.size:
        raise DegenerateTriple(int(bad[0]))
    g_m1 = sh(g, -1)
    return beta * (g + g_m1) / (2 * g * g_m1) * 2 * (c_next - c) * (c - c_prev) / chord


@dataclass(frozen=True)
class Trajectory:
    """States at uniformly spaced times t_0 + n dt."""

    times: np.ndarray
    states: list
    dt: float

    def __len__(self):
        return len(self.states)

    @property
    def final(self):
        return self.states[-1]


def rk4_step(y, t, dt, f):
    """One classical fourth-order Runge-Kutta step for y' = f(t, y)."""
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _lift_field(template, coeffs):
    def f(t, pts):
        curve = template.with_points(pts)
        try:
            v = velocity(curve, coeffs)
        except NotImmersed as exc:
            raise FlowSingularity(exc.index, t) from exc
        # vertices with an incomplete stencil (open chains) stay fixed
        return np.where(np.isfinite(v), v, 0.0)

    return f


def _plane_field(template, rate):
    def f(t, pts):
        v = rate(template.with_points(pts))
        return np.where(np.isfinite(v), v, 0.0)

    return f


def _check_lift(curve, t):
    g_bad = np.abs(curve.g) <= ZERO_TOL * np.linalg.norm(curve.points, axis=1) * np.linalg.norm(
        curve.shifted(1), axis=1
    )
    u_bad = np.abs(curve.u) <= ZERO_TOL * np.linalg.norm(
        curve.shifted(-1), axis=1
    ) * np.linalg.norm(curve.shifted(1), axis=1)
    idx = np.flatnonzero(g_bad | u_bad)
    if idx.size:
        raise FlowSingularity(int(idx[0]), t)


def _check_plane(plane, t):
    S = plane.edges
    sh = plane.seq_shift
    bad = (np.abs(S) <= ZERO_TOL) | (np.abs(sh(S, -1) + S) <= ZERO_TOL)
    idx = np.flatnonzero(bad)
    if idx.size:
        raise FlowSingularity(int(idx[0]), t)


def integrate(state, field, dt, steps, t0=0.0):
    """Integrate a curve flow with fixed-step classical RK4.

    Parameters
    ----------
    state : CurveC2 or PlaneCurve
        Initial curve.
    field :
        For a CurveC2, FlowCoefficients or a callable ``curve -> FlowCoefficients``
        (re-evaluated at every Runge-Kutta stage).  For a PlaneCurve, a callable
        ``plane -> rates`` returning c_dot.
    dt : float
        Step size, > 0.
    steps : int
        Number of steps, >= 1.

    Returns
    -------
    Trajectory
        All ``steps + 1`` states including the initial one.

    Raises
    ------
    FlowSingularity
        If immersion (or regularity of a plane curve) is lost.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if int(steps) < 1:
        raise ValueError("steps must be >= 1")
    steps = int(steps)
    if isinstance(state, CurveC2):
        f = _lift_field(state, field)
        check = _check_lift
    elif isinstance(state, PlaneCurve):
        f = _plane_field(state, field)
        check = _check_plane
    else:
        raise TypeError(f"cannot integrate {type(state).__name__}")

    states = [state]
    y = state.points
    for n in range(steps):
        t = t0 + n * dt
        y = rk4_step(y, t, dt, f)
        finite = np.isfinite(y) if y.ndim == 1 else np.isfinite(y).all(axis=1)
        if not finite.all():
            raise FlowSingularity(int(np.flatnonzero(~finite)[0]), t + dt)
        new = state.with_points(y)
        check(new, t + dt)
        states.append(new)
    times = t0 + dt * np.arange(steps + 1)
    return Trajectory(times, states, dt)


def central_difference(values, dt):
    """Second-order time derivative of a stacked series, interior samples only.

    ``values`` has time as its first axis; the result has two fewer samples and
    corresponds to ``values[1:-1]``.
    """
    values = np.asarray(values)
    return (values[2:] - values[:-2]) / (2 * dt)


# observables for CSV export; each maps a state to a per-index array
def _lift_observables():
    return {
        "x": lambda s: s.points[:, 0],
        "y": lambda s: s.points[:, 1],
        "g": lambda s: s.g,
        "u": lambda s: s.u,
        "Q": lambda s: s.Q,
    }


def _plane_observables():
    from .euclidean import curvature_values

    return {
        "c": lambda s: s.points,
        "S": lambda s: s.edges,
        "kappa": curvature_values,
    }


def observable_names(state):
    if isinstance(state, CurveC2):
        return list(_lift_observables())
    return list(_plane_observables())


def write_trajectory_csv(trajectory, path_or_file, observables=None):
    """Write a trajectory as CSV: t, k, then re/im columns per observable.

    Rows are time-major, then index.  Undefined entries (open-chain ends) are
    written as ``nan``.
    """
    first = trajectory.states[0]
    table = _lift_observables() if isinstance(first, CurveC2) else _plane_observables()
    names = observables or list(table)
    unknown = [n for n in names if n not in table]
    if unknown:
        raise ValueError(f"unknown observables {unknown}; choose from {sorted(table)}")
    header = ["t", "k"]
    for name in names:
        header += [f"re_{name}", f"im_{name}"]

    def _write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for t, s in zip(trajectory.times, trajectory.states):
            cols = [np.asarray(table[name](s), dtype=complex) for name in names]
            for k in range(len(s)):
                row = [f"{t:.10g}", str(k)]
                for col in cols:
                    row += [f"{col[k].real:.17g}", f"{col[k].imag:.17g}"]
                w.writerow(row)

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as fh:
            _write(fh)
