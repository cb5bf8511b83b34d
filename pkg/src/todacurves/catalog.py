"""Named flows for the command line and the verification battery.

Names: ``tangential``, ``volterra2``, ``hierarchy:<level>``, ``toda:<1|2|3>``
on lifts, and ``tangential`` or ``mkdv`` on plane curves.
"""

from . import arclength, euclidean, toda
from .curve_core import CurveC2

LIFT_FLOWS = ("tangential", "volterra2", "hierarchy:<level>", "toda:1", "toda:2", "toda:3")
PLANE_FLOWS = ("tangential", "mkdv")


def _hierarchy(level):
    def field(curve):
        return arclength.hierarchy_coeffs(level, curve)

    return field


def parse_flow(name, kind="c2", lam=0.0):
    """Return the vector field of a named flow for curves of the given kind.

    For lifts the result maps a CurveC2 to FlowCoefficients; for plane curves
    it maps a PlaneCurve to vertex velocities.

    Raises
    ------
    ValueError
        For unknown names or a flow that does not apply to ``kind``.
    """
    base, _, arg = name.partition(":")
    if kind == "plane":
        if name == "tangential":
            return euclidean.tangential_flow
        if name == "mkdv":
            return euclidean.mkdv_flow
        raise ValueError(f"flow {name!r} does not act on plane curves; use one of {PLANE_FLOWS}")
    if name == "tangential":
        return arclength.tangential_coeffs
    if name == "volterra2":
        return arclength.volterra2_coeffs
    if base == "hierarchy":
        try:
            level = int(arg)
        except ValueError:
            raise ValueError(f"bad hierarchy level in {name!r}") from None
        arclength.HierarchyLevel(level)
        return _hierarchy(level)
    if base == "toda":
        if arg not in ("1", "2", "3"):
            raise ValueError(f"Toda flow must be toda:1, toda:2 or toda:3, got {name!r}")
        return toda.toda_field(int(arg), lam)
    if name == "mkdv":
        raise ValueError("mkdv acts on plane curves")
    raise ValueError(f"unknown flow {name!r}; choose from {LIFT_FLOWS} or {PLANE_FLOWS}")


def curve_kind(curve):
    return "c2" if isinstance(curve, CurveC2) else "plane"
