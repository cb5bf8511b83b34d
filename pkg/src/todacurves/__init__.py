"""Integrable flows on discrete curves: Volterra and Toda hierarchies,
discrete mKdV, Backlund transformations and discrete elastica."""

from .curve_core import (
    CurveC2,
    InvariantData,
    PlaneCurve,
    cross_ratio,
    det2,
    extract_invariants,
    lift_plane,
    normalize_arclength,
    project,
    reconstruct,
)
from .errors import *  # noqa: F401,F403
from .flows import FlowCoefficients, Trajectory, induced_rates, integrate, plane_rate, velocity

__version__ = "0.1.0"
