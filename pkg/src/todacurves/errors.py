"""Exception and warning types shared by all todacurves modules."""


class CurveError(ValueError):
    """Base class for every geometric failure raised by todacurves."""


class DegenerateCrossRatio(CurveError):
    """A cross-ratio denominator vanished (coincident projective points)."""


class NotImmersed(CurveError):
    """Some edge determinant g_k or second determinant u_k vanished."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class InconsistentSeed(CurveError):
    """Initial points do not match the prescribed determinant."""


class ZeroDeterminant(CurveError):
    """A determinant that must be nonzero was zero."""


class ZeroG(ZeroDeterminant):
    """An edge determinant g_k needed as a divisor was zero."""


class HitsInfinity(CurveError):
    def __init__(self, index):
        super().__init__(f"curve point {index} has y = 0 and projects to infinity")
        self.index = index


class DegenerateTriple(CurveError):
    def __init__(self, index):
        super().__init__(f"c[{index + 1}] == c[{index - 1}]; plane rate undefined at {index}")
        self.index = index


class FlowSingularity(CurveError):
    """Immersion was lost during integration."""

    def __init__(self, index, time):
        super().__init__(f"flow became singular at index {index}, t = {time:.6g}")
        self.index = index
        self.time = time


class NotArcLength(CurveError):
    """The curve is not conformal (or Euclidean) arc length parametrized."""


class NonTelescoping(CurveError):
    """The periodic sum of a telescoped difference does not vanish."""


class ZeroLambda(CurveError):
    pass


class ConstraintViolated(CurveError):
    """A V-matrix fails the 22-compatibility constraint of the Toda hierarchy."""

    def __init__(self, index, residual):
        super().__init__(
            f"V-matrix constraint violated at index {index} (residual {residual:.3e})"
        )
        self.index = index
        self.residual = residual


class CuspError(CurveError):
    """Consecutive unit edges point in opposite directions (infinite curvature)."""

    def __init__(self, index):
        super().__init__(f"half-turn at vertex {index}: curvature is infinite")
        self.index = index


class BlowUp(CurveError):
    def __init__(self, index, value):
        super().__init__(f"curvature recursion overflowed at index {index} (|kappa| = {value:.3e})")
        self.index = index


class DegenerateStep(CurveError):
    """A Backlund step has no unique solution."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class IdentityMonodromy(CurveError):
    """The monodromy is scalar, so every initial point gives a periodic transform."""


class DefectiveMonodromy(CurveError):
    """The monodromy has a single (double) fixed point."""

    def __init__(self, fixpoint):
        super().__init__("monodromy has a repeated eigenvalue; single fixed point")
        self.fixpoint = fixpoint


class PeriodicityObstruction(UserWarning):
    """A periodic curve admits no periodic lift with unit edge determinants."""


class ExperimentalLevelWarning(UserWarning):
    """Hierarchy levels above 2 rely on an unproven construction."""
