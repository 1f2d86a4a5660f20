"""Exception types shared across the toolkit."""


class FeastubeError(Exception):
    """Base class for all toolkit errors."""


# --- problem registry / data ------------------------------------------------

class UnknownProblem(FeastubeError, KeyError):
    pass


class UnknownOverrideKey(FeastubeError, KeyError):
    pass


class InvalidOverrideValue(FeastubeError, ValueError):
    pass


class UnsupportedModulusForm(FeastubeError, TypeError):
    pass


class EmptyControlSet(FeastubeError, ValueError):
    pass


# --- geometry ----------------------------------------------------------------

class NonFiniteConstraint(FeastubeError, ValueError):
    pass


class ProjectionFailed(FeastubeError, RuntimeError):
    pass


class InfeasibleInput(FeastubeError, ValueError):
    pass


class EmptySourceSet(FeastubeError, ValueError):
    pass


# --- margin verification -----------------------------------------------------

class LpFailure(FeastubeError, RuntimeError):
    """Internal LP failure (unbounded or infeasible game); must not occur."""


class BoundarySamplingFailed(FeastubeError, RuntimeError):
    pass


class NoFeasibleConstants(FeastubeError, ValueError):
    pass


# --- trajectories ------------------------------------------------------------

class NonFiniteState(FeastubeError, FloatingPointError):
    pass


class ViabilityLost(FeastubeError, RuntimeError):
    pass


class ConstantsInfeasible(FeastubeError, ValueError):
    pass


class CorrectionFailed(FeastubeError, RuntimeError):
    pass


class InfeasibleStart(FeastubeError, ValueError):
    pass


# --- value fields ------------------------------------------------------------

class DiscountTooSmall(FeastubeError, ValueError):
    pass


class GridTooCoarse(FeastubeError, RuntimeError):
    pass


class OutOfGrid(FeastubeError, ValueError):
    pass


class GridMismatch(FeastubeError, ValueError):
    pass


# --- analysis ----------------------------------------------------------------

class DiscountBelowThreshold(FeastubeError, ValueError):
    pass


class TrajectoryOutOfGrid(FeastubeError, ValueError):
    pass


class ProbeInfeasible(FeastubeError, ValueError):
    pass
