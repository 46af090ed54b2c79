"""Exception hierarchy for corona-lab.

Every raisable condition named in the module contracts gets its own class so
callers (and the CLI) can report (module, op, index) context precisely.
"""


class CoronaLabError(Exception):
    """Base class for all corona-lab errors."""


class ConfigError(CoronaLabError):
    """Bad or missing configuration key; message names the offending key."""


# geometry
class InvalidLambda(ConfigError):
    pass


class NonmonotoneLambda(ConfigError):
    pass


class DepthZero(ConfigError):
    pass


class BadIndex(CoronaLabError):
    pass


class RootHasNoParentScale(CoronaLabError):
    pass


class LeafHasNoCross(CoronaLabError):
    pass


class EmptyFrame(CoronaLabError):
    pass


class PointOnK(CoronaLabError):
    pass


# potential theory
class PointNotInterior(CoronaLabError):
    pass


class NoConvergence(CoronaLabError):
    pass


class FitUnderdetermined(CoronaLabError):
    pass


# capacity / Cauchy
class SingularPoint(CoronaLabError):
    pass


class DepthOrder(CoronaLabError):
    pass


class BadBall(CoronaLabError):
    pass


class NoNearbySquare(CoronaLabError):
    pass


class NotDoubleZero(CoronaLabError):
    pass


# disc machinery
class MapDiverged(CoronaLabError):
    pass


class ArcsOverlap(CoronaLabError):
    """Raised when the gamma* arcs are not hyperbolically separated.

    Message carries a suggested remedy (increase c1 or decrease depth/delta).
    """


class QuadratureFail(CoronaLabError):
    pass


class InterpolationIllConditioned(CoronaLabError):
    pass


class CellTooLarge(CoronaLabError):
    pass


class DataBelowEta(CoronaLabError):
    pass
