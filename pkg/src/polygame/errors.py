"""Exception types shared across the package."""


class PolygameError(Exception):
    """Base class for all package errors."""


class GroundTooLarge(PolygameError):
    """An exhaustive subset enumeration was requested beyond its size guard."""


class GraphTooLarge(PolygameError):
    """A graph search was requested beyond its size guard."""


class NotInPolytope(PolygameError):
    """A load vector failed a base-polytope membership precondition."""


class NotLaminar(PolygameError):
    """A set family violates the laminar property (or misses its root)."""


class InvalidSpec(PolygameError):
    """Malformed constructor input (overlapping blocks, bad capacities, ...)."""


class ExchangeNotFound(PolygameError):
    """No strong-exchange partner exists; signals a non-submodular oracle."""


class ConflictingStrategies(PolygameError):
    """No bidirectional flow exists between the two strategies."""


class QueueOverload(PolygameError):
    """A queue resource was evaluated at or beyond its service rate."""


class NoConvergence(PolygameError):
    """An iterative solver exhausted its budget before reaching tolerance."""


class Unstable(PolygameError):
    """Queueing instance rejected: demands exceed available service capacity."""


class InvalidK(PolygameError):
    """Cycle length below 3."""


class WitnessNotFound(PolygameError):
    """No non-matroid witness exists; the input is a matroid or not an anti-chain."""


class NotNonMatroid(PolygameError):
    """A construction requiring non-matroid set systems received a matroid."""


class FormatError(PolygameError):
    """Malformed JSON payload."""
