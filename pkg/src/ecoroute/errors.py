"""Exception hierarchy shared across the package."""


class EcoRouteError(Exception):
    """Base class for all package-specific errors."""


class ParseError(EcoRouteError):
    """Malformed network file; message carries the offending field/record."""


class ParameterError(EcoRouteError):
    """Invalid generator or query parameters."""


class NoRouteError(EcoRouteError):
    """Destination unreachable from origin."""

    def __init__(self, origin, destination):
        super().__init__(f"no route from node {origin} to node {destination}")
        self.origin = origin
        self.destination = destination


class CapacityError(EcoRouteError):
    """Instance too large for an enumeration-based method."""
