"""
Exceptions raised by the simulation toolkit
"""


class DysonError(ValueError):
    """Base class for every domain error raised by the toolkit"""


class DomainError(DysonError):
    """Interval containment violated or an empty vertex domain"""


class GraphError(DysonError):
    """Malformed graph input: self-loops, stray endpoints, mismatched vertex sets"""


class ParameterError(DysonError):
    """A model or schedule parameter violates its constraint"""


class EnumerationLimitError(DysonError):
    """Exact enumeration requested on a universe that is too large"""


class GridTooNarrowError(DysonError):
    """Proxy rates on a beta grid do not bracket the crossing level"""


class InfeasibleScaleError(DysonError):
    """Experiment scale exceeds what can be sampled at desk scale"""
