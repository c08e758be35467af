"""Exception types shared across the package.

Every error raised on purpose derives from :class:`YMError`, so callers (the
CLI in particular) can separate input problems from genuine bugs.
"""


class YMError(Exception):
    """Base class for all package errors."""


# planar maps
class NonPlanar(YMError):
    """The rotation system violates V - E + F = 2."""


class Disconnected(YMError):
    """The graph (or a proposed spanning tree) does not connect all vertices."""


class MalformedRotation(YMError):
    """A half-edge is duplicated, missing, or paired inconsistently."""


class NotOnGraph(YMError):
    """A loop uses an unknown edge or is not a closed walk."""


class EmptyLoop(YMError):
    """A loop word has no steps."""


class WrongDegree(YMError):
    """A vertex does not have the four incident half-edges an operation needs."""


class UnknownName(YMError):
    """A catalog name is not recognised."""


# group numerics
class SizeMismatch(YMError):
    """A matrix does not match the group size."""


class NonpositiveTime(YMError):
    """A heat-kernel density was requested at time t <= 0."""


# measure and sampling
class AmbiguousPath(YMError):
    """The face path from a bounded face to the unbounded face is not unique."""


class BaseMismatch(YMError):
    """A loop is not based at the base vertex of the lasso basis."""


class MissingSymbol(YMError):
    """A word refers to a symbol with no assigned group element."""


class TriangularSolveFailed(YMError):
    """Lasso words could not be solved for the edge variables."""


# verification
class StepTooLarge(YMError):
    """A finite-difference step does not fit inside a differentiated area."""


class EdgeNotOnUnbounded(YMError):
    """The face shares no edge with the unbounded face."""


class EdgeMultiplicity(YMError):
    """Every shared edge is traversed more (or less) than once by the loop."""


class NotExtendedInvariant(YMError):
    """A test function fails the extended gauge invariance identities."""


class GridTooCoarse(YMError):
    """Quadrature at n and 2n points disagrees beyond tolerance."""


class PatternMismatch(YMError):
    """A loop word does not have the crossing pattern expected at a frame."""


# master field
class UnderdeterminedSystem(YMError):
    """The area-derivative system has rank below the number of bounded faces."""


class InconsistentSystem(YMError):
    """The least-squares residual of the area-derivative system is too large."""


class NonConvergent(YMError):
    """Halving the integration step moved the master-field value too much."""


# input files
class ParseError(YMError):
    """The graph file is not valid JSON or has an unexpected structure."""


class SemanticError(YMError):
    """The graph file parses but describes an invalid map or loop."""
