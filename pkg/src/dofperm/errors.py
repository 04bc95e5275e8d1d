"""Exception types raised by the package.

Every error derives from :class:`DofPermError` so that callers (and the
command line front end) can separate domain failures from programming
mistakes.
"""


class DofPermError(Exception):
    """Base class for all domain errors."""


class InvalidArgument(DofPermError, ValueError):
    """An argument is outside the documented domain."""


class UnsupportedDegree(DofPermError, ValueError):
    """A polynomial degree exceeds the conditioning cap."""


class UnsupportedElement(DofPermError, ValueError):
    """The (family, cell, degree) combination is not implemented."""


class DegenerateElement(DofPermError, RuntimeError):
    """The dual matrix of an element is singular."""


class NonClosedMomentSpace(DofPermError, RuntimeError):
    """A moment space cannot represent the pullback of its own members."""


class NoMoments(DofPermError, ValueError):
    """The requested entity carries no integral moment DOFs."""


class InvalidMeshCell(DofPermError, ValueError):
    """A cell has repeated or otherwise invalid vertex ids."""


class InvalidEncoding(DofPermError, ValueError):
    """A packed orientation integer has bits outside the layout."""


class MalformedMesh(DofPermError, ValueError):
    """A mesh document does not follow the schema."""


class NonMatchingFacet(DofPermError, ValueError):
    """Neighbouring cells disagree on the shape of a shared facet."""


class NonManifoldMesh(DofPermError, ValueError):
    """A facet is shared by more than two cells."""


class MixedMeshMismatch(DofPermError, ValueError):
    """Elements on different cell kinds disagree on shared entity DOFs."""


class DegenerateCell(DofPermError, ValueError):
    """A geometry map has a singular Jacobian."""
