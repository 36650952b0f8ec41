"""Exception hierarchy.

Validation problems derive from :class:`ValidationError` (a ``ValueError``),
numerical breakdowns from :class:`NumericalError` (a ``LinAlgError``).  The
command line front end maps the two families to different exit codes.
"""

from numpy.linalg import LinAlgError

__all__ = [
    'FwmorError',
    'ValidationError',
    'NumericalError',
    'DimensionMismatch',
    'NonFinite',
    'OrderOutOfRange',
    'ImproperError',
    'UnstableSystem',
    'UnstableShift',
    'ParseError',
    'SchemaError',
    'SingularPencil',
    'DefectiveMatrix',
    'RepeatedPoles',
    'NotPositiveDefinite',
    'RankDeficientFactors',
    'ShiftCollision',
    'DuplicateShift',
    'DeflatedBasis',
    'DegenerateResidual',
    'UnstableIterate',
    'BiorthogonalBreakdown',
    'SingularNullProjection',
    'NoConvergence',
    'TruncationTie',
]


class FwmorError(Exception):
    """Base class of every error raised by this package."""


class ValidationError(FwmorError, ValueError):
    """Malformed input: shapes, non-finite entries, bad options."""


class NumericalError(FwmorError, LinAlgError):
    """A numerical method could not produce a trustworthy result."""


class DimensionMismatch(ValidationError):
    pass


class NonFinite(ValidationError):
    pass


class OrderOutOfRange(ValidationError):
    pass


class ImproperError(ValidationError):
    """The H2 norm of a system with nonzero feedthrough is unbounded."""


class UnstableSystem(ValidationError):
    pass


class UnstableShift(ValidationError):
    """An interpolation point does not lie in the open right half-plane."""


class ParseError(ValidationError):
    pass


class SchemaError(ValidationError):
    pass


class SingularPencil(NumericalError):
    """A shifted matrix or Sylvester operator is (numerically) singular."""


class DefectiveMatrix(NumericalError):
    pass


class RepeatedPoles(DefectiveMatrix):
    pass


class NotPositiveDefinite(NumericalError):
    pass


class RankDeficientFactors(NumericalError):
    pass


class ShiftCollision(SingularPencil):
    """A shift coincides with an eigenvalue of the matrix it is applied to."""


class DuplicateShift(ShiftCollision):
    pass


class DeflatedBasis(NumericalError):
    pass


class DegenerateResidual(NumericalError):
    pass


class UnstableIterate(NumericalError):
    pass


class BiorthogonalBreakdown(NumericalError):
    pass


class SingularNullProjection(NumericalError):
    pass


class NoConvergence(UserWarning):
    """Emitted (not raised) when an iteration hits its cap."""


class TruncationTie(UserWarning):
    pass
