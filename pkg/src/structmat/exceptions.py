"""Exception hierarchy.

Input problems derive from :class:`InputError` (also a ``ValueError``).
Numerical precondition failures derive from :class:`NumericalError` and
carry a short ``token`` that the command line reports on stderr.
"""


class StructMatError(Exception):
    """Base class for every error raised by this package."""

    token = "error"


class InputError(StructMatError, ValueError):
    token = "invalid-input"


class DimensionError(InputError):
    token = "dimension"


class InvalidScalarError(InputError):
    token = "invalid-scalar"


class InvalidToleranceError(InputError):
    token = "invalid-tolerance"


class InconsistentInputError(InputError):
    token = "inconsistent-input"


class ClassMismatchError(InputError):
    """A transform was handed a generator of the wrong structure class."""

    token = "class-mismatch"


class PartitionTooCoarseError(InputError):
    token = "partition-too-coarse"


class OffCurveKnotError(InputError):
    """A knot does not lie on the line or circle it was declared on."""

    token = "off-curve"


class NumericalError(StructMatError, ArithmeticError):
    token = "numerical"


class SingularMatrixError(NumericalError):
    token = "singular"


class SingularOperatorError(NumericalError):
    """The displacement operator ``M -> AM - MB`` is not invertible."""

    token = "singular-operator"


class KnotCollisionError(NumericalError):
    token = "knot-collision"


class IllConditionedError(NumericalError):
    token = "ill-conditioned"


class AmplificationError(IllConditionedError):
    """A reduction would amplify the approximation error past the limit."""


class NotSeparatedError(NumericalError):
    token = "not-separated"


class DegenerateCenterError(NumericalError):
    token = "degenerate-center"


class MagnitudeOverflowError(NumericalError):
    token = "magnitude-overflow"
