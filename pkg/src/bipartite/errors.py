"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes): input that fails
validation, and numerical procedures that fail on valid input.
"""


class BipartiteError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(BipartiteError, ValueError):
    """Input violates a precondition (shape, positivity, normalization...)."""


class NumericalError(BipartiteError, ArithmeticError):
    """A numerical procedure failed on otherwise valid input."""


class NonSquare(ValidationError):
    pass


class NotHermitian(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class NotPositive(ValidationError):
    pass


class NotPSD(ValidationError):
    pass


class TraceNotOne(ValidationError):
    pass


class IndexOutOfRange(ValidationError, IndexError):
    pass


class NotOrthonormal(ValidationError):
    pass


class BadProbabilities(ValidationError):
    pass


class BadSigma(ValidationError):
    pass


class NotContraction(ValidationError):
    pass


class BadNormalization(ValidationError):
    pass


class BadRank(ValidationError):
    pass


class WrongShape(ValidationError):
    pass


class UnsupportedDimension(ValidationError):
    pass


class NotCommutingFamily(ValidationError):
    pass


class NotSSPPT(ValidationError):
    pass


class NotFactorizable(ValidationError):
    """The state admits no block factor with rows ``[X_k, S_kl X_k, ...]``.

    Raised when an off-diagonal block carries mass on the kernel of the
    corresponding diagonal block from the right, which no coefficient
    operator ``S_kl`` can reproduce.
    """


class NoConvergence(NumericalError):
    pass


class NotPSDResidual(NumericalError):
    pass


class ReconstructionFailed(NumericalError):
    pass
