"""Exception hierarchy.

Two families drive the CLI exit codes: ``InputError`` for rejected inputs
(exit 2) and ``ComputationError`` for numeric failures of an otherwise
well-posed request (exit 1). The class name is the stable error token
echoed by the CLI.
"""


class StieltjesError(Exception):
    """Base class for all library errors."""

    @property
    def name(self) -> str:
        return type(self).__name__


class InputError(StieltjesError):
    """Invalid input: violated invariant, malformed spec, bad argument."""


class ComputationError(StieltjesError):
    """A numeric procedure failed or a measured precondition did not hold."""


# -- input / validation errors -------------------------------------------

class NonMonotone(InputError):
    """Continuous-part values decrease somewhere."""


class JumpOutOfWindow(InputError):
    """A jump point lies outside [A, B)."""


class DuplicateJump(InputError):
    """Two jump atoms share a position."""


class NonPositiveJump(InputError):
    """A jump atom has size <= 0."""


class OutOfWindow(InputError):
    """Evaluation point or interval outside the derivator window."""


class OutOfRange(InputError):
    """Pseudoinverse queried outside the range of the continuous part."""


class OverlappingIntervals(InputError):
    """Half-open intervals passed to the measure overlap."""


class EmptyFamily(InputError):
    """A family diagnostic received no members."""


class MissingTailBound(InputError):
    """A truncated sequence or family lacks a declared tail bound."""


class WindowTooSmall(InputError):
    """Extension window does not contain the core interval in its interior."""


class IoError(InputError):
    """Report emission failed at the file-system level."""


# -- numeric / measured failures -----------------------------------------

class QuadratureFailure(ComputationError):
    """Requested tolerance not met within the refinement budget."""


class NoLimit(ComputationError):
    """A limit extrapolation failed its Cauchy test."""


class DegenerateDenominator(ComputationError):
    """g is locally constant at the query in a way the derivative
    definition does not cover (constancy-interval endpoints, window-edge
    flats)."""


class NotRegulated(ComputationError):
    """A right-hand limit at some jump point does not exist."""


class NotUniform(ComputationError):
    """Finite-scale uniform g-continuity check failed."""


class ReconstructionError(ComputationError):
    """Factorization did not reproduce the function within tolerance."""


class IllConditioned(ComputationError):
    """Polynomial fit is rank deficient for the sample spread."""


class BranchViolation(ComputationError):
    """1 + lambda*(jump) (or 1 + df/f) left the real logarithm branch."""


class NotDecomposable(ComputationError):
    """Jump series does not certify a continuous + jump decomposition."""


class NoRightLimit(ComputationError):
    """Right limit required at a jump point does not exist."""


class ZeroNearJump(ComputationError):
    """f vanishes at or just right of a jump point of the product split."""


class LogSumDiverges(ComputationError):
    """Logarithmic jump sum of the product split is not finite."""
