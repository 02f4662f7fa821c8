"""Exception hierarchy. Every numerical failure carries its own class name,
which the CLI reports verbatim."""


class SelfsimError(Exception):
    """Base class for all library errors."""


class NotStrictlyHyperbolic(SelfsimError):
    pass


class NoConvergence(SelfsimError):
    pass


class SingularJacobian(SelfsimError):
    pass


class StepFailure(SelfsimError):
    pass


class ToleranceNotMet(SelfsimError):
    pass


class NotInvertible(SelfsimError):
    pass


class EntropyPairMismatch(SelfsimError):
    pass


class MixedNonlinearity(SelfsimError):
    pass


class DegenerateForm(SelfsimError):
    pass


class NonPhysical(SelfsimError):
    pass


class Subsonic(NotStrictlyHyperbolic):
    """Subsonic in x: the pencil has complex roots."""


class LeftBall(SelfsimError):
    pass


class OutOfBall(SelfsimError):
    pass


class NotGNL(SelfsimError):
    pass


class NotLD(SelfsimError):
    pass


class NotAJump(SelfsimError):
    pass


class SectorsOverlap(SelfsimError):
    pass


class NotResonant(SelfsimError):
    pass


class IncompatibleKind(SelfsimError):
    pass


class InadmissibleStrength(SelfsimError):
    pass


class DoesNotFit(SelfsimError):
    pass


class ConsecutiveSimpleWaves(SelfsimError):
    pass


class InapplicableMutation(SelfsimError):
    pass


class BackwardProblem(SelfsimError):
    """Raised when a backward-sector Riemann problem is requested; those are
    not uniquely solvable and are only produced by the generator."""
