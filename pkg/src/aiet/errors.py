"""Exception hierarchy shared across the package.

Three broad families, matching how the CLI and the service report them:
invalid input data (exit 2 / HTTP 400), an operation invoked outside its
precondition (exit 3 / HTTP 409), and numerical non-convergence
(exit 4 / HTTP 500).
"""

from __future__ import annotations


class AietError(Exception):
    """Base class for all package errors."""


class InvalidInput(AietError):
    """Raised when input data fails structural validation."""


class NotBijection(InvalidInput):
    pass


class Reducible(InvalidInput):
    def __init__(self, k: int):
        self.k = k
        super().__init__(f"permutation is reducible: top and bottom agree on the first {k} letters")


class PreconditionError(AietError):
    """Raised when an operation is called outside its domain of validity."""


class Tie(PreconditionError):
    """Rightmost intervals have equal length; the induction step is undefined."""


class NotPrimitive(PreconditionError):
    """Some letter never wins along the loop; the loop matrix is not primitive."""


class NotRealizable(PreconditionError):
    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"declared move at step {step} contradicts the induced lengths")


class NotOrthogonal(PreconditionError):
    def __init__(self, inner: float):
        self.inner = inner
        super().__init__(f"slope vector is not orthogonal to the length vector: <omega, lambda> = {inner!r}")


class NotHyperbolic(PreconditionError):
    pass


class NonInvariantOmega(PreconditionError):
    """Operation requires a slope vector fixed by the self-similarity matrix."""


class UnstableInput(PreconditionError):
    """Operation is undefined (or the quantity unknown) for unstable slopes."""


class NotStronglyConnected(PreconditionError):
    pass


class KeaneViolation(PreconditionError):
    """An exact induction endpoint collision in the rational oracle."""


class NumericalFailure(AietError):
    """An iterative scheme failed to converge within its budget."""


class ParityError(AietError):
    """Internal invariant d - dim Ker(Omega) even was violated."""
