"""Exception hierarchy.

Input-side problems derive from :class:`InvalidInput` (CLI exit code 10),
numerical failures from :class:`ComputeError` (exit code 11).
"""


class MomentDetError(Exception):
    pass


class InvalidInput(MomentDetError, ValueError):
    pass


class ComputeError(MomentDetError, RuntimeError):
    pass


class NonPositiveOmega(InvalidInput):
    def __init__(self, n, value=None):
        self.n = n
        self.value = value
        super().__init__(f"omega_{n} = {value!r} is not a positive real")


class InvalidParameter(InvalidInput):
    pass


class InsufficientTerms(InvalidInput):
    def __init__(self, needed, available):
        self.needed = needed
        self.available = available
        super().__init__(f"need {needed} Jacobi terms, only {available} available")


class NotPositiveDefinite(InvalidInput):
    """The k-th Hankel minor of a moment prefix is not strictly positive."""

    def __init__(self, k):
        self.k = k
        super().__init__(f"Hankel minor {k} is not positive: not the moment "
                         "sequence of an infinitely supported symmetric measure")


class ParityMismatch(InvalidInput):
    pass


class OmegaOverflow(ComputeError):
    def __init__(self, n):
        self.n = n
        super().__init__(f"omega_{n} overflows double precision")


class ConvergenceFailure(ComputeError):
    pass


class QuadratureNotConverged(ComputeError):
    def __init__(self, index, achieved):
        self.index = index
        self.achieved = achieved
        super().__init__(f"quadrature for moment {2 * index} did not converge "
                         f"(error estimate {achieved:.3g})")


class MismatchBeyondTolerance(ComputeError):
    def __init__(self, index, reference, oracle):
        self.index = index
        self.reference = reference
        self.oracle = oracle
        super().__init__(f"M_{2 * index}: quadrature gives {reference!r}, "
                         f"Jacobi sequence gives {oracle!r}")


class NotIndeterminateWarning(UserWarning):
    pass
