"""Exception hierarchy.

Every error raised by the library derives from :class:`MatDiracError`, which
is itself a :class:`ValueError` so callers that only care about bad input can
catch the builtin.
"""


class MatDiracError(ValueError):
    pass


class ShapeMismatch(MatDiracError):
    pass


class NotCommuting(MatDiracError):
    pass


class NotHermitian(MatDiracError):
    pass


class NotHermitianNK(NotHermitian):
    """Raised when a lagrangian density needs hermitian (N, K)."""


class ConstraintViolation(MatDiracError):
    pass


class SingularV(MatDiracError):
    pass


class ZeroY(MatDiracError):
    pass


class BadPartition(MatDiracError):
    pass


class NotCanonical(MatDiracError):
    pass


class NotAntihermitian(MatDiracError):
    pass


class NotInL(MatDiracError):
    """Generator is not an antihermitian element of com(N, K)."""


class TermBudgetExceeded(MatDiracError):
    pass


class NotASolution(MatDiracError):
    pass


class RankDeficient(MatDiracError):
    pass
