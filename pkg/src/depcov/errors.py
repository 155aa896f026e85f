"""Exception hierarchy.

Every error is a ``ValueError`` except :class:`ConsistencyError`, which
signals a numerical result that contradicts a proven property rather than
bad input.
"""


class SampleError(ValueError):
    """Malformed or out-of-contract sample data.

    ``row`` is the 1-based file row for ingestion errors, else ``None``.
    """

    def __init__(self, message, row=None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class DegenerateBootstrapError(ValueError):
    """The block partition leaves fewer than two blocks to resample."""


class InvalidSpecError(ValueError):
    """An ARMA or scenario specification violates its validity conditions."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class BoundDomainError(ValueError):
    """Parameters outside the range where a bound formula is finite/valid."""


class PreconditionError(ValueError):
    """A measure-theoretic precondition of a bound is violated by the input."""


class ConsistencyError(RuntimeError):
    """A quantity that is provably nonnegative came out clearly negative."""
