"""Exception types shared across the package.

Two broad failure categories matter to callers (and map to distinct CLI
exit codes): problems with the data handed in, and numerical failures
encountered while computing with valid data.
"""


class DataError(ValueError):
    """Input data is unusable: non-finite entries, ragged/malformed files,
    degenerate columns, zero covariance diagonals."""


class NumericalError(RuntimeError):
    """A computation failed on otherwise valid input: solver divergence,
    loss of positive definiteness, or an exhausted search."""
