"""Exception hierarchy.

The CLI maps these onto exit codes: configuration problems exit with 2,
bad input data with 3 and numerical failures with 4.
"""


class BlocknetError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(BlocknetError, ValueError):
    """Invalid configuration. Carries every problem found, not just the first."""

    exit_code = 2

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class DataError(BlocknetError, ValueError):
    """Input data is malformed or inconsistent."""

    exit_code = 3


class CapacityError(DataError):
    """Requested computation exceeds a hard size guard (enumeration, naive loops)."""


class SparsityBudgetError(DataError):
    """A feature adjacency matrix would exceed its non-zero budget."""

    def __init__(self, covariate, nnz, budget):
        self.covariate = covariate
        self.nnz = nnz
        self.budget = budget
        super().__init__(
            f"feature adjacency for covariate {covariate!r} has {nnz} non-zeros, "
            f"over the budget of {budget}; pool rare categories or drop the covariate"
        )


class NumericalError(BlocknetError, ArithmeticError):
    """Optimization or linear algebra failed."""

    exit_code = 4


class SeparationError(NumericalError):
    """Logistic fit diverges because the responses are perfectly separated."""


class RankDeficiencyError(NumericalError):
    """Design matrix is rank deficient."""

    def __init__(self, column, message=None):
        self.column = column
        super().__init__(message or f"design matrix is rank deficient at column {column!r}")
