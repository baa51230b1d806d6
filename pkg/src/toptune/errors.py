"""Exception types shared across the library.

The CLI maps these onto exit codes: :class:`ValidationError` (and
subclasses) exit with 2, :class:`SolverError` with 3.
"""


class ValidationError(ValueError):
    """Invalid inputs, configuration, or file contents, caught before computation."""


class FeatureFileError(ValidationError):
    """Malformed, truncated, or inconsistent feature file."""


class SolverError(RuntimeError):
    """Numerical failure inside a solver: factorization breakdown, divergence,
    or non-finite intermediates."""
