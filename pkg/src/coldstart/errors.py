"""Exception types shared across the package.

DataError covers problems with input content (bad CSV cells, schema
mismatches, degenerate targets); the CLI maps it to exit code 3.
Anything else that escapes is treated as an internal invariant violation
(exit code 4).
"""


class ColdstartError(Exception):
    """Base class for all package-specific errors."""


class DataError(ColdstartError):
    """Invalid or inconsistent input data."""


class SchemaError(DataError):
    """Column/schema mismatch between data and its declared layout."""
