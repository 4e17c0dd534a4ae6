"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: validation problems exit with 2,
resource-cap violations with 3, numerical failures with 4.
"""


class QacsimError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(QacsimError):
    """Bad user input: out-of-range argument, malformed file, schema violation."""


class FormatError(ValidationError):
    """Malformed input file (graph, schedule, sample or config file)."""


class ResourceLimitError(QacsimError):
    """A brute-force or dense-matrix size cap was exceeded."""


class NumericalError(QacsimError):
    """An integrator or solver failed to meet its accuracy contract."""
