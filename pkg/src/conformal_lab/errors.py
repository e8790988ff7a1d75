"""Exception types shared across the package.

Every exception carries a short machine-readable ``code`` so batch
reports and the CLI can classify failures without parsing messages.
"""


class ConformalLabError(Exception):
    """Base class for all package errors."""

    code = "ERROR"


class UnsupportedBackendError(ConformalLabError):
    """The requested (kind, dimension) pair is outside the catalog."""

    code = "UNSUPPORTED_BACKEND"


class UnsupportedDimensionError(ConformalLabError):
    """The operation is undefined in this dimension."""

    code = "UNSUPPORTED_DIMENSION"


class AliasingError(ConformalLabError):
    """A projection would exceed the quadrature exactness of the basis."""

    code = "ALIASING"


class KernelError(ConformalLabError):
    """The operator has a (near-)zero mode, so it cannot be inverted."""

    code = "KERNEL"


class CutoffTooLowError(ConformalLabError):
    """The eigen-expansion tail estimate exceeds the requested tolerance."""

    code = "CUTOFF_TOO_LOW"


class NonpositiveFactorError(ConformalLabError):
    """A conformal factor must be strictly positive."""

    code = "NONPOSITIVE_FACTOR"


class HypothesisFailError(ConformalLabError):
    """A gating hypothesis (positive Yamabe sign, Q sign) does not hold."""

    code = "HYPOTHESIS_FAIL"


class ZeroFunctionError(ConformalLabError):
    """A nonzero function was required."""

    code = "ZERO_FUNCTION"


class ConfigError(ConformalLabError):
    """A run configuration failed validation; the message names the field."""

    code = "CONFIG_INVALID"


class BackendBuildError(ConformalLabError):
    """A catalog backend could not be constructed from its manifest record."""

    code = "BACKEND_BUILD_FAIL"
