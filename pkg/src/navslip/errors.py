"""Exception hierarchy shared across the package.

Two broad families matter for the CLI exit-code contract: ``ValidationError``
(bad inputs, rejected configuration, violated preconditions; exit code 1) and
``RuntimeFailure`` (a computation that started and then went wrong; exit
code 2).
"""


class NavslipError(Exception):
    """Base class for all package errors."""


class ValidationError(NavslipError):
    """Invalid input or configuration; maps to CLI exit code 1."""


class RuntimeFailure(NavslipError):
    """Failure during a computation; maps to CLI exit code 2."""


# -- geometry ---------------------------------------------------------------

class PointOffSurface(ValidationError):
    """Queried point does not lie on the surface within tolerance."""


class NotTangent(ValidationError):
    """Vector has a normal component exceeding tolerance."""


# -- fields -----------------------------------------------------------------

class UnknownCatalogName(ValidationError):
    """No catalog field registered under the requested name."""


class OrderTooHigh(ValidationError):
    """Requested derivative/curl order exceeds what the representation supports."""


class SingularMode(RuntimeFailure):
    """A per-mode solve hit an unexpectedly singular system."""


# -- boundary ---------------------------------------------------------------

class NonpositiveSlipLength(ValidationError):
    """Slip length must be strictly positive."""


class NoConsistentSign(ValidationError):
    """Neither curvature-term sign reproduces the classical condition."""


class BaseConditionViolated(ValidationError):
    """Field does not satisfy the order-0 slip condition at the boundary."""


# -- identities -------------------------------------------------------------

class PreconditionViolated(ValidationError):
    """An identity's hypotheses fail on the supplied field.

    ``violations`` lists human-readable descriptions of what failed.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


# -- solver -----------------------------------------------------------------

class ConfigInvalid(ValidationError):
    """Simulation configuration fails its invariants."""


class CFLViolated(ValidationError):
    """Time step too large for the grid and current speeds."""


class NaNDetected(RuntimeFailure):
    """Non-finite values appeared in the solver state."""

    def __init__(self, step_index, message=""):
        self.step_index = step_index
        super().__init__(message or f"non-finite state at step {step_index}")


class SeriesTooShort(ValidationError):
    """Time series has too few points for the requested analysis."""


class ParameterDomainError(ValidationError):
    """Formula argument outside its stated range."""


# -- experiments ------------------------------------------------------------

class TooFewPoints(ValidationError):
    """Rate fit needs at least three points."""


class NonpositiveValue(ValidationError):
    """Log-log fit requires strictly positive inputs."""


class LadderRunFailed(RuntimeFailure):
    """One viscosity-ladder entry failed; carries the viscosity."""

    def __init__(self, nu, cause):
        self.nu = nu
        self.cause = cause
        super().__init__(f"run at nu={nu:g} failed: {cause}")


# -- config / io ------------------------------------------------------------

class ConfigSyntaxError(ValidationError):
    """Malformed config line."""

    def __init__(self, line_no, message):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class UnknownKey(ValidationError):
    """Config key not in the schema."""

    def __init__(self, key, line_no):
        self.key = key
        self.line_no = line_no
        super().__init__(f"line {line_no}: unknown key '{key}'")


class TypeMismatch(ValidationError):
    """Config value cannot be coerced to the declared type."""

    def __init__(self, key, expected, raw):
        self.key = key
        self.expected = expected
        self.raw = raw
        super().__init__(f"key '{key}': cannot parse {raw!r} as {expected}")


class IoError(RuntimeFailure):
    """Underlying file operation failed."""


class BadMagic(ValidationError):
    """Snapshot file does not start with the expected magic bytes."""


class VersionUnsupported(ValidationError):
    """Snapshot file version not understood by this reader."""


class TruncatedPayload(ValidationError):
    """Snapshot payload shorter than the header promises."""
