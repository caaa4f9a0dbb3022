"""Exception taxonomy shared by every module in the package."""


class DiracsimError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(DiracsimError):
    """Invalid configuration value or config file (CLI exit code 2)."""


class ContractError(DiracsimError):
    """A call broke an interface contract: bad index, shape or grid mismatch."""


class DegenerateInputError(DiracsimError):
    """Degenerate input, e.g. a zero vector where a state was expected."""


class NumericalIntegrityError(DiracsimError):
    """A quantity that must be real / nonnegative violated its tolerance.

    A large residual signals a convention bug upstream, not noise, so it is
    raised loudly instead of being silently discarded.
    """


class NullEventError(DiracsimError):
    """Conditioning on an outcome of (near-)zero probability."""


class NoPhotonsError(DiracsimError):
    """A measurement record holds no photons to normalize by (CLI exit code 3)."""


class DegenerateKernelError(DiracsimError):
    """The analytic propagator kernel was requested at dz = 0 where its
    closed form is singular; callers should use the unitary construction."""


class FormatError(DiracsimError):
    """Malformed data file (CLI exit code 3)."""
