"""Exception types shared across the package."""


class HorizonError(IndexError):
    """An index lies outside the range over which a sequence is known."""


class UncertifiedTailError(ValueError):
    """A supremum over an infinite tail cannot be certified.

    Raised when the ratio sequence carries no monotonicity certificate and
    the problem is not finite.
    """


class NotCertifiableError(ValueError):
    """The summability hypotheses of the L_q bounds cannot be certified."""


class ConfigError(ValueError):
    """Invalid run configuration (unknown key, missing rule, bad value)."""
