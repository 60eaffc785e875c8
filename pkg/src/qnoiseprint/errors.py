"""Exception types raised across the package."""


class InvalidArgument(ValueError):
    """An argument is outside its documented domain."""


class NoErrorMass(ValueError):
    """A distribution puts no probability on any error state."""


class DivergenceUndefined(ValueError):
    """The reference has zero mass where the observed distribution does not."""


class ProtocolStateError(RuntimeError):
    """A node was asked to do something its protocol state does not allow."""


class ConfigError(ValueError):
    """A configuration field is missing, ill-typed or violates a constraint."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
