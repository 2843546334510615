"""Exception types raised across the package."""


class ValidationError(ValueError):
    """An operator, state or parameter fails its structural invariants."""


class DimensionError(ValidationError):
    """Operands live on incompatible Hilbert spaces."""


class NotClassicalError(ValueError):
    """A motion does not act as a permutation on an observable's projectors."""


class ScenarioError(ValueError):
    """A scenario document is malformed or exceeds the desk-scale cap.

    ``errors`` holds one message per offending field.
    """

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
