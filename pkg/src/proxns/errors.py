"""Exception types shared across the package."""


class ContractError(ValueError):
    """An operation was called outside its documented contract."""


class ConfigError(ValueError):
    """Invalid experiment or sampler configuration."""


class DrawBudgetError(RuntimeError):
    """A constrained sample draw exhausted its step budget.

    Carries the last chain state so the caller can decide on a retry.
    """

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class NestedRunError(RuntimeError):
    """A nested sampling run aborted; the partial result is attached."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
