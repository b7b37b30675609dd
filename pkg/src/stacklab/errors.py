"""Exception hierarchy shared by every stacklab module."""


class StacklabError(Exception):
    """Base class for all errors raised by stacklab."""


class ParameterError(StacklabError, ValueError):
    """An input violates a documented precondition."""


class ConstructionError(StacklabError):
    """A cutting-and-stacking precondition fails at a named stage."""

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


class InvariantError(StacklabError):
    """An internal invariant failed; indicates a construction bug or a violated bound."""

    def __init__(self, message, module=None, stage=None):
        super().__init__(message)
        self.module = module
        self.stage = stage
