"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Arguments violate an operation's preconditions."""


class DegenerateInputError(ValueError):
    """Input is well-formed but carries no usable variation (constant series, identical points)."""


class FitFailedError(RuntimeError):
    """An iterative fit exhausted its budget without meeting the convergence criterion."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class PipelineError(RuntimeError):
    """Raised by the pipeline with a module-qualified message."""

    def __init__(self, module, message):
        super().__init__(f"{module}: {message}")
        self.module = module
