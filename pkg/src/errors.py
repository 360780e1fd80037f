class ToolkitError(Exception):
    """Base class of every error raised on purpose by the toolkit."""


class SizeError(ToolkitError, ValueError):
    pass


class ArgumentError(ToolkitError, ValueError):
    pass


class NormalizationError(ToolkitError, ValueError):
    pass


class SubspaceError(ToolkitError, ValueError):
    """State is not in span{phi0, phi1}."""

    def __init__(self, residual, message=None):
        self.residual = float(residual)
        super().__init__(
            message or f"state lies outside the decoherence-free subspace (residual norm {self.residual:.3e})"
        )


class UndefinedConditionalError(ToolkitError, ValueError):
    def __init__(self, probability, event=None):
        self.probability = float(probability)
        self.event = event
        super().__init__(
            f"cannot condition on {event or 'event'} with probability {self.probability:.3e}"
        )


class ConvergenceError(ToolkitError, RuntimeError):
    """No optimizer start converged; carries the best value seen so far."""

    def __init__(self, message, best_value=None, best_params=None):
        self.best_value = best_value
        self.best_params = best_params
        super().__init__(f"{message} (best so far: {best_value})")
