class DegenerateMomentumError(ValueError):
    """Operation needs all |p_i| < pi but some component sits at pi."""


class QuadratureError(ArithmeticError):
    """Non-finite integrand values or a refinement ladder that did not settle."""

    def __init__(self, message, last_values=None):
        super().__init__(message)
        self.last_values = last_values


class TheoremViolation(AssertionError):
    """A numerically checked statement about the model failed."""


class ConfigError(ValueError):
    pass
