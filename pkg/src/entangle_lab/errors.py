"""Exception types shared across the package."""


class EntangleLabError(Exception):
    """Base class for all numerical failures raised by entangle_lab."""


class ToleranceNotMet(EntangleLabError):
    """Quadrature error estimate could not be pushed below the requested tolerance."""


class NonHermitianResult(EntangleLabError):
    """An expectation value of a Hermitian operator came out with an imaginary part."""


class BudgetTooSmall(EntangleLabError):
    """Monte Carlo standard error exceeds 10% of the estimate."""


class EmptyInput(EntangleLabError, ValueError):
    pass


class TooFewPoints(EntangleLabError, ValueError):
    pass


class NoPeaksFound(EntangleLabError):
    """The sampled curve has no strict interior maxima."""


class DegenerateFit(EntangleLabError):
    """Fit abscissae span less than one decade."""
