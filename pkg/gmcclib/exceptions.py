""" Exceptions raised by gmcclib."""

from typing import Optional


class DimensionError(ValueError):
    """Lengths of sample vectors, weights or regressors do not match"""


class DomainError(ValueError):
    """Evaluation at a singular point, or a parameter outside its valid range"""


class UnsupportedDensityError(ValueError):
    """Operation needs an absolutely continuous model (or alpha > 1)"""


class DegenerateTraceError(ValueError):
    """Simulation trace gives a zero denominator"""


class SolverError(ArithmeticError):
    """Weighted normal equations are singular"""


class PrecisionError(ArithmeticError):
    """
    Numerical quadrature did not reach its tolerance
    The achieved estimate and error bound are attached to the exception
    """

    def __init__(self, message: str, estimate: float, abserr: float) -> None:
        super().__init__(message)
        self.estimate = estimate
        self.abserr = abserr


class ConfigError(ValueError):
    """
    Configuration could not be parsed or failed template validation
    """

    def __init__(
        self, message: str, line: Optional[int] = None, field: Optional[str] = None
    ) -> None:
        super().__init__(message)
        self.line = line
        self.field = field

    def diagnostic(self) -> str:
        """
        Single-line description for the error stream
        :return: "config error at line L: field: message"
        """
        where = "config error"
        if self.line is not None:
            where += f" at line {self.line}"
        if self.field:
            return f"{where}: {self.field}: {self}"
        return f"{where}: {self}"
