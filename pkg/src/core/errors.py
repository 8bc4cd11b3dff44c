"""
Exception hierarchy shared by the library and the CLI.

The CLI maps ConfigError -> exit 2, NumericError -> exit 3, EmitError -> exit 4.
"""


class MaxMinError(Exception):
    """Root of all library errors"""


class ConfigError(MaxMinError, ValueError):
    """Invalid configuration, flag or experiment definition"""


class ExpressionError(ConfigError):
    """Custom function expression could not be parsed"""

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        pointer = f"\n  {text}\n  {' ' * position}^" if text else ""
        super().__init__(f"{message} at position {position}{pointer}")


class NumericError(MaxMinError):
    """A numerical precondition of the operators was violated"""


class EmptyWindow(NumericError):
    def __init__(self, a: float, b: float, n: int, k_lo: int, k_hi: int):
        self.a, self.b, self.n = a, b, n
        self.k_lo, self.k_hi = k_lo, k_hi
        super().__init__(
            f"empty index window for [{a}, {b}] at n={n} "
            f"(k_lo={k_lo} > k_hi={k_hi}); increase n"
        )


class RangeViolation(NumericError):
    """Sample or cell mean outside [0, 1] under assert-unit-range"""


class DegenerateDenominator(NumericError):
    """Normalising maximum fell below the kernel value at e"""


class KernelConditionError(NumericError):
    """Activation fails a structural condition required to build a kernel"""


class QuadratureError(NumericError):
    """Invalid quadrature specification"""


class BracketError(NumericError):
    """Luxemburg-norm bracketing did not converge"""


class GridPointError(NumericError):
    """Point-level failure inside a grid evaluation"""

    def __init__(self, index: int, z: float, cause: Exception):
        self.index = index
        self.z = z
        self.cause = cause
        super().__init__(f"grid point {index} (z={z!r}): {cause}")


class EmitError(MaxMinError, OSError):
    """Output could not be written"""

    def __init__(self, path, cause: Exception):
        self.path = str(path)
        self.cause = cause
        super().__init__(f"failed to write {self.path}: {cause}")


class DomainViolation(NumericError, ValueError):
    """Function evaluated outside its domain"""
