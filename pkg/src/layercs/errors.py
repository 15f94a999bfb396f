"""Exception hierarchy shared by every module."""


class LayerCSError(Exception):
    """Base class for all package errors."""


class DomainError(LayerCSError, ValueError):
    """An argument lies outside the domain of the function."""


class PoleError(DomainError):
    """Evaluation hit a pole (nonpositive integer argument of Gamma, bad denominator parameter)."""


class UnsupportedOrder(DomainError):
    """Requested order or parameter combination is outside the implemented cases."""


class NonConvergence(LayerCSError, ArithmeticError):
    """A series or quadrature exhausted its budget before meeting the tolerance.

    The best available partial result is attached as ``result`` when there is one.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class ClassMismatch(LayerCSError, ValueError):
    """Two states that must share class, fixed index and parameters do not."""


class UnsupportedClass(LayerCSError, ValueError):
    """The operation is not defined for the requested coherent-state class."""


class DegenerateSpectrum(LayerCSError):
    """Distinct basis states share a phase frequency, so the alpha-average does not diagonalize."""
