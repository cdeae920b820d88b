"""
Typed errors raised by the synthesis library

Everything a user can trigger with bad input derives from LinSynthError so the
CLI and the API can turn it into a clean message instead of a traceback.
"""
from typing import Optional


class LinSynthError(Exception):
    """Base class for recoverable, user-facing errors"""


class SingularMatrixError(LinSynthError, ValueError):
    """Matrix is not invertible over GF(2)"""

    def __init__(self, message: str = "matrix not invertible"):
        super().__init__(message)


class _LineError(LinSynthError):
    """Error tied to a line of an input file"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MatrixParseError(_LineError, ValueError):
    """Malformed matrix text"""


class QcParseError(_LineError, ValueError):
    """Malformed .qc circuit text"""


class NonLinearGateError(LinSynthError):
    """A CNOT-only operation received a circuit with other gates"""


class NotTriangularError(LinSynthError, ValueError):
    """Matrix is not unit triangular in the requested orientation"""


class RankDeficientError(LinSynthError, ValueError):
    """Parity table does not have full column rank"""


class ShapeMismatchError(LinSynthError, ValueError):
    """Operands have incompatible shapes"""


class MissingTableError(LinSynthError):
    """No precomputed block table for the requested size"""


class UnsupportedSizeError(LinSynthError, ValueError):
    """Requested size is outside what the routine supports"""


class VerificationError(LinSynthError):
    """A synthesized circuit does not implement its target (internal bug)"""


class NoMethodSucceeded(LinSynthError):
    """Every portfolio member failed on the operator"""
