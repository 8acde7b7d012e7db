"""Exception hierarchy for natsearch"""

from typing import Optional, Sequence


class NatSearchError(Exception):
    """Base class for all natsearch errors"""


class ConfigError(NatSearchError, ValueError):
    """Invalid configuration or input parameters"""


class GridBoundsError(NatSearchError, IndexError):
    """Grid coordinates or cell index outside the environment"""


class DemParseError(ConfigError):
    """Malformed ESRI ASCII grid file"""

    def __init__(self, message: str, line: Optional[int] = None, path: Optional[str] = None):
        self.line = line
        self.path = path
        where = ""
        if path:
            where = f"{path}:"
        if line is not None:
            where = f"{where}{line}: "
        elif where:
            where = f"{where} "
        super().__init__(f"{where}{message}")


class CalibrationError(ConfigError):
    """Calibration samples cannot support the requested binning"""

    def __init__(self, message: str, bins: Sequence[int] = ()):
        self.bins = list(bins)
        super().__init__(message)


class NumericalError(NatSearchError, ArithmeticError):
    """Linear algebra failed even after regularisation"""

    def __init__(self, message: str, condition: Optional[float] = None):
        self.condition = condition
        if condition is not None:
            message = f"{message} (condition estimate {condition:.3e})"
        super().__init__(message)
