from typing import List, Optional


class WalkerError(Exception):
    """Base class for every error raised by the walker stack."""


class InvalidSeriesError(WalkerError):
    pass


class InvalidInputError(WalkerError):
    def __init__(self, message: str = "invalid input"):
        super().__init__(message)


class InvalidKeypointError(WalkerError):
    pass


class DegeneratePoseError(WalkerError):
    pass


class CalibrationError(WalkerError):
    pass


class UndefinedCorrelationError(WalkerError):
    pass


class DegenerateTestError(WalkerError):
    pass


class ProfileFormatError(WalkerError):
    pass


class ScenarioFormatError(WalkerError):
    pass


class StreamOrderError(WalkerError):
    """A replay stream line arrived out of timestamp order."""
    def __init__(self, line_number: int, message: Optional[str] = None):
        self.line_number = line_number
        super().__init__(message or f"out-of-order timestamp at line {line_number}")


class UnmatchedRunsError(WalkerError):
    """Controller comparison found runs without a counterpart."""
    def __init__(self, missing: List[str]):
        self.missing = sorted(missing)
        super().__init__("unmatched runs: " + ", ".join(self.missing))
