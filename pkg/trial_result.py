from dataclasses import dataclass
from typing import Optional


@dataclass
class TrialResult:
    """Container for one simulated trial and where its log went."""
    name: str
    scenario: str
    controller: str
    seed: int
    success: bool
    complete: bool = True
    ticks: int = 0
    saturated_ticks: int = 0
    csv_path: Optional[str] = None
    error_message: Optional[str] = None
