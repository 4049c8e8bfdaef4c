import csv
import io
from dataclasses import astuple, dataclass, field, fields
from pathlib import Path
from typing import List, Optional

import numpy as np
from typing_extensions import Self

from config import Config
from errors import InvalidInputError
from signals import SampleRate, Series

CSV_COLUMNS = ("t", "x", "y", "heading_deg", "v_mps", "omega_dps", "fx_N", "tauz_Nm",
               "tau_wrist_Nm", "abduction_deg", "segment", "controller", "seed", "excluded")


@dataclass(frozen=True)
class TrialRow:
    """One 50 Hz tick of a simulated or replayed trial."""
    t: float
    x: float
    y: float
    heading_deg: float
    v_mps: float
    omega_dps: float
    fx_N: float
    tauz_Nm: float
    tau_wrist_Nm: float
    abduction_deg: float
    segment: str        # "<index>:<direction>", e.g. "1:right"
    controller: str
    seed: int
    excluded: bool = False

    @property
    def segment_index(self) -> int:
        return int(self.segment.split(":", 1)[0])

    @property
    def direction(self) -> str:
        return self.segment.split(":", 1)[1]


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


@dataclass
class TrialLog:
    scenario: str
    controller: str
    seed: int
    rows: List[TrialRow] = field(default_factory=list)
    complete: bool = True
    hz: float = Config.SAMPLE_RATE_HZ
    saturated_ticks: int = 0

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def key(self) -> str:
        return f"{self.scenario}_{self.seed}"

    def column(self, name: str, include_excluded: bool = True) -> np.ndarray:
        rows = self.rows if include_excluded else [r for r in self.rows if not r.excluded]
        return np.array([getattr(r, name) for r in rows], dtype=float)

    def series(self, name: str) -> Series:
        return Series(SampleRate(self.hz), self.column(name))

    def directions(self) -> List[str]:
        return [r.direction for r in self.rows]

    def mark_edges(self, edge_s: float = Config.EXCLUDE_EDGE_S) -> None:
        """Flag the acceleration and deceleration phases at both ends of the trial."""
        n = len(self.rows)
        edge = int(round(edge_s * self.hz))
        self.rows = [
            TrialRow(*astuple(row)[:-1], excluded=(i < edge or i >= n - edge))
            for i, row in enumerate(self.rows)
        ]

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow([_fmt(v) for v in astuple(row)])
        return buffer.getvalue()

    @classmethod
    def from_csv(cls, text: str, scenario: Optional[str] = None, complete: bool = True) -> Self:
        reader = csv.reader(io.StringIO(text))
        header = tuple(next(reader, ()))
        if header != CSV_COLUMNS:
            raise InvalidInputError(f"unexpected trial log header {header}")
        rows = []
        for line, values in enumerate(reader, start=2):
            if not values:
                continue
            try:
                rows.append(_parse_row(values))
            except ValueError as e:
                raise InvalidInputError(f"trial log line {line}: {e}") from e
        controller = rows[0].controller if rows else "unknown"
        seed = rows[0].seed if rows else 0
        hz = Config.SAMPLE_RATE_HZ
        if len(rows) > 1:
            hz = round(1.0 / (rows[1].t - rows[0].t), 6)
        return cls(scenario or "replay", controller, seed, rows, complete, hz)

    @classmethod
    def read(cls, path: Path, complete: bool = True) -> Self:
        return cls.from_csv(Path(path).read_text(), scenario_from_path(path), complete)


def scenario_from_path(path: Path) -> str:
    """Trial runner files are named {scenario}_{controller}_{seed}_{k}.csv."""
    return Path(path).stem.rsplit("_", 3)[0]


def _parse_row(values: List[str]) -> TrialRow:
    if len(values) != len(CSV_COLUMNS):
        raise ValueError(f"expected {len(CSV_COLUMNS)} fields, got {len(values)}")
    converted = []
    for f, raw in zip(fields(TrialRow), values):
        if f.name in ("segment", "controller"):
            converted.append(raw)
        elif f.name == "seed":
            converted.append(int(raw))
        elif f.name == "excluded":
            converted.append(raw in ("1", "True", "true"))
        else:
            converted.append(float(raw))
    return TrialRow(*converted)
