import csv
import io
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

from analysis import AngleTableRow, ComparisonReport
from trial_log import TrialLog

REPORT_COLUMNS = ("profile", "direction", "cc_mean_Nm", "cc_std_Nm", "pc_mean_Nm", "pc_std_Nm",
                  "reduction_pct", "n_pairs", "t", "p")
PLOT_COLUMNS = ("scenario", "seed", "controller", "t", "heading_deg", "omega_dps")


def _num(value: Optional[float]) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return f"{value:.6g}"


def write_atomic(path: Path, text: str) -> Path:
    """Replace path in one step; a failure leaves no partial file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except Exception:
        os.unlink(tmp)
        raise
    return path


def report_csv(report: ComparisonReport) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for row in report.directions:
        writer.writerow([report.profile, row.direction, _num(row.cc_mean), _num(row.cc_std),
                         _num(row.pc_mean), _num(row.pc_std), _num(row.reduction_pct),
                         row.n_pairs, _num(row.t), _num(row.p)])
    return buffer.getvalue()


def _pm(mean: float, std: float) -> str:
    return f"{mean:7.2f} ± {std:5.2f}"


def comparison_table(report: ComparisonReport) -> str:
    """Wrist torque per direction under both controllers, with the percent reduction."""
    lines = [
        f"Exerted torque by the right wrist (N·m), profile {report.profile}",
        f"{'Direction':<10} {'Conventional':>16} {'Fuzzy':>16} {'Reduction':>10} {'t':>8} {'p':>8}",
    ]
    for row in report.directions:
        t = f"{row.t:8.3f}" if row.t is not None else f"{'-':>8}"
        p = f"{row.p:8.4f}" if row.p is not None else f"{'-':>8}"
        lines.append(f"{row.direction.capitalize():<10} {_pm(row.cc_mean, row.cc_std):>16} "
                     f"{_pm(row.pc_mean, row.pc_std):>16} {row.reduction_pct:9.2f}% {t} {p}")
    if report.correlations:
        lines.append("")
        lines.append("Pearson r (smoothed torque vs abduction angle)")
        for name, r in sorted(report.correlations.items()):
            lines.append(f"  {name:<40} {r:6.3f}")
    if report.smoothness:
        lines.append("")
        lines.append("Heading-rate zero crossings (conventional / fuzzy)")
        for name, (cc, pc) in sorted(report.smoothness.items()):
            lines.append(f"  {name:<40} {cc:4d} / {pc:4d}")
    return "\n".join(lines) + "\n"


def angle_table_text(rows: Iterable[AngleTableRow]) -> str:
    """Shoulder abduction per direction with paired t-tests, one line per profile."""
    lines = [f"{'Profile':<10} {'Left':>16} {'Straight':>16} {'Right':>16} {'t (L vs S)':>18} {'t (S vs R)':>18}"]
    for row in rows:
        cells = []
        for direction in ("left", "straight", "right"):
            mean, std, _ = row.means.get(direction, (math.nan, math.nan, 0))
            cells.append(f"{_pm(mean, std):>16}")
        tests = []
        for result in (row.left_vs_straight, row.straight_vs_right):
            tests.append(f"{result[0]:7.2f} (p={result[1]:.3f})" if result else f"{'-':>18}")
        lines.append(f"{row.profile:<10} {' '.join(cells)} {tests[0]:>18} {tests[1]:>18}")
    return "\n".join(lines) + "\n"


def pearson_table_text(by_profile: Dict[str, Dict[str, float]]) -> str:
    lines = [f"{'Profile':<10} {'SL':>8} {'SR':>8}"]
    for profile, tasks in sorted(by_profile.items()):
        sl, sr = tasks.get("SL"), tasks.get("SR")
        lines.append(f"{profile:<10} {_num(sl):>8} {_num(sr):>8}")
    return "\n".join(lines) + "\n"


def plot_data_csv(pairs: Iterable[Tuple[TrialLog, TrialLog]]) -> str:
    """Heading over time for matched runs, long format, ready for any plotter."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(PLOT_COLUMNS)
    for pair in pairs:
        for log in pair:
            for row in log.rows:
                writer.writerow([log.scenario, log.seed, log.controller, f"{row.t:.3f}",
                                 f"{row.heading_deg:.6g}", f"{row.omega_dps:.6g}"])
    return buffer.getvalue()


class ReportWriter:
    """Writes the comparison CSV, the text tables and the heading plot data side by side."""

    def __init__(self, report_path: Path):
        self.report_path = Path(report_path)
        self.base = self.report_path.with_suffix("")

    def write(self, report: ComparisonReport, pairs: List[Tuple[TrialLog, TrialLog]],
              angle_rows: Iterable[AngleTableRow] = (),
              pearson_rows: Optional[Dict[str, Dict[str, float]]] = None) -> List[Path]:
        text = comparison_table(report)
        angle_rows = list(angle_rows)
        if angle_rows:
            text += "\nShoulder abduction angles (deg)\n" + angle_table_text(angle_rows)
        if pearson_rows:
            text += "\nAverage Pearson correlation per task\n" + pearson_table_text(pearson_rows)

        written = [
            write_atomic(self.report_path, report_csv(report)),
            write_atomic(self.base.with_name(self.base.name + "_table.txt"), text),
            write_atomic(self.base.with_name(self.base.name + "_heading.csv"), plot_data_csv(pairs)),
        ]
        for path in written:
            logging.info(f"Wrote {path}")
        return written
