import csv
import io

import pytest

from analysis import AngleTableRow, ComparisonReport, DirectionComparison
from report_writer import (PLOT_COLUMNS, REPORT_COLUMNS, ReportWriter, angle_table_text, comparison_table,
                           pearson_table_text, plot_data_csv, report_csv, write_atomic)
from trial_log import TrialLog, TrialRow


@pytest.fixture
def report():
    return ComparisonReport(
        "user5",
        [DirectionComparison("straight", -1.0, 0.1, 0.0, 0.05, 100.0, 3, None, None),
         DirectionComparison("right", -5.0, 0.1, -0.9, 0.05, 82.0, 3, -47.3, 0.00045)],
        {"course_4m_90/conventional/0": 0.91},
        {"course_4m_90/0": (4, 1)},
    )


def tiny_pair():
    logs = []
    for controller in ("conventional", "fuzzy"):
        log = TrialLog("course_4m_90", controller, 0)
        log.rows.append(TrialRow(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 5.0, 1.0, 0.0, 27.0, "0:straight", controller, 0))
        log.rows.append(TrialRow(0.02, 0.01, 0.0, -1.5, 0.5, -2.0, 5.0, 1.0, 0.0, 27.0, "0:straight", controller, 0))
        logs.append(log)
    return [tuple(logs)]


def test_report_csv_rows(report):
    rows = list(csv.reader(io.StringIO(report_csv(report))))
    assert tuple(rows[0]) == REPORT_COLUMNS
    assert rows[1][:2] == ["user5", "straight"] and rows[1][-2:] == ["", ""]
    assert rows[2] == ["user5", "right", "-5", "0.1", "-0.9", "0.05", "82", "3", "-47.3", "0.00045"]


def test_comparison_table_lists_directions_and_extras(report):
    text = comparison_table(report)
    assert "Right" in text and "82.00%" in text
    assert "course_4m_90/conventional/0" in text
    assert "4 /    1" in text


def test_angle_and_pearson_tables():
    row = AngleTableRow("user5", {"left": (39.1, 2.0, 5), "straight": (27.2, 1.0, 5), "right": (20.3, 1.5, 5)},
                        (8.5, 0.001), None)
    text = angle_table_text([row])
    assert text.splitlines()[1].startswith("user5")
    assert "p=0.001" in text
    assert pearson_table_text({"user5": {"SR": 0.62}}).splitlines()[1].split() == ["user5", "0.62"]


def test_plot_data_has_both_controllers():
    rows = list(csv.reader(io.StringIO(plot_data_csv(tiny_pair()))))
    assert tuple(rows[0]) == PLOT_COLUMNS
    assert [r[2] for r in rows[1:]] == ["conventional", "conventional", "fuzzy", "fuzzy"]
    assert rows[2][3:] == ["0.020", "-1.5", "-2"]


def test_writer_emits_report_table_and_plot_data(tmp_path, report):
    written = ReportWriter(tmp_path / "out" / "report.csv").write(report, tiny_pair())
    assert [p.name for p in written] == ["report.csv", "report_table.txt", "report_heading.csv"]
    assert sorted(p.name for p in (tmp_path / "out").iterdir()) == [
        "report.csv", "report_heading.csv", "report_table.txt"]


def test_write_atomic_replaces_existing_file(tmp_path):
    path = tmp_path / "a.txt"
    path.write_text("old")
    write_atomic(path, "new")
    assert path.read_text() == "new"
    assert [p.name for p in tmp_path.iterdir()] == ["a.txt"]
