"""Desk-scale reproduction of the controller comparison with the synthetic one-handed user."""
import pytest

from analysis import (angle_table, compare_controllers, heading_rate_zero_crossings, trial_correlation)
from scenario_file import load_scenario
from walker_sim import run_trial

SEEDS = range(5)


@pytest.fixture(scope="module")
def runs(user_profile):
    logs = {}
    for name in ("course_4m_90", "course_4m_90_left"):
        scenario = load_scenario(f"{name}.scenario")
        for controller in ("conventional", "fuzzy"):
            logs[(name, controller)] = [run_trial(scenario, controller, seed, user_profile) for seed in SEEDS]
    return logs


def test_every_trial_completes(runs):
    assert all(log.complete for logs in runs.values() for log in logs)


def test_fuzzy_control_reduces_wrist_torque(runs):
    right = compare_controllers(runs[("course_4m_90", "conventional")] + runs[("course_4m_90", "fuzzy")], "user5")
    assert right.direction("straight").reduction_pct >= 50.0
    assert right.direction("right").reduction_pct >= 50.0
    left = compare_controllers(runs[("course_4m_90_left", "conventional")] + runs[("course_4m_90_left", "fuzzy")])
    assert left.direction("straight").reduction_pct >= 50.0
    assert left.direction("left").n_pairs == len(SEEDS)
    assert left.direction("left").reduction_pct > 0.0


def test_conventional_trials_correlate_angle_and_torque(runs):
    strong = [trial_correlation(log) >= 0.69 for log in runs[("course_4m_90", "conventional")]]
    assert sum(strong) >= 4


@pytest.mark.parametrize("scenario, turn", [("course_4m_90", "right"), ("course_4m_90_left", "left")])
def test_turn_angles_separate_from_straight(runs, scenario, turn):
    row = angle_table(runs[(scenario, "conventional")], "user5")
    _, p = row.straight_vs_right if turn == "right" else row.left_vs_straight
    assert p < 0.05


def test_heading_rate_crossings_are_reported_per_seed(runs):
    report = compare_controllers(runs[("course_4m_90", "conventional")] + runs[("course_4m_90", "fuzzy")])
    assert sorted(report.smoothness) == [f"course_4m_90/{seed}" for seed in SEEDS]
    smoother = [fuzzy < conventional for conventional, fuzzy in report.smoothness.values()]
    assert sum(smoother) >= 4
