import math

import numpy as np
import pytest

from errors import InvalidInputError
from fuzzy_controller import infer_omega
from user_model import OneHandedUser, UserModelParams, UserObservation, calibrated_profile, minimum_effort_torque


def straight_ahead(v=0.5):
    return UserObservation("straight", 0.5, 0.0, 0.0, 0.0, v, 0.0)


def test_no_wrist_effort_when_lever_alone_is_within_tolerance(user5_profile):
    desired = infer_omega(user5_profile, 27.17, 1.0)
    assert minimum_effort_torque(user5_profile, 27.17, 1.0, desired, 3.0, 10.0) == (0.0, False)


@pytest.mark.parametrize("angle, desired", [(27.17, -30.0), (27.17, -15.0), (39.06, 20.0), (39.06, 40.0)])
def test_minimum_effort_reaches_tolerance(user5_profile, angle, desired):
    tau, saturated = minimum_effort_torque(user5_profile, angle, 1.0, desired, 3.0, 10.0)
    assert not saturated
    assert abs(infer_omega(user5_profile, angle, tau + 1.0) - desired) <= 3.0


def test_minimum_effort_picks_smallest_torque(user5_profile):
    tau, _ = minimum_effort_torque(user5_profile, 27.17, 1.0, -30.0, 3.0, 10.0)
    smaller = tau * 0.9
    assert abs(infer_omega(user5_profile, 27.17, smaller + 1.0) + 30.0) > 2.0


def test_unreachable_rate_saturates_wrist(user5_profile):
    tau, saturated = minimum_effort_torque(user5_profile, 27.17, 1.0, 85.0, 3.0, 0.5)
    assert saturated and tau == 0.5


def test_without_push_sensed_torque_is_wrist_torque(user5_profile):
    params = UserModelParams(push_force=0.0).noiseless()
    user = OneHandedUser(params, "conventional", None, np.random.default_rng(0))
    turning = UserObservation("right", 0.5, -28.0, -3.0, 0.1, 0.5, -10.0)
    for _ in range(20):
        action = user.step(turning)
        assert action.wrench.tau_z == action.tau_wrist
        assert action.wrench.f_x == 0.0


def test_conventional_user_cancels_the_lever_moment_on_straights():
    user = OneHandedUser(UserModelParams().noiseless(), "conventional", None, np.random.default_rng(0))
    for _ in range(200):
        action = user.step(straight_ahead())
    assert action.tau_wrist == pytest.approx(-5.0, abs=0.05 * 5.0)
    assert action.wrench.tau_z == pytest.approx(0.0, abs=1e-6)


def test_fuzzy_user_relaxes_the_wrist_on_straights(user_profile):
    params = UserModelParams().noiseless()
    user = OneHandedUser(params, "fuzzy", user_profile, np.random.default_rng(0))
    for _ in range(200):
        action = user.step(straight_ahead())
        assert abs(action.tau_wrist) < 0.3 * params.lever_moment
    assert action.tau_wrist == 0.0
    assert action.abduction_deg == pytest.approx(27.17)


def test_shoulder_slews_toward_direction_mean(user5_profile):
    params = UserModelParams().noiseless()
    user = OneHandedUser(params, "fuzzy", user5_profile, np.random.default_rng(0))
    left = UserObservation("left", 0.5, 28.0, 0.0, 0.0, 0.5, 0.0)
    first = user.step(left).abduction_deg
    assert first == pytest.approx(27.17 + params.angle_slew * 0.02)
    for _ in range(100):
        last = user.step(left).abduction_deg
    assert last == pytest.approx(39.06)


def test_same_seed_gives_same_actions(user5_profile):
    def actions(seed):
        user = OneHandedUser(UserModelParams(), "fuzzy", user5_profile, np.random.default_rng(seed))
        return [user.step(straight_ahead()) for _ in range(30)]

    assert actions(3) == actions(3)
    assert actions(3) != actions(4)


def test_fuzzy_user_needs_profile():
    with pytest.raises(InvalidInputError):
        OneHandedUser(UserModelParams(), "fuzzy", None, np.random.default_rng(0))


@pytest.mark.parametrize("kwargs", [
    {"grip_offset": -0.1},
    {"noise_sigma_torque": -1.0},
    {"slew_time": 0.0},
    {"angle_means": {"right": 30.0, "straight": 27.0, "left": 39.0}},
])
def test_user_parameters_are_validated(kwargs):
    with pytest.raises(InvalidInputError):
        UserModelParams(**kwargs)


def test_two_handed_user_has_no_lever():
    assert UserModelParams().two_handed().grip_offset == 0.0


def test_default_push_gives_five_newton_meter_lever():
    params = UserModelParams()
    assert (params.push_force, params.grip_offset) == (20.0, 0.25)
    assert params.lever_moment == pytest.approx(5.0)


def test_calibrated_profile_centers_neutral_on_the_lever(user_profile):
    assert user_profile.torque_var.centers() == (0.0, 5.0, 10.0)
    assert user_profile.angle_var.centers() == (20.34, 27.17, 39.06)
    assert calibrated_profile(UserModelParams(), mirror=True).mirror


def test_sensed_lever_follows_the_actual_push():
    params = UserModelParams(noise_sigma_torque=0.0, noise_sigma_angle=0.0)
    user = OneHandedUser(params, "conventional", None, np.random.default_rng(5))
    for _ in range(10):
        action = user.step(straight_ahead())
        lever = action.wrench.f_x * params.grip_offset
        assert action.wrench.tau_z == pytest.approx(action.tau_wrist + lever, abs=1e-12)


def test_conventional_user_inverts_the_static_gain_in_turns():
    params = UserModelParams().noiseless()
    user = OneHandedUser(params, "conventional", None, np.random.default_rng(0), torque_per_rate=6.0)
    turning = UserObservation("right", 0.5, -28.65, 0.0, 0.0, 0.5, -28.65)
    for _ in range(200):
        action = user.step(turning)
    assert action.tau_wrist == pytest.approx(6.0 * math.radians(-28.65) - params.lever_moment, abs=1e-6)


def test_lookahead_adds_device_lag_to_reaction():
    params = UserModelParams()
    assert params.lookahead_s(0.5) == pytest.approx(
        params.reaction_delay + params.slew_time + 0.5 + params.anticipation_margin_s)
