"""Synthetic one-handed user.

The user pushes the handles with the right hand only. The push sits grip_offset to the
right of the sensor, so it adds a counter-clockwise moment f_x * grip_offset to the sensed
torque, and the wrist has to supply whatever torque the active controller needs on top.
Under the conventional controller that means cancelling the lever on every straight; under
the fuzzy controller the shoulder already carries the intent and the wrist only closes the gap.
"""
import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Deque, Dict, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from admittance import AngularAdmittanceParams
from config import Config
from errors import InvalidInputError
from fuzzy_controller import FuzzyProfile, calibrate_profile, infer_omega
from interaction import HandleWrench, clamp_omega

# Measured shoulder means, user 5
USER5_ANGLE_MEANS = {"right": 20.34, "straight": 27.17, "left": 39.06}


@dataclass(frozen=True)
class UserModelParams:
    push_force: float = 20.0            # nominal forward force (N)
    grip_offset: float = 0.25           # lateral lever arm of the hand about the sensor z-axis (m)
    wrist_torque_limit: float = 10.0    # N.m
    reaction_delay: float = 0.1         # s
    slew_time: float = 0.15             # first-order time constant of the wrist (s)
    noise_sigma_force: float = 1.0      # N
    noise_sigma_torque: float = 0.2     # N.m
    noise_sigma_angle: float = 1.5      # deg
    angle_slew: float = 40.0            # shoulder slew limit (deg/s)
    speed_gain: float = 0.5             # push regulation toward the target speed
    k_h: float = 0.8                    # heading correction (deg/s per deg)
    k_y: float = 35.0                   # cross-track correction (deg/s per m)
    threshold_spread: float = 5.0       # torque distance of the right/left terms from the lever (N.m)
    anticipation_margin_s: float = 0.15  # extra lead on top of reaction and device lag
    omega_tol: float = Config.OMEGA_TOL_DPS
    angle_means: Dict[str, float] = field(default_factory=lambda: dict(USER5_ANGLE_MEANS))

    def __post_init__(self):
        if self.push_force < 0 or self.grip_offset < 0 or self.wrist_torque_limit <= 0:
            raise InvalidInputError(f"invalid user model geometry {self}")
        sigmas = (self.noise_sigma_force, self.noise_sigma_torque, self.noise_sigma_angle)
        if any(s < 0 for s in sigmas):
            raise InvalidInputError("noise sigmas must be non-negative")
        if self.reaction_delay < 0 or self.slew_time <= 0 or self.angle_slew <= 0:
            raise InvalidInputError("invalid reaction dynamics")
        if self.anticipation_margin_s < 0 or self.threshold_spread <= 0:
            raise InvalidInputError("anticipation margin must be non-negative and threshold spread positive")
        means = self.angle_means
        if not means.get("right", 0) < means.get("straight", 0) < means.get("left", 0):
            raise InvalidInputError(f"angle means must satisfy right < straight < left, got {means}")

    def noiseless(self) -> "UserModelParams":
        return replace(self, noise_sigma_force=0.0, noise_sigma_torque=0.0, noise_sigma_angle=0.0)

    def two_handed(self) -> "UserModelParams":
        """Idealized bilateral operation: the push is centered on the sensor."""
        return replace(self, grip_offset=0.0)

    @property
    def lever_moment(self) -> float:
        return self.push_force * self.grip_offset

    def torque_thresholds(self) -> Dict[str, float]:
        """Torque centers a calibration session measures for this user: the relaxed push sits on Neutral."""
        lever = self.lever_moment
        return {"right": lever - self.threshold_spread, "straight": lever, "left": lever + self.threshold_spread}

    def lookahead_s(self, device_lag_s: float) -> float:
        """How early the user starts acting on the next segment."""
        return self.reaction_delay + self.slew_time + device_lag_s + self.anticipation_margin_s


def calibrated_profile(params: UserModelParams, mirror: bool = False) -> FuzzyProfile:
    """Fuzzy profile fitted to a synthetic user's shoulder means and relaxed push."""
    return calibrate_profile(params.angle_means, params.torque_thresholds(), mirror)


@dataclass(frozen=True)
class UserObservation:
    """What the user perceives of the walker and the course on one tick."""
    direction: str              # intended direction of the active segment
    target_speed: float         # m/s
    feedforward_rate: float     # deg/s along the reference path
    heading_error: float        # deg, reference minus actual
    cross_track: float          # m, positive = left of the path
    v: float
    omega: float


@dataclass(frozen=True)
class UserAction:
    wrench: HandleWrench
    tau_wrist: float
    abduction_deg: float
    saturated: bool


def minimum_effort_torque(profile: FuzzyProfile, angle: float, lever_moment: float,
                          desired_omega: float, tol: float, limit: float) -> Tuple[float, bool]:
    """Smallest |wrist torque| whose sustained sensed torque brings the fuzzy output within tol."""
    def gap(tau_wrist: float) -> float:
        return infer_omega(profile, angle, tau_wrist + lever_moment) - desired_omega

    g0 = gap(0.0)
    if abs(g0) < tol:
        return 0.0, False
    side = math.copysign(1.0, g0)
    # Aim just inside the tolerance band on the near side
    boundary = side * tol * 0.9

    def crossing(tau_wrist: float) -> float:
        return gap(tau_wrist) - boundary

    end = -side * limit
    if crossing(end) * side > 0:
        return end, True
    return brentq(crossing, min(0.0, end), max(0.0, end), xtol=1e-4), False


class OneHandedUser:
    """Per-trial user state: delayed perception, wrist slew, shoulder slew, seeded noise."""

    def __init__(self, params: UserModelParams, controller_kind: str,
                 profile: Optional[FuzzyProfile], rng: np.random.Generator,
                 hz: float = Config.SAMPLE_RATE_HZ,
                 torque_per_rate: float = AngularAdmittanceParams().k_a):
        if controller_kind == "fuzzy" and profile is None:
            raise InvalidInputError("the fuzzy user needs a calibrated profile")
        self.params = params
        self.controller_kind = controller_kind
        self.profile = profile
        self.rng = rng
        self.dt = 1.0 / hz
        # Learned static gain of the conventional walker (N.m per rad/s)
        self.torque_per_rate = torque_per_rate
        self.perceived: Deque[UserObservation] = deque(maxlen=int(round(params.reaction_delay * hz)) + 1)
        self.tau_wrist = 0.0
        self.angle = params.angle_means["straight"]

    def step(self, observation: UserObservation) -> UserAction:
        p = self.params
        self.perceived.append(observation)
        seen = self.perceived[0]

        push = self._push(seen)
        expected_lever = push * p.grip_offset
        desired = clamp_omega(seen.feedforward_rate + p.k_h * seen.heading_error - p.k_y * seen.cross_track)

        self._slew_angle(observation.direction)
        if self.controller_kind == "fuzzy":
            target, saturated = minimum_effort_torque(
                self.profile, self.angle, expected_lever, desired, p.omega_tol, p.wrist_torque_limit)
        else:
            target = self.torque_per_rate * math.radians(desired) - expected_lever
            saturated = abs(target) > p.wrist_torque_limit
            target = max(-p.wrist_torque_limit, min(p.wrist_torque_limit, target))

        self.tau_wrist += min(1.0, self.dt / p.slew_time) * (target - self.tau_wrist)

        noise_f, noise_tau, noise_angle = self.rng.normal(
            0.0, (p.noise_sigma_force, p.noise_sigma_torque, p.noise_sigma_angle))
        force = push + noise_f
        wrench = HandleWrench(force, self.tau_wrist + force * p.grip_offset + noise_tau)
        measured = min(180.0, max(0.0, self.angle + noise_angle))
        return UserAction(wrench, self.tau_wrist, measured, saturated)

    def _push(self, seen: UserObservation) -> float:
        p = self.params
        if seen.target_speed <= 0:
            return 0.0
        scale = 1.0 + p.speed_gain * (seen.target_speed - seen.v) / seen.target_speed
        return p.push_force * min(2.0, max(0.0, scale))

    def _slew_angle(self, direction: str) -> None:
        target = self.params.angle_means[direction]
        step = self.params.angle_slew * self.dt
        self.angle += max(-step, min(step, target - self.angle))
