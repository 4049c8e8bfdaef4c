"""Kinematic walker plant, course geometry and the closed-loop trial runner."""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from admittance import AngularAdmittanceParams, ConventionalController, LinearAdmittanceParams
from config import Config
from errors import InvalidInputError, ScenarioFormatError
from fuzzy_controller import FuzzyController, FuzzyProfile
from interaction import VelocityCommand
from pose_geometry import ShoulderState
from trial_log import TrialLog, TrialRow
from user_model import OneHandedUser, UserModelParams, UserObservation

CONTROLLERS = ("conventional", "fuzzy")


def wrap_degrees(angle: float) -> float:
    """Normalize to (-180, 180]."""
    wrapped = math.fmod(angle, 360.0)
    if wrapped <= -180.0:
        wrapped += 360.0
    elif wrapped > 180.0:
        wrapped -= 360.0
    return wrapped


@dataclass(frozen=True)
class WalkerPose:
    x: float = 0.0
    y: float = 0.0
    heading: float = 0.0    # deg, CCW-positive

    def __post_init__(self):
        object.__setattr__(self, "heading", wrap_degrees(self.heading))


def plant_step(pose: WalkerPose, cmd: VelocityCommand, dt: float) -> WalkerPose:
    """Forward-Euler unicycle step with ideal velocity tracking."""
    if not dt > 0:
        raise InvalidInputError("invalid tick duration")
    h = math.radians(pose.heading)
    return WalkerPose(
        pose.x + cmd.v * math.cos(h) * dt,
        pose.y + cmd.v * math.sin(h) * dt,
        pose.heading + cmd.omega * dt,
    )


@dataclass(frozen=True)
class Segment:
    kind: str                   # "straight" or "turn"
    amount: float               # length (m) for straight, signed angle (deg, + = left) for turn
    target_speed: float = 0.5   # m/s
    turn_radius: float = 1.0    # m, turns only

    def __post_init__(self):
        if self.kind not in ("straight", "turn"):
            raise ScenarioFormatError(f"unknown segment kind {self.kind!r}")
        if not self.target_speed > 0:
            raise ScenarioFormatError(f"target speed must be positive, got {self.target_speed}")
        if self.kind == "straight" and not self.amount > 0:
            raise ScenarioFormatError(f"straight length must be positive, got {self.amount}")
        if self.kind == "turn" and (not 0 < abs(self.amount) <= 180 or not self.turn_radius > 0):
            raise ScenarioFormatError(f"invalid turn {self.amount} deg at radius {self.turn_radius}")

    @property
    def direction(self) -> str:
        if self.kind == "straight":
            return "straight"
        return "left" if self.amount > 0 else "right"

    @property
    def length(self) -> float:
        """Path length in m."""
        if self.kind == "straight":
            return self.amount
        return self.turn_radius * math.radians(abs(self.amount))

    @property
    def turn_rate(self) -> float:
        """Heading rate (deg/s) of the reference path at the target speed."""
        if self.kind == "straight":
            return 0.0
        return math.copysign(math.degrees(self.target_speed / self.turn_radius), self.amount)

    def center(self, start: WalkerPose) -> Tuple[float, float]:
        """Center of a turn's arc."""
        side = math.copysign(1.0, self.amount)
        h = math.radians(start.heading)
        return (start.x - side * self.turn_radius * math.sin(h),
                start.y + side * self.turn_radius * math.cos(h))


@dataclass(frozen=True)
class Scenario:
    name: str
    segments: Tuple[Segment, ...]

    def __post_init__(self):
        if not self.segments:
            raise ScenarioFormatError(f"{self.name}: scenario has no segments")

    def reference(self) -> List[Tuple[WalkerPose, Segment]]:
        """Ideal start pose of every segment, starting at the origin facing +x."""
        poses = []
        pose = WalkerPose()
        for seg in self.segments:
            poses.append((pose, seg))
            h = math.radians(pose.heading)
            if seg.kind == "straight":
                pose = WalkerPose(pose.x + seg.amount * math.cos(h), pose.y + seg.amount * math.sin(h), pose.heading)
            else:
                side = math.copysign(1.0, seg.amount)
                cx, cy = seg.center(pose)
                end = h + math.radians(seg.amount)
                pose = WalkerPose(cx + side * seg.turn_radius * math.sin(end),
                                  cy - side * seg.turn_radius * math.cos(end),
                                  pose.heading + seg.amount)
        return poses


def _swept(x: float, y: float, start: WalkerPose, seg: Segment) -> Tuple[float, float]:
    """(degrees swept along a turn from its start, signed distance from the arc center)."""
    side = math.copysign(1.0, seg.amount)
    cx, cy = seg.center(start)
    phi0 = math.degrees(math.atan2(start.y - cy, start.x - cx))
    phi = math.degrees(math.atan2(y - cy, x - cx))
    # [-90, 270) so a walker slightly short of the arc reads as negative progress
    return (side * (phi - phi0) + 90.0) % 360.0 - 90.0, math.hypot(x - cx, y - cy)


def segment_errors(pose: WalkerPose, start: WalkerPose, seg: Segment) -> Tuple[float, float, float]:
    """(progress, heading error deg, cross-track m with left positive) against one reference segment."""
    h = math.radians(start.heading)
    dx, dy = pose.x - start.x, pose.y - start.y
    if seg.kind == "straight":
        along = dx * math.cos(h) + dy * math.sin(h)
        lateral = -dx * math.sin(h) + dy * math.cos(h)
        return along / seg.amount, wrap_degrees(start.heading - pose.heading), lateral
    side = math.copysign(1.0, seg.amount)
    swept, distance = _swept(pose.x, pose.y, start, seg)
    tangent = start.heading + side * swept
    # Outside the arc is to the right of a left turn and to the left of a right turn
    return swept / abs(seg.amount), wrap_degrees(tangent - pose.heading), -side * (distance - seg.turn_radius)


def distance_to_path(x: float, y: float, reference: Sequence[Tuple[WalkerPose, Segment]]) -> float:
    """Shortest distance from a point to the whole reference path."""
    best = math.inf
    for start, seg in reference:
        h = math.radians(start.heading)
        if seg.kind == "straight":
            along = min(seg.amount, max(0.0, (x - start.x) * math.cos(h) + (y - start.y) * math.sin(h)))
            best = min(best, math.hypot(x - start.x - along * math.cos(h), y - start.y - along * math.sin(h)))
            continue
        swept, distance = _swept(x, y, start, seg)
        if 0.0 <= swept <= abs(seg.amount):
            best = min(best, abs(distance - seg.turn_radius))
        else:
            cx, cy = seg.center(start)
            side = math.copysign(1.0, seg.amount)
            end = h + math.radians(seg.amount)
            ex, ey = cx + side * seg.turn_radius * math.sin(end), cy - side * seg.turn_radius * math.cos(end)
            best = min(best, math.hypot(x - start.x, y - start.y), math.hypot(x - ex, y - ey))
    return best


def build_controller(kind: str, profile: Optional[FuzzyProfile],
                     params_lin: LinearAdmittanceParams, params_ang: AngularAdmittanceParams,
                     hz: float):
    if kind == "conventional":
        return ConventionalController(params_lin, params_ang, hz)
    if kind == "fuzzy":
        if profile is None:
            raise InvalidInputError("fuzzy controller needs a profile")
        return FuzzyController(profile, params_lin, hz)
    raise InvalidInputError(f"unknown controller {kind!r}")


def run_trial(scenario: Scenario, controller_kind: str, seed: int,
              profile: Optional[FuzzyProfile] = None,
              user: UserModelParams = UserModelParams(),
              params_lin: LinearAdmittanceParams = LinearAdmittanceParams(),
              params_ang: AngularAdmittanceParams = AngularAdmittanceParams(),
              hz: float = Config.SAMPLE_RATE_HZ,
              timeout_s: float = Config.TRIAL_TIMEOUT_S) -> TrialLog:
    """Closed-loop trial at the control rate; deterministic for a fixed seed.

    The walker's own segment gives the tracking errors the user corrects. The user acts on
    the next segment (shoulder, feedforward rate, logged label) once the walker is within
    the user's lookahead of the current segment's end.
    """
    dt = 1.0 / hz
    controller = build_controller(controller_kind, profile, params_lin, params_ang, hz)
    rng = np.random.default_rng(seed)
    person = OneHandedUser(user, controller_kind, profile, rng, hz, params_ang.k_a)
    lookahead_s = user.lookahead_s(controller.response_lag_s)
    reference = scenario.reference()

    log = TrialLog(scenario.name, controller_kind, seed, hz=hz)
    pose = WalkerPose()
    cmd = VelocityCommand(0.0, 0.0)
    index = intent = 0
    max_ticks = int(round(timeout_s * hz))

    for tick in range(max_ticks):
        t = tick * dt
        start, seg = reference[index]
        _, heading_error, cross_track = segment_errors(pose, start, seg)
        if intent + 1 < len(reference):
            planned_start, planned = reference[intent]
            progress, _, _ = segment_errors(pose, planned_start, planned)
            if (1.0 - progress) * planned.length <= planned.target_speed * lookahead_s:
                intent += 1
        planned = reference[intent][1]
        observation = UserObservation(planned.direction, planned.target_speed, planned.turn_rate,
                                      heading_error, cross_track, cmd.v, cmd.omega)
        action = person.step(observation)
        if action.saturated:
            log.saturated_ticks += 1
        cmd = controller.tick(action.wrench, ShoulderState(t, action.abduction_deg))

        log.rows.append(TrialRow(
            t, pose.x, pose.y, pose.heading, cmd.v, cmd.omega,
            action.wrench.f_x, action.wrench.tau_z, action.tau_wrist, action.abduction_deg,
            f"{intent}:{planned.direction}", controller_kind, seed,
        ))
        pose = plant_step(pose, cmd, dt)

        progress, _, _ = segment_errors(pose, start, seg)
        if progress >= 1.0:
            index += 1
            intent = max(intent, index)
            if index == len(reference):
                break
    else:
        log.complete = False
        logging.warning(f"Trial {scenario.name}/{controller_kind}/seed {seed} timed out after {timeout_s} s "
                        f"in segment {index}")

    if log.saturated_ticks:
        logging.info(f"Trial {scenario.name}/{controller_kind}/seed {seed}: "
                     f"wrist torque saturated on {log.saturated_ticks} ticks")
    log.mark_edges()
    return log


def max_cross_track(log: TrialLog, scenario: Scenario) -> float:
    """Largest distance of any logged position from the reference path."""
    reference = scenario.reference()
    return max((distance_to_path(row.x, row.y, reference) for row in log.rows), default=0.0)
