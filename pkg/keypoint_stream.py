"""Replay of recorded keypoint and handle-torque streams through the fuzzy controller.

Keypoints arrive as JSON lines, one frame per line:

    {"t": 0.02, "joints": {"right_shoulder": {"x": 640, "y": 360, "depth": 1.2, "confidence": 0.9}, ...}}

Handle torque arrives as CSV with the header `t,fx_N,tauz_Nm`.
"""
import csv
import json
import logging
from typing import Iterable, Iterator, List, Optional, Tuple

import numpy as np

from config import Config
from errors import InvalidInputError, StreamOrderError, WalkerError
from fuzzy_controller import FuzzyController
from interaction import HandleWrench, VelocityCommand
from pose_geometry import BodyFrame, CameraIntrinsics, Keypoint2D, ShoulderStream, arm_frame
from profile_file import ProfileFile
from signals import SampleRate, Timestamped, resample_zoh
from trial_log import TrialLog

TORQUE_COLUMNS = ("t", "fx_N", "tauz_Nm")


def parse_frame(line: str) -> BodyFrame:
    record = json.loads(line)
    joints = {}
    for name, kp in record.get("joints", {}).items():
        joints[name] = Keypoint2D(name, float(kp["x"]), float(kp["y"]), float(kp["depth"]),
                                  float(kp.get("confidence", 1.0)))
    return BodyFrame(Timestamped(float(record["t"]), None).t, joints)


def frame_to_json(frame: BodyFrame) -> str:
    joints = {
        name: {"x": kp.x, "y": kp.y, "depth": kp.depth, "confidence": kp.confidence}
        for name, kp in frame.joints.items()
    }
    return json.dumps({"t": round(frame.t, 9), "joints": joints}, sort_keys=True)


def read_frames(lines: Iterable[str]) -> List[Tuple[int, BodyFrame]]:
    """Frames with their line numbers; malformed lines are skipped with a warning."""
    frames: List[Tuple[int, BodyFrame]] = []
    for n, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            frame = parse_frame(line)
        except (ValueError, KeyError, TypeError, AttributeError, WalkerError) as e:
            logging.warning(f"Skipping malformed keypoint line {n}: {e}")
            continue
        if frames and frame.t <= frames[-1][1].t:
            raise StreamOrderError(n, f"keypoint stream: timestamp {frame.t} at line {n} "
                                      f"is not after {frames[-1][1].t}")
        frames.append((n, frame))
    return frames


def read_torque(lines: Iterable[str]) -> List[Timestamped[HandleWrench]]:
    reader = csv.reader(lines)
    header = tuple(next(reader, ()))
    if header and header != TORQUE_COLUMNS:
        raise InvalidInputError(f"torque stream: expected header {','.join(TORQUE_COLUMNS)}, got {header}")
    events: List[Timestamped[HandleWrench]] = []
    for n, values in enumerate(reader, 2):
        if not values:
            continue
        try:
            t, fx, tau = (float(v) for v in values)
            event = Timestamped(t, HandleWrench(fx, tau))
        except (ValueError, WalkerError) as e:
            logging.warning(f"Skipping malformed torque line {n}: {e}")
            continue
        if events and event.t <= events[-1].t:
            raise StreamOrderError(n, f"torque stream: timestamp {event.t} at line {n} is not after {events[-1].t}")
        events.append(event)
    return events


def _wrench_channels(events: List[Timestamped[HandleWrench]], rate: SampleRate,
                     duration: float) -> Tuple[np.ndarray, np.ndarray]:
    n = rate.ticks(duration)
    if not events:
        logging.warning("Torque stream is empty, replaying with zero handle wrench")
        return np.zeros(n), np.zeros(n)
    fx = resample_zoh([Timestamped(e.t, e.value.f_x) for e in events], rate, duration)
    tau = resample_zoh([Timestamped(e.t, e.value.tau_z) for e in events], rate, duration)
    return fx.samples, tau.samples


def replay(profile: ProfileFile, frame_lines: Iterable[str], torque_lines: Iterable[str],
           hz: float = Config.SAMPLE_RATE_HZ) -> Iterator[Timestamped[VelocityCommand]]:
    """One velocity command per control tick, from the first tick to the last keypoint frame."""
    frames = read_frames(frame_lines)
    events = read_torque(torque_lines)
    if not frames:
        return
    rate = SampleRate(hz)
    duration = frames[-1][1].t + rate.dt
    fx, tau = _wrench_channels(events, rate, duration)

    controller = FuzzyController(profile.fuzzy, profile.linear, hz)
    stream = ShoulderStream(profile.camera, profile.fuzzy.straight_angle, mirror=profile.fuzzy.mirror)
    pending = iter(frames)
    upcoming: Optional[Tuple[int, BodyFrame]] = next(pending, None)

    for k in range(len(fx)):
        t = k * rate.dt
        shoulder = None
        while upcoming is not None and upcoming[1].t <= t + 1e-9:
            shoulder = stream.update(upcoming[1], upcoming[0])
            upcoming = next(pending, None)
        if shoulder is None:
            shoulder = stream.bridge(t)
        cmd = controller.tick(HandleWrench(float(fx[k]), float(tau[k])), shoulder)
        yield Timestamped(t, cmd)


def format_command(command: Timestamped[VelocityCommand]) -> str:
    return f"{command.t:.3f},{command.value.v:.6f},{command.value.omega:.6f}"


def synthesize_keypoints(log: TrialLog, K: CameraIntrinsics, mirror: bool = False) -> List[BodyFrame]:
    """Render a trial's logged abduction angle as a keypoint frame stream."""
    return [arm_frame(row.t, row.abduction_deg, K, mirror=mirror) for row in log.rows]


def torque_csv(log: TrialLog) -> str:
    lines = [",".join(TORQUE_COLUMNS)]
    lines += [f"{row.t:.9g},{row.fx_N:.9g},{row.tauz_Nm:.9g}" for row in log.rows]
    return "\n".join(lines) + "\n"


def keypoints_jsonl(frames: Iterable[BodyFrame]) -> str:
    return "".join(frame_to_json(frame) + "\n" for frame in frames)

