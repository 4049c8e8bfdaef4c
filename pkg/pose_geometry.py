"""Keypoints with depth to 3D joints to the shoulder abduction angle."""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from config import Config
from errors import DegeneratePoseError, InvalidKeypointError, StreamOrderError

# BODY_18 / COCO18 labels
BODY_18 = (
    "nose", "neck",
    "right_shoulder", "right_elbow", "right_wrist",
    "left_shoulder", "left_elbow", "left_wrist",
    "right_hip", "right_knee", "right_ankle",
    "left_hip", "left_knee", "left_ankle",
    "right_eye", "left_eye", "right_ear", "left_ear",
)

RIGHT_ARM = ("right_shoulder", "right_elbow", "right_hip")
LEFT_ARM = ("left_shoulder", "left_elbow", "left_hip")


@dataclass(frozen=True)
class CameraIntrinsics:
    f_x: float
    f_y: float
    c_x: float
    c_y: float

    def __post_init__(self):
        if not (self.f_x > 0 and self.f_y > 0):
            raise InvalidKeypointError(f"focal lengths must be positive: {self}")


@dataclass(frozen=True)
class Keypoint2D:
    name: str
    x: float
    y: float
    depth: float
    confidence: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise InvalidKeypointError(f"{self.name}: confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class Keypoint3D:
    name: str
    X: float
    Y: float
    Z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.X, self.Y, self.Z], dtype=float)


@dataclass(frozen=True)
class BodyFrame:
    t: float
    joints: Dict[str, Keypoint2D] = field(default_factory=dict)


@dataclass(frozen=True)
class ShoulderState:
    t: float
    abduction_deg: float
    valid: bool = True


def deproject(p: Keypoint2D, K: CameraIntrinsics) -> Keypoint3D:
    """Pinhole back-projection of a pixel with metric depth."""
    if not p.depth > 0:
        raise InvalidKeypointError(f"{p.name}: depth {p.depth} must be positive")
    Z = p.depth
    X = (p.x - K.c_x) * Z / K.f_x
    Y = (p.y - K.c_y) * Z / K.f_y
    return Keypoint3D(p.name, X, Y, Z)


def project(p: Keypoint3D, K: CameraIntrinsics, confidence: float = 1.0) -> Keypoint2D:
    if not p.Z > 0:
        raise InvalidKeypointError(f"{p.name}: Z {p.Z} must be positive")
    x = p.X * K.f_x / p.Z + K.c_x
    y = p.Y * K.f_y / p.Z + K.c_y
    return Keypoint2D(p.name, x, y, p.Z, confidence)


def abduction_angle(shoulder: Keypoint3D, elbow: Keypoint3D, hip: Keypoint3D) -> float:
    """Angle in degrees between shoulder->elbow and shoulder->hip (cosine rule)."""
    u = elbow.as_array() - shoulder.as_array()
    w = hip.as_array() - shoulder.as_array()
    nu, nw = np.linalg.norm(u), np.linalg.norm(w)
    if nu == 0.0 or nw == 0.0:
        raise DegeneratePoseError("zero-length limb vector")
    cos = float(np.dot(u, w) / (nu * nw))
    return math.degrees(math.acos(max(-1.0, min(1.0, cos))))


def frame_to_shoulder_state(frame: BodyFrame, K: CameraIntrinsics,
                            min_confidence: float = Config.MIN_CONFIDENCE,
                            mirror: bool = False) -> ShoulderState:
    """Abduction angle of the operating side; invalid frames are reported in-band."""
    labels = LEFT_ARM if mirror else RIGHT_ARM
    points = []
    for label in labels:
        kp = frame.joints.get(label)
        if kp is None or kp.confidence < min_confidence or not kp.depth > 0:
            return ShoulderState(frame.t, 0.0, valid=False)
        points.append(deproject(kp, K))
    try:
        angle = abduction_angle(*points)
    except DegeneratePoseError as e:
        logging.debug(f"Degenerate pose at t={frame.t}: {e}")
        return ShoulderState(frame.t, 0.0, valid=False)
    return ShoulderState(frame.t, angle, valid=True)


class ShoulderStream:
    """Per-walker processor: strict ordering plus dropout hold and decay."""

    def __init__(self, K: CameraIntrinsics, straight_center: float,
                 min_confidence: float = Config.MIN_CONFIDENCE, mirror: bool = False,
                 hold_s: float = Config.DROPOUT_HOLD_S, decay_s: float = Config.DROPOUT_DECAY_S):
        self.K = K
        self.straight_center = straight_center
        self.min_confidence = min_confidence
        self.mirror = mirror
        self.hold_s = hold_s
        self.decay_s = decay_s
        self.last_t: Optional[float] = None
        self.last_valid: Optional[ShoulderState] = None

    def update(self, frame: BodyFrame, line_number: int = 0) -> ShoulderState:
        if self.last_t is not None and frame.t <= self.last_t:
            raise StreamOrderError(line_number)
        self.last_t = frame.t
        state = frame_to_shoulder_state(frame, self.K, self.min_confidence, self.mirror)
        if state.valid:
            self.last_valid = state
            return state
        return self.bridge(frame.t)

    def bridge(self, t: float) -> ShoulderState:
        """Stand-in state for a dropout at time t."""
        if self.last_valid is None:
            return ShoulderState(t, self.straight_center, valid=False)
        gap = t - self.last_valid.t
        if gap <= self.hold_s:
            return ShoulderState(t, self.last_valid.abduction_deg, valid=True)
        weight = math.exp(-(gap - self.hold_s) / self.decay_s)
        angle = self.straight_center + (self.last_valid.abduction_deg - self.straight_center) * weight
        return ShoulderState(t, angle, valid=False)


def arm_frame(t: float, angle_deg: float, K: CameraIntrinsics, depth: float = 1.2,
              upper_arm: float = 0.3, torso: float = 0.5, mirror: bool = False,
              confidence: float = 1.0) -> BodyFrame:
    """Synthetic frame whose shoulder->elbow vector makes angle_deg with the torso."""
    side = -1.0 if mirror else 1.0
    shoulder = Keypoint3D("shoulder", 0.0, 0.0, depth)
    # Camera y points down; the torso hangs along +Y and the arm abducts sideways in X
    a = math.radians(angle_deg)
    elbow = Keypoint3D("elbow", -side * upper_arm * math.sin(a), upper_arm * math.cos(a), depth)
    hip = Keypoint3D("hip", 0.0, torso, depth)
    labels = LEFT_ARM if mirror else RIGHT_ARM
    joints = {}
    for label, p in zip(labels, (shoulder, elbow, hip)):
        joints[label] = project(Keypoint3D(label, p.X, p.Y, p.Z), K, confidence)
    return BodyFrame(t, joints)
