import math
from dataclasses import dataclass

from config import Config
from errors import InvalidInputError


@dataclass(frozen=True)
class HandleWrench:
    """Force/torque sample from the handle sensor. Positive tau_z commands a left (CCW) turn."""
    f_x: float      # forward force on the handles (N)
    tau_z: float    # torque about the sensor z-axis (N.m)

    def __post_init__(self):
        if not (math.isfinite(self.f_x) and math.isfinite(self.tau_z)):
            raise InvalidInputError()


@dataclass(frozen=True)
class VelocityCommand:
    """Linear (m/s) and angular (deg/s, positive = left) velocity shared by both controllers."""
    v: float
    omega: float

    def __post_init__(self):
        if not math.isfinite(self.v) or not math.isfinite(self.omega):
            raise InvalidInputError()
        if abs(self.omega) > Config.OMEGA_LIMIT_DPS + 1e-9:
            raise InvalidInputError(f"omega {self.omega} exceeds steering limit")


def clamp_omega(omega: float, limit: float = Config.OMEGA_LIMIT_DPS) -> float:
    return max(-limit, min(limit, omega))
