"""Conventional admittance controller.

Force on the handles drives linear velocity through L(s) = (1/m) / (s^2 + (b_l/m)s + k_l/m)
and torque about the sensor z-axis drives angular velocity through the same shape with
(J, b_a, k_a). Both filters are discretized with the bilinear transform at the control rate.
"""
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy import signal

from config import Config
from errors import InvalidInputError
from interaction import HandleWrench, VelocityCommand, clamp_omega


@dataclass(frozen=True)
class LinearAdmittanceParams:
    m: float = 10.0     # virtual mass (kg)
    b_l: float = 40.0   # virtual damping (N.s/m)
    k_l: float = 40.0   # virtual elasticity (N/m), 20 N of push settles at 0.5 m/s

    def __post_init__(self):
        if not (self.m > 0 and self.b_l >= 0 and self.k_l > 0):
            raise InvalidInputError(f"invalid linear admittance parameters {self}")

    def as_tf(self) -> Tuple[float, float, float]:
        return self.m, self.b_l, self.k_l


@dataclass(frozen=True)
class AngularAdmittanceParams:
    J: float = 1.0      # virtual inertia (kg.m^2)
    b_a: float = 1.7    # angular damping (N.m.s/rad)
    k_a: float = 6.0    # angular elasticity (N.m/rad)

    def __post_init__(self):
        if not (self.J > 0 and self.b_a >= 0 and self.k_a > 0):
            raise InvalidInputError(f"invalid angular admittance parameters {self}")

    def as_tf(self) -> Tuple[float, float, float]:
        return self.J, self.b_a, self.k_a


@dataclass(frozen=True)
class SecondOrderState:
    """State of one discretized admittance filter.

    The filter is the mass-spring-damper inertia*q'' + damping*q' + elasticity*q = u with output q,
    realized in state space so the zero-input energy never grows.
    """
    x1: float = 0.0
    x2: float = 0.0
    dt: float = 1.0 / Config.SAMPLE_RATE_HZ

    def norm(self, params) -> float:
        """Energy norm sqrt(elasticity*x1^2 + inertia*x2^2); non-increasing under zero input when damping > 0."""
        inertia, _, elasticity = params.as_tf()
        return math.sqrt(elasticity * self.x1 ** 2 + inertia * self.x2 ** 2)


@lru_cache(maxsize=64)
def discretize(inertia: float, damping: float, elasticity: float, dt: float):
    """Bilinear (Tustin) state-space form (Ad, Bd, Cd, Dd) of (1/inertia) / (s^2 + (damping/inertia)s + elasticity/inertia)."""
    a = np.array([[0.0, 1.0], [-elasticity / inertia, -damping / inertia]])
    b = np.array([[0.0], [1.0 / inertia]])
    c = np.array([[1.0, 0.0]])
    d = np.array([[0.0]])
    ad, bd, cd, dd, _ = signal.cont2discrete((a, b, c, d), dt, method="bilinear")
    return ad, bd.ravel(), cd.ravel(), float(dd[0, 0])


def _second_order_step(state: SecondOrderState, params, u: float) -> Tuple[SecondOrderState, float]:
    if not state.dt > 0:
        raise InvalidInputError("invalid tick duration")
    if not math.isfinite(u):
        raise InvalidInputError()
    ad, bd, cd, dd = discretize(*params.as_tf(), state.dt)
    x = np.array([state.x1, state.x2])
    y = float(cd @ x) + dd * u
    x1, x2 = ad @ x + bd * u
    return SecondOrderState(float(x1), float(x2), state.dt), y


def linear_admittance_step(state: SecondOrderState, params: LinearAdmittanceParams,
                           force: float) -> Tuple[SecondOrderState, float]:
    """Advance L(s) one tick; returns the new state and v in m/s."""
    return _second_order_step(state, params, force)


def angular_admittance_step(state: SecondOrderState, params: AngularAdmittanceParams,
                            torque: float) -> Tuple[SecondOrderState, float]:
    """Advance A(s) one tick; returns the new state and omega in deg/s, saturated after the filter."""
    state, omega_rad = _second_order_step(state, params, torque)
    return state, clamp_omega(math.degrees(omega_rad))


@dataclass(frozen=True)
class AdmittanceState:
    linear: SecondOrderState = field(default_factory=SecondOrderState)
    angular: SecondOrderState = field(default_factory=SecondOrderState)

    @classmethod
    def at_rate(cls, hz: float = Config.SAMPLE_RATE_HZ) -> "AdmittanceState":
        return cls(SecondOrderState(dt=1.0 / hz), SecondOrderState(dt=1.0 / hz))


def conventional_tick(state: AdmittanceState, wrench: HandleWrench,
                      params_lin: LinearAdmittanceParams,
                      params_ang: AngularAdmittanceParams) -> Tuple[AdmittanceState, VelocityCommand]:
    lin, v = linear_admittance_step(state.linear, params_lin, wrench.f_x)
    ang, omega = angular_admittance_step(state.angular, params_ang, wrench.tau_z)
    return AdmittanceState(lin, ang), VelocityCommand(v, omega)


class ConventionalController:
    """Single-owner stepper for the conventional controller."""
    kind = "conventional"

    def __init__(self, params_lin: LinearAdmittanceParams = LinearAdmittanceParams(),
                 params_ang: AngularAdmittanceParams = AngularAdmittanceParams(),
                 hz: float = Config.SAMPLE_RATE_HZ):
        self.params_lin = params_lin
        self.params_ang = params_ang
        self.state = AdmittanceState.at_rate(hz)

    @property
    def response_lag_s(self) -> float:
        """Mean delay of the angular filter's impulse response, damping / elasticity."""
        return self.params_ang.b_a / self.params_ang.k_a

    def tick(self, wrench: HandleWrench, shoulder=None) -> VelocityCommand:
        self.state, cmd = conventional_tick(self.state, wrench, self.params_lin, self.params_ang)
        return cmd

