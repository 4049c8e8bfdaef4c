"""Vision-informed fuzzy steering.

Two inputs (shoulder abduction angle, handle torque) with Gaussian terms, a 3x3 Mamdani rule
table and centroid defuzzification over [-90, 90] deg/s. Linear velocity stays with the
linear admittance filter.
"""
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Dict, Mapping, Optional, Tuple

import numpy as np
import skfuzzy as fuzz

from admittance import LinearAdmittanceParams, SecondOrderState, linear_admittance_step
from config import Config
from errors import CalibrationError, InvalidInputError
from interaction import HandleWrench, VelocityCommand, clamp_omega
from pose_geometry import ShoulderState
from signals import OnlineMovingAverage

ANGLE_TERMS = ("Low", "Middle", "High")
TORQUE_TERMS = ("Negative", "Neutral", "Positive")
OUTPUT_TERMS = ("SharpRight", "GentleRight", "Straight", "GentleLeft", "SharpLeft")
OUTPUT_CENTERS = (-90.0, -45.0, 0.0, 45.0, 90.0)

# Torque thresholds used when a calibration supplies only angles (N.m)
DEFAULT_TORQUE_THRESHOLDS = {"right": -4.0, "straight": 1.0, "left": 6.0}

DIRECTIONS = ("right", "straight", "left")


@dataclass(frozen=True)
class GaussianMF:
    center: float
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.center) and self.sigma > 0):
            raise CalibrationError(f"invalid membership function {self}")

    def __call__(self, x):
        return fuzz.gaussmf(x, self.center, self.sigma)


@dataclass(frozen=True)
class LinguisticVariable:
    name: str
    terms: Tuple[Tuple[str, GaussianMF], ...]

    def __post_init__(self):
        labels = [label for label, _ in self.terms]
        if len(set(labels)) != len(labels):
            raise CalibrationError(f"{self.name}: duplicate term labels {labels}")
        centers = self.centers()
        if any(b <= a for a, b in zip(centers, centers[1:])):
            raise CalibrationError(f"{self.name}: term centers must be strictly increasing, got {centers}")

    def labels(self) -> Tuple[str, ...]:
        return tuple(label for label, _ in self.terms)

    def centers(self) -> Tuple[float, ...]:
        return tuple(mf.center for _, mf in self.terms)

    def term(self, label: str) -> GaussianMF:
        for name, mf in self.terms:
            if name == label:
                return mf
        raise KeyError(f"{self.name} has no term {label}")

    def memberships(self, x: float) -> Dict[str, float]:
        return {label: float(mf(x)) for label, mf in self.terms}


@dataclass(frozen=True)
class RuleBase:
    rules: Tuple[Tuple[Tuple[str, str], str], ...]

    def __post_init__(self):
        table = dict(self.rules)
        missing = [(a, t) for a in ANGLE_TERMS for t in TORQUE_TERMS if (a, t) not in table]
        if missing or len(table) != len(self.rules):
            raise CalibrationError(f"rule base must cover every (angle, torque) pair once; missing {missing}")
        unknown = set(table.values()) - set(OUTPUT_TERMS)
        if unknown:
            raise CalibrationError(f"unknown output terms {sorted(unknown)}")

    @classmethod
    def from_mapping(cls, table: Mapping[Tuple[str, str], str]) -> "RuleBase":
        return cls(tuple(sorted(table.items())))

    def as_dict(self) -> Dict[Tuple[str, str], str]:
        return dict(self.rules)

    def lookup(self, angle_term: str, torque_term: str) -> str:
        return self.as_dict()[(angle_term, torque_term)]


def default_rule_base() -> RuleBase:
    """Steering rules indexed by (shoulder angle term, torque term)."""
    return RuleBase.from_mapping({
        ("Low", "Negative"): "SharpRight",
        ("Low", "Neutral"): "Straight",
        ("Low", "Positive"): "Straight",
        ("Middle", "Negative"): "GentleRight",
        ("Middle", "Neutral"): "Straight",
        ("Middle", "Positive"): "Straight",
        ("High", "Negative"): "GentleRight",
        ("High", "Neutral"): "GentleLeft",
        ("High", "Positive"): "SharpLeft",
    })


def default_output_variable(sigma: float = Config.OUTPUT_SIGMA_DPS) -> LinguisticVariable:
    return LinguisticVariable("omega", tuple(
        (label, GaussianMF(center, sigma)) for label, center in zip(OUTPUT_TERMS, OUTPUT_CENTERS)))


@dataclass(frozen=True)
class FuzzyProfile:
    angle_var: LinguisticVariable
    torque_var: LinguisticVariable
    output_var: LinguisticVariable = field(default_factory=default_output_variable)
    rules: RuleBase = field(default_factory=default_rule_base)
    mirror: bool = False

    def __post_init__(self):
        if self.angle_var.labels() != ANGLE_TERMS:
            raise CalibrationError(f"angle terms must be {ANGLE_TERMS}")
        if self.torque_var.labels() != TORQUE_TERMS:
            raise CalibrationError(f"torque terms must be {TORQUE_TERMS}")
        if self.output_var.labels() != OUTPUT_TERMS:
            raise CalibrationError(f"output terms must be {OUTPUT_TERMS}")
        centers = self.output_var.centers()
        if min(centers) < -Config.OMEGA_LIMIT_DPS or max(centers) > Config.OMEGA_LIMIT_DPS:
            raise CalibrationError(f"output centers {centers} leave the steering range")

    @property
    def straight_angle(self) -> float:
        return self.angle_var.term("Middle").center

    def mirrored(self) -> "FuzzyProfile":
        return replace(self, mirror=not self.mirror)


def neighbor_sigmas(centers) -> Tuple[float, ...]:
    """Half the mean distance of each center to its adjacent centers."""
    sigmas = []
    for i, c in enumerate(centers):
        gaps = []
        if i > 0:
            gaps.append(abs(c - centers[i - 1]))
        if i < len(centers) - 1:
            gaps.append(abs(centers[i + 1] - c))
        sigmas.append(0.5 * sum(gaps) / len(gaps))
    return tuple(sigmas)


def _ordered_centers(values: Mapping[str, float], what: str) -> Tuple[float, float, float]:
    missing = [d for d in DIRECTIONS if d not in values]
    if missing:
        raise CalibrationError(f"{what}: missing directions {missing}")
    right, straight, left = (float(values[d]) for d in DIRECTIONS)
    if not all(math.isfinite(v) for v in (right, straight, left)):
        raise CalibrationError(f"{what}: non-finite values")
    if not right < straight:
        raise CalibrationError(f"{what}: right ({right}) must be below straight ({straight})")
    if not straight < left:
        raise CalibrationError(f"{what}: left ({left}) must be above straight ({straight})")
    return right, straight, left


def calibrate_profile(angle_means: Mapping[str, float],
                      torque_thresholds: Optional[Mapping[str, float]] = None,
                      mirror: bool = False) -> FuzzyProfile:
    """Personalized profile from per-direction shoulder means and torque thresholds."""
    angle_centers = _ordered_centers(angle_means, "shoulder angle means")
    torque_centers = _ordered_centers(torque_thresholds or DEFAULT_TORQUE_THRESHOLDS, "torque thresholds")

    def variable(name, labels, centers):
        return LinguisticVariable(name, tuple(
            (label, GaussianMF(c, s)) for label, c, s in zip(labels, centers, neighbor_sigmas(centers))))

    return FuzzyProfile(
        angle_var=variable("abduction", ANGLE_TERMS, angle_centers),
        torque_var=variable("torque", TORQUE_TERMS, torque_centers),
        mirror=mirror,
    )


@lru_cache(maxsize=32)
def _output_grid(output_var: LinguisticVariable, step: float):
    limit = Config.OMEGA_LIMIT_DPS
    grid = np.linspace(-limit, limit, int(round(2 * limit / step)) + 1)
    shapes = {label: mf(grid) for label, mf in output_var.terms}
    # Exact area and first moment of the piecewise-linear aggregate, as fuzz.defuzz(..., "centroid")
    # integrates it, folded into per-sample weights
    h = np.diff(grid)
    area = np.zeros_like(grid)
    area[:-1] += h / 2
    area[1:] += h / 2
    moment = np.zeros_like(grid)
    moment[:-1] += h / 6 * (2 * grid[:-1] + grid[1:])
    moment[1:] += h / 6 * (grid[:-1] + 2 * grid[1:])
    return grid, shapes, area, moment


def aggregate_output(profile: FuzzyProfile, angle: float, torque: float,
                     step: float = Config.DEFUZZ_STEP_DPS):
    """Grid and Mamdani-aggregated output membership (min activation, max aggregation)."""
    grid, shapes, _, _ = _output_grid(profile.output_var, step)
    mu_angle = profile.angle_var.memberships(angle)
    mu_torque = profile.torque_var.memberships(torque)
    aggregated = np.zeros_like(grid)
    for (angle_term, torque_term), out_term in profile.rules.rules:
        activation = np.fmin(np.fmin(mu_angle[angle_term], mu_torque[torque_term]), shapes[out_term])
        aggregated = np.fmax(aggregated, activation)
    return grid, aggregated


def infer_omega(profile: FuzzyProfile, angle: float, torque: float,
                step: float = Config.DEFUZZ_STEP_DPS) -> float:
    """Crisp heading-rate command in deg/s, positive = left."""
    if not (math.isfinite(angle) and math.isfinite(torque)):
        raise InvalidInputError()
    if profile.mirror:
        return -_centroid(profile, angle, -torque, step)
    return _centroid(profile, angle, torque, step)


def _centroid(profile: FuzzyProfile, angle: float, torque: float, step: float) -> float:
    _, aggregated = aggregate_output(profile, angle, torque, step)
    _, _, area, moment = _output_grid(profile.output_var, step)
    mass = float(np.dot(area, aggregated))
    if mass <= 0.0:
        # Every Gaussian underflowed; the limit of the centroid is the middle of the range
        return 0.0
    return clamp_omega(float(np.dot(moment, aggregated)) / mass)


def fuzzy_tick(profile: FuzzyProfile, admittance_state: SecondOrderState, wrench: HandleWrench,
               shoulder: ShoulderState,
               params_lin: LinearAdmittanceParams = LinearAdmittanceParams()) -> Tuple[SecondOrderState, VelocityCommand]:
    """One controller tick on already-smoothed inputs; dropouts arrive bridged from ShoulderStream."""
    state, v = linear_admittance_step(admittance_state, params_lin, wrench.f_x)
    omega = infer_omega(profile, shoulder.abduction_deg, wrench.tau_z)
    return state, VelocityCommand(v, omega)


class FuzzyController:
    """Single-owner stepper: window-60 smoothing of both inputs, then fuzzy_tick."""
    kind = "fuzzy"

    def __init__(self, profile: FuzzyProfile,
                 params_lin: LinearAdmittanceParams = LinearAdmittanceParams(),
                 hz: float = Config.SAMPLE_RATE_HZ, window: int = Config.SMOOTHING_WINDOW):
        self.profile = profile
        self.params_lin = params_lin
        self.state = SecondOrderState(dt=1.0 / hz)
        self.torque_filter = OnlineMovingAverage(window)
        self.angle_filter = OnlineMovingAverage(window)
        self.response_lag_s = (window - 1) / (2.0 * hz)

    @property
    def smoothed_angle(self) -> float:
        return self.angle_filter.value if len(self.angle_filter) else self.profile.straight_angle

    @property
    def smoothed_torque(self) -> float:
        return self.torque_filter.value

    def tick(self, wrench: HandleWrench, shoulder: ShoulderState) -> VelocityCommand:
        torque = self.torque_filter.update(wrench.tau_z)
        angle = self.angle_filter.update(shoulder.abduction_deg)
        self.state, cmd = fuzzy_tick(self.profile, self.state, HandleWrench(wrench.f_x, torque),
                                     ShoulderState(shoulder.t, angle, shoulder.valid), self.params_lin)
        return cmd
