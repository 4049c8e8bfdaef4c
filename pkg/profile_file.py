"""Plain-text controller profile.

    smart-walker-profile v1
    camera.f_x = 700
    fuzzy.angle.Low = 20.34 3.415        # center sigma
    fuzzy.rule.Low.Negative = SharpRight
    admittance.k_a = 6
    user.angle_means.straight = 27.17

One `key = value` per line, `#` starts a comment. Unknown keys are rejected and every
section is re-validated when the file is loaded.
"""
import os
import tempfile
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Tuple

from admittance import AngularAdmittanceParams, LinearAdmittanceParams
from config import Config
from errors import ProfileFormatError, WalkerError
from fuzzy_controller import (ANGLE_TERMS, OUTPUT_TERMS, TORQUE_TERMS, FuzzyProfile, GaussianMF,
                              LinguisticVariable, RuleBase)
from pose_geometry import CameraIntrinsics
from user_model import UserModelParams

HEADER = f"smart-walker-profile v{Config.PROFILE_VERSION}"
DEFAULT_CAMERA = CameraIntrinsics(f_x=700.0, f_y=700.0, c_x=640.0, c_y=360.0)


@dataclass(frozen=True)
class ProfileFile:
    fuzzy: FuzzyProfile
    camera: CameraIntrinsics = DEFAULT_CAMERA
    linear: LinearAdmittanceParams = field(default_factory=LinearAdmittanceParams)
    angular: AngularAdmittanceParams = field(default_factory=AngularAdmittanceParams)
    user: UserModelParams = field(default_factory=UserModelParams)


def _fmt(value: float) -> str:
    # Shortest text that parses back to the same float
    return repr(float(value))


def dump_profile(profile: ProfileFile) -> str:
    lines: List[str] = [HEADER]
    for f in fields(CameraIntrinsics):
        lines.append(f"camera.{f.name} = {_fmt(getattr(profile.camera, f.name))}")
    lines.append(f"fuzzy.mirror = {'true' if profile.fuzzy.mirror else 'false'}")
    for prefix, var in (("angle", profile.fuzzy.angle_var), ("torque", profile.fuzzy.torque_var),
                        ("output", profile.fuzzy.output_var)):
        for label, mf in var.terms:
            lines.append(f"fuzzy.{prefix}.{label} = {_fmt(mf.center)} {_fmt(mf.sigma)}")
    for (angle_term, torque_term), out_term in sorted(profile.fuzzy.rules.rules):
        lines.append(f"fuzzy.rule.{angle_term}.{torque_term} = {out_term}")
    for params in (profile.linear, profile.angular):
        for f in fields(params):
            lines.append(f"admittance.{f.name} = {_fmt(getattr(params, f.name))}")
    for f in fields(UserModelParams):
        if f.name == "angle_means":
            for direction, value in sorted(profile.user.angle_means.items()):
                lines.append(f"user.angle_means.{direction} = {_fmt(value)}")
        else:
            lines.append(f"user.{f.name} = {_fmt(getattr(profile.user, f.name))}")
    return "\n".join(lines) + "\n"


def _read_pairs(text: str) -> Dict[str, Tuple[int, str]]:
    lines = [(n, raw.split("#", 1)[0].strip()) for n, raw in enumerate(text.splitlines(), 1)]
    lines = [(n, line) for n, line in lines if line]
    if not lines or lines[0][1] != HEADER:
        found = lines[0][1] if lines else "nothing"
        raise ProfileFormatError(f"expected header '{HEADER}', found {found!r}")
    pairs: Dict[str, Tuple[int, str]] = {}
    for n, line in lines[1:]:
        if "=" not in line:
            raise ProfileFormatError(f"line {n}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in pairs:
            raise ProfileFormatError(f"line {n}: duplicate key {key}")
        pairs[key] = (n, value)
    return pairs


def _number(pairs, key: str) -> float:
    n, value = pairs.pop(key)
    try:
        return float(value)
    except ValueError:
        raise ProfileFormatError(f"line {n}: {key} is not a number: {value!r}")


def _variable(pairs, prefix: str, name: str, labels) -> LinguisticVariable:
    terms = []
    for label in labels:
        key = f"fuzzy.{prefix}.{label}"
        if key not in pairs:
            raise ProfileFormatError(f"missing {key}")
        n, value = pairs.pop(key)
        try:
            center, sigma = (float(v) for v in value.split())
        except ValueError:
            raise ProfileFormatError(f"line {n}: {key} needs '<center> <sigma>', got {value!r}")
        terms.append((label, GaussianMF(center, sigma)))
    return LinguisticVariable(name, tuple(terms))


def _section(pairs, prefix: str, cls):
    kwargs = {}
    for f in fields(cls):
        key = f"{prefix}.{f.name}"
        if key in pairs:
            kwargs[f.name] = _number(pairs, key)
    return cls(**kwargs)


def parse_profile(text: str) -> ProfileFile:
    pairs = _read_pairs(text)
    try:
        camera = _section(pairs, "camera", CameraIntrinsics) if "camera.f_x" in pairs else DEFAULT_CAMERA
        mirror = pairs.pop("fuzzy.mirror", (0, "false"))[1].lower() in ("true", "1", "yes")
        angle_var = _variable(pairs, "angle", "abduction", ANGLE_TERMS)
        torque_var = _variable(pairs, "torque", "torque", TORQUE_TERMS)
        output_var = _variable(pairs, "output", "omega", OUTPUT_TERMS)
        rules = {}
        for angle_term in ANGLE_TERMS:
            for torque_term in TORQUE_TERMS:
                key = f"fuzzy.rule.{angle_term}.{torque_term}"
                if key not in pairs:
                    raise ProfileFormatError(f"missing {key}")
                rules[(angle_term, torque_term)] = pairs.pop(key)[1]
        fuzzy = FuzzyProfile(angle_var, torque_var, output_var, RuleBase.from_mapping(rules), mirror)
        linear = _section(pairs, "admittance", LinearAdmittanceParams)
        angular = _section(pairs, "admittance", AngularAdmittanceParams)

        means = {}
        for direction in ("right", "straight", "left"):
            key = f"user.angle_means.{direction}"
            if key in pairs:
                means[direction] = _number(pairs, key)
        user_kwargs = {}
        for f in fields(UserModelParams):
            key = f"user.{f.name}"
            if f.name != "angle_means" and key in pairs:
                user_kwargs[f.name] = _number(pairs, key)
        if means:
            user_kwargs["angle_means"] = means
        user = UserModelParams(**user_kwargs)
    except ProfileFormatError:
        raise
    except TypeError as e:
        raise ProfileFormatError(f"incomplete section: {e}") from e
    except WalkerError as e:
        raise ProfileFormatError(f"invalid profile: {e}") from e

    if pairs:
        unknown = ", ".join(f"{key} (line {n})" for key, (n, _) in sorted(pairs.items()))
        raise ProfileFormatError(f"unknown keys: {unknown}")
    return ProfileFile(fuzzy, camera, linear, angular, user)


def load_profile(path: Path) -> ProfileFile:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ProfileFormatError(f"cannot read profile {path}: {e}") from e
    return parse_profile(text)


def save_profile(profile: ProfileFile, path: Path) -> Path:
    """Write atomically so a failed write never leaves a partial profile behind."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(dump_profile(profile))
        os.replace(tmp, path)
    except Exception:
        os.unlink(tmp)
        raise
    return path
