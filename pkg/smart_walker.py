"""Command-line entry point: calibrate, simulate, infer, analyze."""
import argparse
import asyncio
import logging
import sys
from contextlib import ExitStack
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from analysis import angle_table, compare_controllers, direction_means, one_handed_penalty, pair_runs, pearson_by_task
from config import Config
from errors import (CalibrationError, InvalidInputError, ProfileFormatError, ScenarioFormatError,
                    StreamOrderError, UnmatchedRunsError)
from fuzzy_controller import DEFAULT_TORQUE_THRESHOLDS, DIRECTIONS, calibrate_profile
from keypoint_stream import format_command, replay
from profile_file import ProfileFile, load_profile, save_profile
from report_writer import ReportWriter
from scenario_file import load_scenario
from trial_log import TrialLog
from trial_runner import TrialRunner, load_runs
from user_model import UserModelParams
from walker_sim import CONTROLLERS

DEFAULT_PROFILE = Path(__file__).parent / "profiles" / "user5.profile"
DEFAULT_SCENARIO = "course_4m_90.scenario"
VALIDATION_ERRORS = (CalibrationError, InvalidInputError, ProfileFormatError, ScenarioFormatError,
                     StreamOrderError)


def read_means_file(path: Path) -> Dict[str, Dict[str, float]]:
    """`left = 27.97` style lines; `torque.left = 6` lines override the torque thresholds."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InvalidInputError(f"cannot read means file {path}: {e}") from e
    angles: Dict[str, float] = {}
    torques: Dict[str, float] = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        target, name = (torques, key[len("torque."):]) if key.startswith("torque.") else (angles, key)
        if not sep or name not in DIRECTIONS:
            raise CalibrationError(f"{path}:{n}: expected '<left|straight|right> = <deg>', got {line!r}")
        try:
            target[name] = float(value)
        except ValueError:
            raise CalibrationError(f"{path}:{n}: {key} is not a number: {value!r}")
    return {"angles": angles, "torques": torques}


def means_from_trials(paths: Sequence[Path]) -> Dict[str, float]:
    per_direction: Dict[str, List[float]] = {d: [] for d in DIRECTIONS}
    for path in paths:
        for direction, value in direction_means(TrialLog.read(Path(path)), "abduction_deg").items():
            per_direction[direction].append(value)
    return {d: sum(v) / len(v) for d, v in per_direction.items() if v}


def cmd_calibrate(args) -> int:
    if args.means:
        data = read_means_file(args.means)
        angles, torques = data["angles"], data["torques"]
    else:
        angles, torques = means_from_trials(args.trials), {}
    if args.torque:
        torques = dict(zip(("right", "straight", "left"), args.torque))
    thresholds = {**DEFAULT_TORQUE_THRESHOLDS, **torques}

    fuzzy = calibrate_profile(angles, thresholds, mirror=args.mirror)
    user = UserModelParams(angle_means={d: angles[d] for d in DIRECTIONS})
    save_profile(ProfileFile(fuzzy, user=user), args.out)

    for var in (fuzzy.angle_var, fuzzy.torque_var):
        for label, mf in var.terms:
            print(f"{var.name:<10} {label:<10} center={mf.center:8.3f} sigma={mf.sigma:7.3f}")
    logging.info(f"Wrote profile {args.out}")
    return 0


async def cmd_simulate(args) -> int:
    scenario = load_scenario(args.scenario)
    profile = load_profile(args.profile)
    if args.trials < 1:
        raise InvalidInputError(f"--trials must be at least 1, got {args.trials}")
    user = profile.user.two_handed() if args.two_handed else profile.user
    controllers = CONTROLLERS if args.controller == "both" else (args.controller,)

    runner = TrialRunner(Config, args.out)
    results = []
    for controller in controllers:
        results += await runner.run_trials(scenario, controller, profile, args.seed, args.trials, user)
    failed = [r.name for r in results if not r.success]
    if failed:
        logging.error(f"{len(failed)} trial(s) failed: {', '.join(failed)}")
        return 2
    return 0


def cmd_infer(args) -> int:
    profile = load_profile(args.profile)
    with ExitStack() as stack:
        try:
            keypoints = sys.stdin if str(args.keypoints) == "-" else stack.enter_context(open(args.keypoints))
            torque = stack.enter_context(open(args.torque))
        except OSError as e:
            raise InvalidInputError(f"cannot open stream: {e}") from e
        for command in replay(profile, keypoints, torque):
            print(format_command(command))
    return 0


async def cmd_analyze(args) -> int:
    runs = await load_runs(args.runs)
    if not runs:
        raise InvalidInputError(f"no trial logs in {args.runs}")
    name = args.profile_name or Path(args.runs).name
    report = compare_controllers(runs, name)
    conventional = [log for log in runs if log.controller == "conventional"]
    angle_rows = [angle_table(conventional, name)] if conventional else []
    pearson_rows = {name: pearson_by_task(conventional)} if conventional else None

    ReportWriter(args.report).write(report, pair_runs(runs), angle_rows, pearson_rows)
    for row in report.directions:
        logging.info(f"{row.direction}: wrist torque {row.cc_mean:.2f} -> {row.pc_mean:.2f} N.m "
                     f"({row.reduction_pct:.1f}% reduction)")

    if args.baseline:
        baseline = [log for log in await load_runs(args.baseline) if log.controller == "conventional"]
        penalty = one_handed_penalty(conventional, baseline)
        logging.info(f"One-handed right-turn wrist torque is {penalty:.1f}% above the two-handed baseline")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smart_walker", description=__doc__)
    parser.add_argument("--verbose", action="store_true", help="log at DEBUG level")
    parser.add_argument("--log-file", type=Path, default=Config.LOG_FILE, help="log file location")
    commands = parser.add_subparsers(dest="command", required=True)

    calibrate = commands.add_parser("calibrate", help="build a fuzzy profile from per-direction angle means")
    source = calibrate.add_mutually_exclusive_group(required=True)
    source.add_argument("--means", type=Path, help="file with left/straight/right angle means (deg)")
    source.add_argument("--trials", type=Path, nargs="+", help="trial CSVs to average per direction")
    calibrate.add_argument("--torque", type=float, nargs=3, metavar=("RIGHT", "STRAIGHT", "LEFT"),
                           help="torque thresholds in N.m (default -4 1 6)")
    calibrate.add_argument("--mirror", action="store_true", help="left-handed user")
    calibrate.add_argument("--out", type=Path, required=True, help="profile file to write")

    simulate = commands.add_parser("simulate", help="run closed-loop trials with the synthetic user")
    simulate.add_argument("--scenario", type=Path, default=Path(DEFAULT_SCENARIO), help="scenario file")
    simulate.add_argument("--controller", choices=CONTROLLERS + ("both",), default="both")
    simulate.add_argument("--profile", type=Path, default=DEFAULT_PROFILE, help="profile file")
    simulate.add_argument("--seed", type=int, default=0, help="seed of the first trial")
    simulate.add_argument("--trials", type=int, default=5, help="trials per controller")
    simulate.add_argument("--out", type=Path, default=Config.OUTPUT_DIR, help="output directory")
    simulate.add_argument("--two-handed", action="store_true", help="center the push on the sensor")

    infer = commands.add_parser("infer", help="replay keypoint and torque streams, print t,v,omega")
    infer.add_argument("--profile", type=Path, required=True, help="profile file")
    infer.add_argument("--keypoints", type=Path, required=True, help="JSON-lines keypoints, '-' for stdin")
    infer.add_argument("--torque", type=Path, required=True, help="torque CSV (t,fx_N,tauz_Nm)")

    analyze = commands.add_parser("analyze", help="compare controllers over a directory of trial logs")
    analyze.add_argument("--runs", type=Path, required=True, help="directory of trial CSVs")
    analyze.add_argument("--report", type=Path, required=True, help="report CSV path")
    analyze.add_argument("--profile-name", help="label for the report (default: runs directory name)")
    analyze.add_argument("--baseline", type=Path, help="two-handed runs for the one-handed penalty")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(asctime)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(args.log_file),
            logging.StreamHandler()
        ]
    )
    try:
        if args.command == "calibrate":
            return cmd_calibrate(args)
        if args.command == "simulate":
            return asyncio.run(cmd_simulate(args))
        if args.command == "infer":
            return cmd_infer(args)
        return asyncio.run(cmd_analyze(args))
    except UnmatchedRunsError as e:
        logging.error(str(e))
        return 3
    except VALIDATION_ERRORS as e:
        logging.error(str(e))
        return 2


if __name__ == "__main__":
    sys.exit(main())
