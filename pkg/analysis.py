"""Trial statistics: segment aggregation, correlation, paired t-tests and controller comparison."""
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import betainc

from config import Config
from errors import (DegenerateTestError, InvalidInputError, UndefinedCorrelationError,
                    UnmatchedRunsError)
from signals import SampleRate, Series, moving_average
from trial_log import TrialLog

ArrayLike = Union[Series, Sequence[float], np.ndarray]
DIRECTION_ORDER = ("left", "straight", "right")


def _values(x: ArrayLike) -> np.ndarray:
    return x.samples if isinstance(x, Series) else np.asarray(x, dtype=float)


@dataclass(frozen=True)
class SegmentStats:
    direction: str
    mean: float
    std: float
    n: int
    segment: int = 0
    quantity: str = "abduction_deg"


def pearson(x: ArrayLike, y: ArrayLike) -> float:
    """Product-moment correlation coefficient."""
    a, b = _values(x), _values(y)
    if len(a) != len(b) or len(a) < 3:
        raise InvalidInputError(f"pearson needs equal lengths of at least 3, got {len(a)} and {len(b)}")
    da, db = a - a.mean(), b - b.mean()
    sxx, syy = float(np.dot(da, da)), float(np.dot(db, db))
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("undefined correlation: zero variance")
    r = float(np.dot(da, db)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def student_t_two_sided(t: float, df: float) -> float:
    """Two-sided tail probability of Student's t via the regularized incomplete beta."""
    if math.isinf(t):
        return 0.0
    return float(betainc(0.5 * df, 0.5, df / (df + t * t)))


def paired_t(a: Sequence[float], b: Sequence[float]) -> Tuple[float, float]:
    """Paired t statistic on d = a - b with n - 1 degrees of freedom, and its two-sided p."""
    x, y = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if len(x) != len(y) or len(x) < 2:
        raise InvalidInputError(f"paired_t needs equal lengths of at least 2, got {len(x)} and {len(y)}")
    d = x - y
    n = len(d)
    sd = float(np.std(d, ddof=1))
    if sd == 0.0:
        raise DegenerateTestError("degenerate test: differences have zero variance")
    t = float(d.mean()) / (sd / math.sqrt(n))
    return t, student_t_two_sided(t, n - 1)


def segment_by_heading_rate(log: TrialLog,
                            threshold: float = Config.TURN_RATE_THRESHOLD_DPS,
                            min_duration: float = Config.TURN_MIN_DURATION_S) -> List[str]:
    """Segment labels for logs without ground truth: sustained |heading rate| above threshold is a turn."""
    heading = np.unwrap(np.radians(log.column("heading_deg")))
    rate = np.degrees(np.gradient(heading, 1.0 / log.hz)) if len(heading) > 1 else np.zeros(len(heading))
    kind = np.where(rate > threshold, 1, np.where(rate < -threshold, -1, 0))

    # Turn runs shorter than min_duration fall back to straight walking
    sustain = int(round(min_duration * log.hz))
    start = 0
    for i in range(1, len(kind) + 1):
        if i == len(kind) or kind[i] != kind[start]:
            if kind[start] != 0 and i - start < sustain:
                kind[start:i] = 0
            start = i

    labels, index = [], 0
    names = {1: "left", 0: "straight", -1: "right"}
    for i, k in enumerate(kind):
        if i > 0 and k != kind[i - 1]:
            index += 1
        labels.append(f"{index}:{names[int(k)]}")
    return labels


def _has_ground_truth(log: TrialLog) -> bool:
    return all(":" in row.segment for row in log.rows)


def _segment_labels(log: TrialLog) -> List[str]:
    return [row.segment for row in log.rows] if _has_ground_truth(log) else segment_by_heading_rate(log)


def smoothed(log: TrialLog, column: str, window: int = Config.SMOOTHING_WINDOW) -> np.ndarray:
    return moving_average(log.series(column), window).samples


def aggregate_segments(log: TrialLog, window: int = Config.SMOOTHING_WINDOW,
                       quantities: Sequence[str] = ("abduction_deg", "tau_wrist_Nm")) -> List[SegmentStats]:
    """Mean and sample std per segment over non-excluded ticks.

    Each segment is smoothed on its own so no value leaks across a segment boundary.
    """
    if not log.complete:
        raise InvalidInputError(f"trial {log.key} is incomplete")
    if not log.rows:
        return []
    labels = _segment_labels(log)
    keep = ~np.array([row.excluded for row in log.rows])
    bounds = [0] + [i for i in range(1, len(labels)) if labels[i] != labels[i - 1]] + [len(labels)]
    stats = []
    for quantity in quantities:
        column = log.column(quantity)
        groups: Dict[str, List[float]] = defaultdict(list)
        for lo, hi in zip(bounds, bounds[1:]):
            values = moving_average(Series(SampleRate(log.hz), column[lo:hi]), window).samples
            groups[labels[lo]].extend(values[keep[lo:hi]])
        for label in sorted(groups, key=lambda s: int(s.split(":", 1)[0])):
            values = groups[label]
            index, direction = label.split(":", 1)
            if len(values) < 2:
                logging.warning(f"Skipping segment {label} of {log.key}: only {len(values)} tick(s)")
                continue
            stats.append(SegmentStats(direction, float(np.mean(values)), float(np.std(values, ddof=1)),
                                      len(values), int(index), quantity))
    return stats


def direction_means(log: TrialLog, quantity: str, window: int = Config.SMOOTHING_WINDOW) -> Dict[str, float]:
    """Per-direction tick-weighted mean of a smoothed quantity over the trial."""
    sums: Dict[str, List[float]] = defaultdict(lambda: [0.0, 0])
    for s in aggregate_segments(log, window, (quantity,)):
        sums[s.direction][0] += s.mean * s.n
        sums[s.direction][1] += s.n
    return {d: total / n for d, (total, n) in sums.items()}


def trial_correlation(log: TrialLog, window: int = Config.SMOOTHING_WINDOW) -> float:
    """Pearson r between smoothed sensed torque and smoothed abduction angle, non-excluded ticks."""
    keep = ~np.array([row.excluded for row in log.rows])
    torque = smoothed(log, "tauz_Nm", window)[keep]
    angle = smoothed(log, "abduction_deg", window)[keep]
    return pearson(torque, angle)


def heading_rate_zero_crossings(log: TrialLog, band: float = Config.ZERO_CROSSING_BAND_DPS) -> int:
    """Sign changes of the heading rate that cross the whole +/-band deadzone."""
    crossings, last = 0, 0
    for omega in log.column("omega_dps", include_excluded=False):
        sign = 1 if omega > band else (-1 if omega < -band else 0)
        if sign and last and sign != last:
            crossings += 1
        if sign:
            last = sign
    return crossings


@dataclass(frozen=True)
class DirectionComparison:
    direction: str
    cc_mean: float
    cc_std: float
    pc_mean: float
    pc_std: float
    reduction_pct: float
    n_pairs: int
    t: Optional[float] = None
    p: Optional[float] = None


@dataclass
class ComparisonReport:
    profile: str
    directions: List[DirectionComparison] = field(default_factory=list)
    correlations: Dict[str, float] = field(default_factory=dict)
    smoothness: Dict[str, Tuple[int, int]] = field(default_factory=dict)

    def direction(self, name: str) -> DirectionComparison:
        for row in self.directions:
            if row.direction == name:
                return row
        raise KeyError(name)


def run_name(log: TrialLog) -> str:
    return f"{log.scenario}/{log.controller}/{log.seed}"


def pair_runs(runs: Iterable[TrialLog]) -> List[Tuple[TrialLog, TrialLog]]:
    """Match conventional and fuzzy runs on (scenario, seed); unmatched runs are an error."""
    by_key: Dict[Tuple[str, int], Dict[str, TrialLog]] = defaultdict(dict)
    for log in runs:
        by_key[(log.scenario, log.seed)][log.controller] = log
    missing, pairs = [], []
    for (scenario, seed), group in sorted(by_key.items()):
        absent = [c for c in ("conventional", "fuzzy") if c not in group]
        missing.extend(f"{scenario}/{c}/{seed}" for c in absent)
        if not absent:
            pairs.append((group["conventional"], group["fuzzy"]))
    if missing:
        raise UnmatchedRunsError(missing)
    return pairs


def _trial_wrist_means(log: TrialLog) -> Dict[str, float]:
    sums: Dict[str, List[float]] = defaultdict(lambda: [0.0, 0])
    for row in log.rows:
        if not row.excluded:
            sums[row.direction][0] += row.tau_wrist_Nm
            sums[row.direction][1] += 1
    return {d: total / n for d, (total, n) in sums.items() if n}


def reduction_pct(cc_mean: float, pc_mean: float) -> float:
    """Relative drop of |mean wrist torque| from the conventional to the proposed controller."""
    if cc_mean == 0.0:
        return float("nan")
    return 100.0 * (abs(cc_mean) - abs(pc_mean)) / abs(cc_mean)


def _mean_std(values: Sequence[float]) -> Tuple[float, float]:
    values = np.asarray(values, dtype=float)
    std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
    return float(values.mean()), std


def compare_controllers(runs: Iterable[TrialLog], profile: str = "profile") -> ComparisonReport:
    """Wrist-torque comparison per direction, per-trial correlations and smoothness counts."""
    pairs = pair_runs(runs)
    report = ComparisonReport(profile)

    paired: Dict[str, List[Tuple[float, float]]] = defaultdict(list)
    for cc, pc in pairs:
        cc_means, pc_means = _trial_wrist_means(cc), _trial_wrist_means(pc)
        for direction in set(cc_means) & set(pc_means):
            paired[direction].append((cc_means[direction], pc_means[direction]))
        for log in (cc, pc):
            try:
                report.correlations[run_name(log)] = trial_correlation(log)
            except UndefinedCorrelationError as e:
                logging.warning(f"No correlation for {run_name(log)}: {e}")
        report.smoothness[f"{cc.scenario}/{cc.seed}"] = (heading_rate_zero_crossings(cc),
                                                         heading_rate_zero_crossings(pc))

    for direction in DIRECTION_ORDER:
        if direction not in paired:
            continue
        cc_vals = [c for c, _ in paired[direction]]
        pc_vals = [p for _, p in paired[direction]]
        cc_mean, cc_std = _mean_std(cc_vals)
        pc_mean, pc_std = _mean_std(pc_vals)
        t = p = None
        if len(cc_vals) >= 2:
            try:
                t, p = paired_t(cc_vals, pc_vals)
            except DegenerateTestError as e:
                logging.warning(f"Paired t-test skipped for {direction}: {e}")
        report.directions.append(DirectionComparison(
            direction, cc_mean, cc_std, pc_mean, pc_std,
            reduction_pct(cc_mean, pc_mean), len(cc_vals), t, p))
    return report


@dataclass(frozen=True)
class AngleTableRow:
    """Shoulder angle per direction (mean +/- std of per-trial means) with paired t-tests."""
    profile: str
    means: Dict[str, Tuple[float, float, int]]
    left_vs_straight: Optional[Tuple[float, float]]
    straight_vs_right: Optional[Tuple[float, float]]


def angle_table(runs: Iterable[TrialLog], profile: str = "profile") -> AngleTableRow:
    per_direction: Dict[str, List[float]] = defaultdict(list)
    pairs: Dict[str, List[Tuple[float, float]]] = defaultdict(list)
    for log in runs:
        means = direction_means(log, "abduction_deg")
        for direction, value in means.items():
            per_direction[direction].append(value)
        for turn in ("left", "right"):
            if turn in means and "straight" in means:
                pairs[turn].append((means["straight"], means[turn]))

    def test(turn: str, straight_first: bool) -> Optional[Tuple[float, float]]:
        data = pairs.get(turn, [])
        if len(data) < 2:
            return None
        s, x = zip(*data)
        try:
            return paired_t(s, x) if straight_first else paired_t(x, s)
        except DegenerateTestError as e:
            logging.warning(f"Angle t-test skipped for {turn}: {e}")
            return None

    summary = {}
    for direction, values in per_direction.items():
        mean, std = _mean_std(values)
        summary[direction] = (mean, std, len(values))
    return AngleTableRow(profile, summary, test("left", False), test("right", True))


def pearson_by_task(runs: Iterable[TrialLog]) -> Dict[str, float]:
    """Mean per-trial r for straight->left (SL) and straight->right (SR) trials."""
    tasks: Dict[str, List[float]] = defaultdict(list)
    for log in runs:
        directions = set(log.directions())
        task = "SL" if "left" in directions else ("SR" if "right" in directions else None)
        if task is None:
            continue
        try:
            tasks[task].append(trial_correlation(log))
        except UndefinedCorrelationError as e:
            logging.warning(f"No correlation for {run_name(log)}: {e}")
    return {task: float(np.mean(values)) for task, values in sorted(tasks.items())}


def one_handed_penalty(one_handed: Iterable[TrialLog], two_handed: Iterable[TrialLog],
                       direction: str = "right") -> float:
    """Percent increase of |mean wrist torque| of one-handed over two-handed operation."""
    def mean_for(logs):
        values = [m[direction] for m in map(_trial_wrist_means, logs) if direction in m]
        if not values:
            raise InvalidInputError(f"no {direction} ticks to compare")
        return abs(float(np.mean(values)))

    one, two = mean_for(one_handed), mean_for(two_handed)
    if two == 0.0:
        return float("inf")
    return 100.0 * (one - two) / two
