import math
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Generic, List, Sequence, TypeVar

import numpy as np
from typing_extensions import Self

from config import Config
from errors import InvalidSeriesError

V = TypeVar("V")

# Tick/event comparisons tolerate float drift of k/hz versus logged timestamps
_TIME_EPS = 1e-9


@dataclass(frozen=True)
class Timestamped(Generic[V]):
    """A value stamped with seconds from trial start."""
    t: float
    value: V

    def __post_init__(self):
        if not math.isfinite(self.t) or self.t < 0:
            raise InvalidSeriesError(f"invalid timestamp {self.t}")


@dataclass(frozen=True)
class SampleRate:
    hz: float = Config.SAMPLE_RATE_HZ

    def __post_init__(self):
        if not self.hz > 0:
            raise InvalidSeriesError(f"invalid sample rate {self.hz}")

    @property
    def dt(self) -> float:
        return 1.0 / self.hz

    def ticks(self, duration: float) -> int:
        """Number of ticks covering a duration, counting the tick at t=0."""
        return math.ceil(round(duration * self.hz, 9))


@dataclass(frozen=True)
class Series:
    """Uniformly sampled scalar series."""
    rate: SampleRate
    samples: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        values = np.asarray(self.samples, dtype=float)
        if values.ndim != 1:
            raise InvalidSeriesError("series must be one-dimensional")
        if not np.all(np.isfinite(values)):
            raise InvalidSeriesError("series contains non-finite values")
        object.__setattr__(self, "samples", values)

    @classmethod
    def of(cls, values: Sequence[float], hz: float = Config.SAMPLE_RATE_HZ) -> Self:
        return cls(SampleRate(hz), np.asarray(values, dtype=float))

    def __len__(self) -> int:
        return len(self.samples)

    def times(self) -> np.ndarray:
        return np.arange(len(self.samples)) * self.rate.dt

    def tolist(self) -> List[float]:
        return self.samples.tolist()


def moving_average(s: Series, window: int) -> Series:
    """Causal moving average with ramp-in: sample i averages the last min(i+1, window) inputs."""
    if window is None or int(window) != window or window < 1:
        raise InvalidSeriesError("invalid window")
    if len(s) == 0:
        raise InvalidSeriesError("empty series")
    window = int(window)
    x = s.samples
    csum = np.concatenate(([0.0], np.cumsum(x)))
    idx = np.arange(1, len(x) + 1)
    lo = np.maximum(idx - window, 0)
    counts = idx - lo
    out = (csum[idx] - csum[lo]) / counts
    # Cumulative sums drift slightly on long series; keep the output inside the input range
    out = np.clip(out, x.min(), x.max())
    return Series(s.rate, out)


def resample_zoh(events: Sequence[Timestamped], rate: SampleRate, duration: float) -> Series:
    """Zero-order hold of asynchronous events onto the tick grid, back-filling before the first event."""
    if not events:
        raise InvalidSeriesError("empty event list")
    if not duration > 0:
        raise InvalidSeriesError(f"invalid duration {duration}")
    event_t = np.array([e.t for e in events], dtype=float)
    if np.any(np.diff(event_t) < 0):
        raise InvalidSeriesError("events are not sorted by time")
    event_v = np.array([e.value for e in events], dtype=float)

    tick_t = np.arange(rate.ticks(duration)) / rate.hz
    held = np.searchsorted(event_t, tick_t + _TIME_EPS, side="right") - 1
    held = np.clip(held, 0, None)
    return Series(rate, event_v[held])


class OnlineMovingAverage:
    """Streaming form of moving_average for the control loop."""

    def __init__(self, window: int = Config.SMOOTHING_WINDOW):
        if int(window) != window or window < 1:
            raise InvalidSeriesError("invalid window")
        self.window = int(window)
        self._buffer: Deque[float] = deque(maxlen=self.window)
        self._total = 0.0

    def update(self, value: float) -> float:
        if len(self._buffer) == self.window:
            self._total -= self._buffer[0]
        self._buffer.append(value)
        self._total += value
        return self._total / len(self._buffer)

    @property
    def value(self) -> float:
        return self._total / len(self._buffer) if self._buffer else 0.0

    def __len__(self) -> int:
        return len(self._buffer)
