"""
Gateway mobility traces: distance to the node as a function of time.

Distances between samples are interpolated linearly in time.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Tuple

import numpy as np

from sfPlanner.errors import InvalidTraceError

logger = logging.getLogger(__name__)


class TraceKind(str, Enum):
    FIXED = 'fixed'
    LINEAR_PASS = 'linear-pass'
    OUT_AND_BACK = 'out-and-back'


@dataclass(frozen=True, eq=False)
class MobilityTrace:
    """Ordered (time, distance) samples of one gateway run."""
    times: np.ndarray
    distances: np.ndarray
    kind: TraceKind = TraceKind.FIXED

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        distances = np.asarray(self.distances, dtype=float)
        if times.ndim != 1 or times.shape != distances.shape or times.size < 2:
            raise InvalidTraceError("Trace needs at least two (time, distance) samples of equal length")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(distances))):
            raise InvalidTraceError("Trace contains non-finite values")
        if np.any(np.diff(times) <= 0):
            raise InvalidTraceError("Trace times must be strictly increasing")
        if np.any(distances <= 0):
            raise InvalidTraceError("Trace distances must be positive")
        object.__setattr__(self, 'times', times)
        object.__setattr__(self, 'distances', distances)

    @classmethod
    def from_samples(cls, samples: Iterable[Tuple[float, float]],
                     kind: TraceKind = TraceKind.FIXED) -> 'MobilityTrace':
        pairs = list(samples)
        if not pairs:
            raise InvalidTraceError("Trace has no samples")
        times, distances = zip(*pairs)
        return cls(np.array(times), np.array(distances), TraceKind(kind))

    @property
    def samples(self) -> List[Tuple[float, float]]:
        return list(zip(self.times.tolist(), self.distances.tolist()))

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    @property
    def max_distance(self) -> float:
        return float(self.distances.max())

    def distance_at(self, t):
        """Linearly interpolated distance at time(s) t."""
        return np.interp(t, self.times, self.distances)

    def require_coverage(self, last_send: float) -> None:
        """
        Raises:
            InvalidTraceError: If the trace does not span [0, last_send]
        """
        if self.times[0] > 0 or self.times[-1] < last_send:
            raise InvalidTraceError(
                f"Trace covers {self.times[0]:.1f}-{self.times[-1]:.1f} s "
                f"but the schedule runs 0-{last_send:.1f} s"
            )


def fixed_trace(distance: float, horizon: float) -> MobilityTrace:
    return MobilityTrace(np.array([0.0, max(horizon, 1.0)]), np.array([distance, distance]), TraceKind.FIXED)


def linear_pass(start: float, end: float, speed: float, horizon: float) -> MobilityTrace:
    """Move from start towards end at constant speed, then hold at end."""
    if speed <= 0:
        raise InvalidTraceError(f"Linear pass needs a positive speed, got {speed}")
    horizon = max(horizon, 1.0)
    travel = abs(end - start) / speed
    if travel == 0:
        return fixed_trace(start, horizon)
    if travel >= horizon:
        step = math.copysign(speed * horizon, end - start)
        return MobilityTrace(np.array([0.0, horizon]), np.array([start, start + step]), TraceKind.LINEAR_PASS)
    return MobilityTrace(
        np.array([0.0, travel, horizon]),
        np.array([start, end, end]),
        TraceKind.LINEAR_PASS,
    )


def out_and_back(near: float, far: float, speed: float, horizon: float) -> MobilityTrace:
    """Shuttle between near and far at constant speed, starting at near."""
    if speed <= 0:
        raise InvalidTraceError(f"Out-and-back needs a positive speed, got {speed}")
    leg = abs(far - near) / speed
    if leg == 0:
        return fixed_trace(near, horizon)
    n_legs = max(1, math.ceil(max(horizon, 1.0) / leg))
    times = np.arange(n_legs + 1, dtype=float) * leg
    distances = np.where(np.arange(n_legs + 1) % 2 == 0, near, far).astype(float)
    return MobilityTrace(times, distances, TraceKind.OUT_AND_BACK)


def trace_for_scenario(scenario, horizon: float) -> MobilityTrace:
    """
    Trace a scenario implies: fixed at ``distance`` for a parked gateway,
    otherwise a linear pass at the scenario speed from ``min_distance``
    through the target distance to ``planning_distance``.
    """
    if scenario.speed <= 0 or scenario.excursion <= 0:
        return fixed_trace(scenario.distance, horizon)
    return linear_pass(scenario.min_distance, scenario.planning_distance, scenario.speed, horizon)
