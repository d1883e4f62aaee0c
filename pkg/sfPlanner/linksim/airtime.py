"""
Duty-cycle accounting: a rolling one-hour airtime budget plus a cap on
total airtime over the run.
"""

from collections import deque
from typing import Deque, Optional, Tuple

SECONDS_PER_HOUR = 3600.0
_EPS = 1e-9


class AirtimeLedger:
    """
    Tracks transmissions of one radio.

    A transmission starting at t counts against the window while
    start + window > t. The channel is busy until the previous frame ends.
    """

    def __init__(self, duty_cycle_limit: float, horizon: float, window: float = SECONDS_PER_HOUR):
        self.window = window
        self.window_budget = duty_cycle_limit * window
        self.total_budget = duty_cycle_limit * horizon
        self.used = 0.0
        self.busy_until = 0.0
        self._log: Deque[Tuple[float, float]] = deque()
        self._window_used = 0.0

    def _expire(self, t: float) -> None:
        while self._log and self._log[0][0] + self.window <= t:
            _, airtime = self._log.popleft()
            self._window_used -= airtime
        if not self._log:
            self._window_used = 0.0

    def earliest_start(self, t: float, airtime: float) -> Optional[float]:
        """
        Earliest start >= t at which a frame of this airtime fits.

        Returns:
            Start time, or None if the frame can never fit
        """
        t = max(t, self.busy_until)
        if airtime > self.window_budget or self.used + airtime > self.total_budget:
            return None
        self._expire(t)
        excess = self._window_used + airtime - self.window_budget
        if excess <= _EPS:
            return t
        freed = 0.0
        for start, spent in self._log:
            freed += spent
            if freed >= excess - _EPS:
                return start + self.window
        return None

    def commit(self, start: float, airtime: float) -> None:
        self._expire(start)
        self._log.append((start, airtime))
        self._window_used += airtime
        self.used += airtime
        self.busy_until = start + airtime
