"""
Seeded Monte-Carlo link simulator.

A packet is delivered when the expected received power at the
interpolated distance plus a log-normal shadowing sample reaches the
receiver sensitivity. Runs own their random generator; seeds for
per-SF substreams come from numpy's SeedSequence.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from constants import DEFAULT_PACKETS
from sfPlanner.errors import InvalidConfigError
from sfPlanner.linksim.airtime import SECONDS_PER_HOUR, AirtimeLedger
from sfPlanner.linksim.mobility import MobilityTrace, fixed_trace
from sfPlanner.phy import (
    RadioConfig,
    SpreadingFactor,
    expected_rssi_array,
    sensitivity,
    time_on_air,
)

logger = logging.getLogger(__name__)

OUTCOME_COLUMNS = ['scenario_id', 'sf', 'sent', 'delivered', 'pdr', 'airtime', 'seed']


@dataclass(frozen=True)
class SimOutcome:
    sf: SpreadingFactor
    packets_sent: int
    packets_delivered: int
    airtime_used: float
    seed: int
    scenario_id: str = ''
    deferred: int = 0
    switches: int = 0

    @property
    def pdr(self) -> float:
        if self.packets_sent == 0:
            return 0.0
        return self.packets_delivered / self.packets_sent

    def to_row(self) -> Dict[str, object]:
        return {
            'scenario_id': self.scenario_id,
            'sf': str(self.sf),
            'sent': self.packets_sent,
            'delivered': self.packets_delivered,
            'pdr': self.pdr,
            'airtime': self.airtime_used,
            'seed': self.seed,
        }


class BruteForceResult(NamedTuple):
    best: SpreadingFactor
    outcomes: List[SimOutcome]

    @property
    def degenerate(self) -> bool:
        """Every SF lost every packet."""
        return all(o.packets_delivered == 0 for o in self.outcomes)

    @property
    def pdr_by_sf(self) -> Dict[SpreadingFactor, float]:
        return {o.sf: o.pdr for o in self.outcomes}


def derive_seed(seed: int, *keys: int) -> int:
    """Independent, reproducible child seed for (seed, keys...)."""
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(sequence.generate_state(1)[0])


def transmission_schedule(n_packets: int, packets_per_hour: float,
                          horizon: Optional[float] = None) -> Tuple[np.ndarray, float, float]:
    """
    Uniform send schedule.

    Returns:
        (send times, interval, horizon); without an explicit horizon the
        interval follows the packet rate and horizon = n * interval
    """
    if n_packets < 1:
        raise InvalidConfigError(f"n_packets must be >= 1, got {n_packets}")
    if horizon is not None:
        if horizon <= 0:
            raise InvalidConfigError(f"horizon must be positive, got {horizon}")
        interval = horizon / n_packets
    else:
        interval = SECONDS_PER_HOUR / packets_per_hour
        horizon = n_packets * interval
    return np.arange(n_packets, dtype=float) * interval, interval, horizon


def gate_schedule(schedule: np.ndarray, airtime: float, duty_cycle_limit: float,
                  horizon: float, interval: float) -> Tuple[np.ndarray, int]:
    """
    Apply duty-cycle gating to a schedule.

    Returns:
        (actual start times with NaN for packets that never went out,
        number of deferred packets)
    """
    budget = duty_cycle_limit * SECONDS_PER_HOUR
    per_window = math.ceil(SECONDS_PER_HOUR / interval)
    if (airtime <= interval and per_window * airtime <= budget
            and len(schedule) * airtime <= duty_cycle_limit * horizon):
        return schedule.copy(), 0

    ledger = AirtimeLedger(duty_cycle_limit, horizon)
    starts = np.full(len(schedule), np.nan)
    deferred = 0
    for i, planned in enumerate(schedule):
        start = ledger.earliest_start(float(planned), airtime)
        if start is None or start > horizon:
            continue
        ledger.commit(start, airtime)
        starts[i] = start
        if start > planned:
            deferred += 1
    return starts, deferred


def simulate_link(scenario, sf, config: RadioConfig, trace: MobilityTrace, seed: int,
                  n_packets: int = DEFAULT_PACKETS, shadowing_sigma: Optional[float] = None,
                  horizon: Optional[float] = None) -> SimOutcome:
    """
    Send n_packets at a fixed SF along the trace and count deliveries.

    Args:
        scenario: ScenarioSpec providing payload, rate, environment, region
        sf: Spreading factor to use
        config: Radio configuration
        trace: Gateway mobility trace spanning the schedule
        seed: Seed of this run's generator
        n_packets: Packets to schedule
        shadowing_sigma: Override of the environment's shadowing sigma
        horizon: Optional run length; defaults to n_packets / rate

    Raises:
        InvalidTraceError: If the trace does not cover the schedule
    """
    sf = SpreadingFactor(int(sf))
    env = scenario.environment
    schedule, interval, horizon = transmission_schedule(n_packets, scenario.packets_per_hour, horizon)
    trace.require_coverage(float(schedule[-1]))

    airtime = time_on_air(sf, config, scenario.payload_bytes)
    starts, deferred = gate_schedule(schedule, airtime, scenario.region.duty_cycle_limit, horizon, interval)

    sigma = env.shadowing_sigma if shadowing_sigma is None else shadowing_sigma
    rng = np.random.default_rng(seed)
    shadow = rng.normal(0.0, sigma, n_packets) if sigma > 0 else np.zeros(n_packets)

    sent = ~np.isnan(starts)
    received = expected_rssi_array(config, trace.distance_at(starts[sent]), env) + shadow[sent]
    delivered = int(np.count_nonzero(received >= sensitivity(sf, config.bandwidth)))

    return SimOutcome(
        sf=sf,
        packets_sent=n_packets,
        packets_delivered=delivered,
        airtime_used=airtime * int(np.count_nonzero(sent)),
        seed=seed,
        scenario_id=scenario.scenario_id,
        deferred=deferred,
    )


def brute_force_best_sf(scenario, config: RadioConfig, trace: MobilityTrace, seed: int,
                        n_packets: int = DEFAULT_PACKETS, shadowing_sigma: Optional[float] = None,
                        horizon: Optional[float] = None) -> BruteForceResult:
    """
    Simulate all six SFs on independent substreams and keep the best PDR,
    lowest SF on exact ties.
    """
    outcomes = [
        simulate_link(scenario, sf, config, trace, derive_seed(seed, int(sf)),
                      n_packets, shadowing_sigma, horizon)
        for sf in SpreadingFactor
    ]
    best = min(outcomes, key=lambda o: (-o.pdr, int(o.sf))).sf
    result = BruteForceResult(best, outcomes)
    if result.degenerate:
        logger.warning(f"Scenario {scenario.scenario_id}: no SF delivered any packet, best defaults to {best}")
    return result


def pdr_distance_sweep(scenario, config: RadioConfig, distances: Sequence[float], seed: int,
                       n_packets: int = DEFAULT_PACKETS,
                       sfs: Iterable[SpreadingFactor] = tuple(SpreadingFactor)) -> pd.DataFrame:
    """
    PDR of each SF at a series of fixed distances.

    The same substream per SF is reused at every distance, so each SF's
    curve is non-increasing in distance.
    """
    rows = []
    for sf in sfs:
        sub_seed = derive_seed(seed, int(sf))
        for distance in distances:
            point = scenario.model_copy(update={'distance': float(distance), 'speed': 0.0, 'excursion': 0.0})
            _, _, horizon = transmission_schedule(n_packets, point.packets_per_hour)
            outcome = simulate_link(point, sf, config, fixed_trace(point.distance, horizon), sub_seed, n_packets)
            rows.append({'distance': float(distance), 'sf': str(sf), 'pdr': outcome.pdr})
    return pd.DataFrame(rows, columns=['distance', 'sf', 'pdr'])


def outcomes_frame(outcomes: Iterable[SimOutcome]) -> pd.DataFrame:
    return pd.DataFrame([o.to_row() for o in outcomes], columns=OUTCOME_COLUMNS)
