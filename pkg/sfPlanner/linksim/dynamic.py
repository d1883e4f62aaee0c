"""
Dynamic SF adjustment baseline.

The gateway beacons at its current SF until a node answers, then
exchanges data and nudges the SF one step whenever the measured margin
leaves the hysteresis band. Each switch costs a control frame and a
period of dead air. Used only as the comparison baseline for the fixed,
planned SF.
"""

import logging
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from constants import DEFAULT_PACKETS
from sfPlanner.linksim.airtime import AirtimeLedger
from sfPlanner.linksim.mobility import MobilityTrace
from sfPlanner.linksim.simulator import SimOutcome, transmission_schedule
from sfPlanner.phy import RadioConfig, SpreadingFactor, link_budget, time_on_air

logger = logging.getLogger(__name__)


class DynamicProtocolConfig(BaseModel):
    """Timers and frame sizes of the dynamic protocol."""
    model_config = ConfigDict(frozen=True)

    beacon_interval: float = Field(30.0, gt=0)
    margin_low_threshold: float = 5.0
    margin_high_threshold: float = 15.0
    sf_switch_dwell: float = Field(20.0, ge=0)
    control_packet_bytes: int = Field(10, ge=0, le=255)  # 0 = free switches
    beacon_bytes: int = Field(10, ge=1, le=255)
    response_bytes: int = Field(10, ge=1, le=255)
    ack_bytes: int = Field(0, ge=0, le=255)
    initial_sf: int = Field(12, ge=7, le=12)
    max_missed: int = Field(3, ge=1)

    @model_validator(mode='after')
    def _hysteresis(self) -> 'DynamicProtocolConfig':
        if self.margin_high_threshold <= self.margin_low_threshold:
            raise ValueError(
                f"margin_high_threshold ({self.margin_high_threshold}) must exceed "
                f"margin_low_threshold ({self.margin_low_threshold})"
            )
        return self


class ProtocolState(str, Enum):
    SEARCH = 'search'
    DATA = 'data'


class DynamicProtocolRun:
    """One seeded run of the protocol state machine."""

    def __init__(self, scenario, config: RadioConfig, dyn: DynamicProtocolConfig,
                 trace: MobilityTrace, seed: int, n_packets: int,
                 shadowing_sigma: Optional[float] = None, horizon: Optional[float] = None):
        self.scenario = scenario
        self.config = config
        self.dyn = dyn
        self.trace = trace
        self.seed = seed
        self.n_packets = n_packets
        self.env = scenario.environment
        self.sigma = self.env.shadowing_sigma if shadowing_sigma is None else shadowing_sigma
        self.schedule, _, self.horizon = transmission_schedule(n_packets, scenario.packets_per_hour, horizon)
        trace.require_coverage(float(self.schedule[-1]))

        self.rng = np.random.default_rng(seed)
        self.ledger = AirtimeLedger(scenario.region.duty_cycle_limit, self.horizon)
        self.sf = SpreadingFactor(dyn.initial_sf)
        self.state = ProtocolState.SEARCH
        self.next_beacon = 0.0
        self.dead_until = 0.0
        self.missed = 0
        self.switches = 0
        self.delivered = 0
        self.deferred = 0

    def _margin_at(self, t: float, sf: SpreadingFactor) -> float:
        distance = float(self.trace.distance_at(t))
        margin = link_budget(sf, self.config, distance, self.env).link_margin
        if self.sigma > 0:
            margin += self.rng.normal(0.0, self.sigma)
        return margin

    def _frame(self, t: float, n_bytes: int, sf: SpreadingFactor) -> Optional[Tuple[float, float]]:
        """
        Send one frame no earlier than t.

        Returns:
            (end time, received margin), or None when the duty budget
            keeps it off the air before the horizon
        """
        airtime = time_on_air(sf, self.config, n_bytes)
        start = self.ledger.earliest_start(t, airtime)
        if start is None or start > self.horizon:
            return None
        self.ledger.commit(start, airtime)
        return start + airtime, self._margin_at(start, sf)

    def _step_up(self) -> None:
        if self.sf < SpreadingFactor.SF12:
            self.sf = SpreadingFactor(self.sf + 1)

    def _search(self, until: float) -> None:
        while self.state is ProtocolState.SEARCH and self.next_beacon <= until:
            t = self.next_beacon
            self.next_beacon += self.dyn.beacon_interval
            beacon = self._frame(t, self.dyn.beacon_bytes, self.sf)
            if beacon is None:
                continue
            end, margin = beacon
            if margin < 0:
                self._step_up()
                continue
            response = self._frame(end, self.dyn.response_bytes, self.sf)
            if response is None or response[1] < 0:
                self._step_up()
                continue
            self.state = ProtocolState.DATA
            self.missed = 0

    def _adapt(self, margin: float, t: float) -> None:
        if margin < self.dyn.margin_low_threshold and self.sf < SpreadingFactor.SF12:
            target = SpreadingFactor(self.sf + 1)
        elif margin > self.dyn.margin_high_threshold and self.sf > SpreadingFactor.SF7:
            target = SpreadingFactor(self.sf - 1)
        else:
            return

        if self.dyn.control_packet_bytes > 0:
            control = self._frame(t, self.dyn.control_packet_bytes, self.sf)
            if control is None or control[1] < 0:
                return  # node never heard the switch
            t = control[0]
        self.sf = target
        self.switches += 1
        self.dead_until = t + self.dyn.sf_switch_dwell

    def run(self) -> SimOutcome:
        payload = self.scenario.payload_bytes
        for planned in self.schedule:
            planned = float(planned)
            self._search(planned)
            if self.state is ProtocolState.SEARCH:
                continue

            airtime = time_on_air(self.sf, self.config, payload)
            start = self.ledger.earliest_start(planned, airtime)
            if start is None or start > self.horizon or start < self.dead_until:
                continue
            self.ledger.commit(start, airtime)
            if start > planned:
                self.deferred += 1
            end = start + airtime

            margin = self._margin_at(start, self.sf)
            if margin >= 0:
                self.delivered += 1
                self.missed = 0
                if self.dyn.ack_bytes > 0:
                    ack = self._frame(end, self.dyn.ack_bytes, self.sf)
                    if ack is not None:
                        end = ack[0]
                self._adapt(margin, end)
            else:
                self.missed += 1
                if self.missed >= self.dyn.max_missed:
                    logger.debug(f"Scenario {self.scenario.scenario_id}: link lost at {end:.1f} s, searching")
                    self.state = ProtocolState.SEARCH
                    self.next_beacon = end

        return SimOutcome(
            sf=SpreadingFactor(self.dyn.initial_sf),
            packets_sent=self.n_packets,
            packets_delivered=self.delivered,
            airtime_used=self.ledger.used,
            seed=self.seed,
            scenario_id=self.scenario.scenario_id,
            deferred=self.deferred,
            switches=self.switches,
        )


def simulate_dynamic_protocol(scenario, config: RadioConfig, dyn: DynamicProtocolConfig,
                              trace: MobilityTrace, seed: int, n_packets: int = DEFAULT_PACKETS,
                              shadowing_sigma: Optional[float] = None,
                              horizon: Optional[float] = None) -> SimOutcome:
    """Run the dynamic protocol baseline; only data packets are counted."""
    return DynamicProtocolRun(scenario, config, dyn, trace, seed, n_packets, shadowing_sigma, horizon).run()
