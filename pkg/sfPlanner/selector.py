"""
Two-phase optimum spreading factor selection.

Phase 1 evaluates every SF against five exclusion rules (range, fade
margin, duty cycle, required throughput, Doppler). Phase 2 scores the
survivors with min-max normalized ToA, energy, data rate and link margin
and picks the best, lowest SF on ties.
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from constants import (
    DEFAULT_FADE_MARGIN,
    DEFAULT_PASS_HALF_DURATION,
    DEFAULT_REGION,
    MOBILITY_THRESHOLDS,
    REGION_PROFILES,
    WEIGHT_PRESETS,
)
from sfPlanner.errors import InvalidConfigError, NoFeasibleSFError
from sfPlanner.phy import (
    EnvironmentModel,
    RadioConfig,
    SpreadingFactor,
    doppler_exclusion_check,
    effective_data_rate,
    energy_per_hour,
    link_budget,
    max_reliable_range,
    time_on_air,
)

logger = logging.getLogger(__name__)

SECONDS_PER_HOUR = 3600.0


class MobilityClass(str, Enum):
    STATIC = 'static'
    LOW = 'low'
    MODERATE = 'moderate'
    HIGH = 'high'

    @classmethod
    def from_speed(cls, speed: float) -> 'MobilityClass':
        if speed < MOBILITY_THRESHOLDS['static']:
            return cls.STATIC
        if speed < MOBILITY_THRESHOLDS['low']:
            return cls.LOW
        if speed < MOBILITY_THRESHOLDS['moderate']:
            return cls.MODERATE
        return cls.HIGH

    @property
    def rank(self) -> int:
        return list(MobilityClass).index(self)


class ExclusionReason(str, Enum):
    DISTANCE = 'distance'
    LINK_MARGIN = 'link-margin'
    DUTY_CYCLE = 'duty-cycle'
    DATA_RATE = 'data-rate'
    DOPPLER = 'doppler'


class RegionProfile(BaseModel):
    """Regulatory limits of the band in use."""
    model_config = ConfigDict(frozen=True)

    name: str = 'custom'
    duty_cycle_limit: float = Field(0.01, gt=0, le=1)
    max_tx_power: float = 14.0
    allowed_band: Tuple[float, float] = (433.05e6, 434.79e6)

    @field_validator('allowed_band')
    @classmethod
    def _ordered_band(cls, band: Tuple[float, float]) -> Tuple[float, float]:
        low, high = band
        if not 0 < low < high:
            raise ValueError(f"allowed_band must satisfy 0 < low < high, got {band}")
        return band

    @classmethod
    def preset(cls, name: str = DEFAULT_REGION) -> 'RegionProfile':
        if name not in REGION_PROFILES:
            known = ', '.join(REGION_PROFILES)
            raise InvalidConfigError(f"Unknown region profile '{name}'. Known: {known}")
        return cls(name=name, **REGION_PROFILES[name])

    def check_radio(self, config: RadioConfig) -> None:
        """
        Raises:
            InvalidConfigError: If the radio breaks this region's limits
        """
        if config.tx_power > self.max_tx_power:
            raise InvalidConfigError(
                f"tx_power {config.tx_power} dBm exceeds {self.max_tx_power} dBm allowed in region '{self.name}'"
            )
        low, high = self.allowed_band
        if not low <= config.carrier_frequency <= high:
            raise InvalidConfigError(
                f"Carrier {config.carrier_frequency / 1e6:.3f} MHz outside band "
                f"{low / 1e6:.3f}-{high / 1e6:.3f} MHz of region '{self.name}'"
            )


class ScenarioSpec(BaseModel):
    """
    One planning case.

    ``distance`` is the target distance; a mobile gateway shuttles
    ``excursion`` metres either side of it, so Phase 1 and 2 plan for
    ``distance + excursion``. When excursion is omitted for a moving
    gateway it defaults to speed * 11 s.
    """
    model_config = ConfigDict(frozen=True)

    scenario_id: str = 'adhoc'
    distance: float = Field(gt=0)
    speed: float = Field(0.0, ge=0)
    excursion: float = Field(0.0, ge=0)
    payload_bytes: int = Field(20, ge=1, le=255)
    packets_per_hour: float = Field(60.0, ge=1)
    required_throughput: Optional[float] = Field(None, gt=0)
    environment: EnvironmentModel = Field(default_factory=EnvironmentModel.preset)
    region: RegionProfile = Field(default_factory=RegionProfile.preset)
    seed: int = Field(0, ge=0)

    @model_validator(mode='before')
    @classmethod
    def _default_excursion(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get('excursion') is None:
            data = dict(data)
            try:
                speed = float(data.get('speed') or 0.0)
            except (TypeError, ValueError):
                data.pop('excursion', None)
                return data  # the speed field reports the problem
            data['excursion'] = speed * DEFAULT_PASS_HALF_DURATION
        return data

    @property
    def mobility_class(self) -> MobilityClass:
        return MobilityClass.from_speed(self.speed)

    @property
    def planning_distance(self) -> float:
        return self.distance + self.excursion

    @property
    def min_distance(self) -> float:
        return max(1.0, self.distance - self.excursion)


class ScoreWeights(BaseModel):
    """Phase-2 weights, normalized to sum 1 on construction."""
    model_config = ConfigDict(frozen=True)

    w_toa: float = Field(0.3, ge=0)
    w_energy: float = Field(0.3, ge=0)
    w_data_rate: float = Field(0.2, ge=0)
    w_link_margin: float = Field(0.2, ge=0)

    @model_validator(mode='before')
    @classmethod
    def _normalize(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        defaults = {name: f.default for name, f in cls.model_fields.items()}
        merged = {**defaults, **{k: v for k, v in data.items() if v is not None}}
        try:
            values = {k: float(merged[k]) for k in defaults}
        except (TypeError, ValueError) as e:
            raise ValueError(f"weights must be numbers: {e}")
        if any(v < 0 for v in values.values()):
            raise ValueError(f"weights must be non-negative, got {values}")
        total = sum(values.values())
        if total <= 0:
            raise ValueError("weights must not all be zero")
        return {k: v / total for k, v in values.items()}

    @classmethod
    def preset(cls, name: str = 'balanced') -> 'ScoreWeights':
        if name not in WEIGHT_PRESETS:
            known = ', '.join(WEIGHT_PRESETS)
            raise InvalidConfigError(f"Unknown weight preset '{name}'. Known: {known}")
        toa, energy, rate, margin = WEIGHT_PRESETS[name]
        return cls(w_toa=toa, w_energy=energy, w_data_rate=rate, w_link_margin=margin)

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.w_toa, self.w_energy, self.w_data_rate, self.w_link_margin)


@dataclass(frozen=True)
class SFEvaluation:
    """Per-SF metrics plus the Phase-1 verdict."""
    sf: SpreadingFactor
    toa: float
    data_rate: float
    energy: float
    link_margin: float
    hourly_airtime: float
    reliable_range: float
    exclusion_reasons: Tuple[ExclusionReason, ...] = ()

    @property
    def excluded(self) -> bool:
        return bool(self.exclusion_reasons)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'sf': str(self.sf),
            'toa': self.toa,
            'data_rate': self.data_rate,
            'energy': self.energy,
            'link_margin': self.link_margin,
            'hourly_airtime': self.hourly_airtime,
            'excluded': self.excluded,
            'exclusion_reasons': [r.value for r in self.exclusion_reasons],
        }


@dataclass(frozen=True)
class SFScore:
    """Weighted total plus the normalized sub-scores it was built from."""
    total: float
    toa: float
    energy: float
    data_rate: float
    link_margin: float

    def to_dict(self) -> Dict[str, float]:
        return {
            'total': self.total,
            'toa': self.toa,
            'energy': self.energy,
            'data_rate': self.data_rate,
            'link_margin': self.link_margin,
        }


@dataclass
class SelectionResult:
    chosen: SpreadingFactor
    scores: Dict[SpreadingFactor, SFScore]
    evaluations: List[SFEvaluation]
    decision_trace: List[str] = field(default_factory=list)
    relaxed: bool = False

    def ranking(self) -> List[SpreadingFactor]:
        """Scored SFs, best first."""
        return sorted(self.scores, key=lambda sf: (-self.scores[sf].total, int(sf)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'chosen': str(self.chosen),
            'scores': {str(sf): s.to_dict() for sf, s in sorted(self.scores.items())},
            'evaluations': [e.to_dict() for e in self.evaluations],
            'decision_trace': list(self.decision_trace),
            'relaxed': self.relaxed,
        }


def evaluate_candidates(scenario: ScenarioSpec, config: RadioConfig,
                        fade_margin: float = DEFAULT_FADE_MARGIN) -> List[SFEvaluation]:
    """
    Compute metrics for SF7..SF12 and apply the five exclusion rules.

    All distance-dependent metrics are taken at the planning distance.

    Args:
        scenario: Planning case
        config: Radio configuration
        fade_margin: Required link margin in dB

    Returns:
        Six evaluations ordered SF7..SF12
    """
    distance = scenario.planning_distance
    env = scenario.environment
    allowance = scenario.region.duty_cycle_limit * SECONDS_PER_HOUR
    evaluations = []

    for sf in SpreadingFactor:
        toa = time_on_air(sf, config, scenario.payload_bytes)
        rate = effective_data_rate(sf, config, scenario.payload_bytes)
        energy = energy_per_hour(sf, config, scenario.payload_bytes, scenario.packets_per_hour)
        budget = link_budget(sf, config, distance, env)
        reach = max_reliable_range(sf, config, env, fade_margin)
        airtime = toa * scenario.packets_per_hour

        reasons = []
        if distance > reach:
            reasons.append(ExclusionReason.DISTANCE)
        if budget.link_margin < fade_margin:
            reasons.append(ExclusionReason.LINK_MARGIN)
        if airtime > allowance:
            reasons.append(ExclusionReason.DUTY_CYCLE)
        if scenario.required_throughput is not None and rate < scenario.required_throughput:
            reasons.append(ExclusionReason.DATA_RATE)
        if doppler_exclusion_check(sf, config, scenario.speed):
            reasons.append(ExclusionReason.DOPPLER)

        evaluations.append(SFEvaluation(
            sf=sf,
            toa=toa,
            data_rate=rate,
            energy=energy,
            link_margin=budget.link_margin,
            hourly_airtime=airtime,
            reliable_range=reach,
            exclusion_reasons=tuple(reasons),
        ))

    return evaluations


def phase1_exclude(evaluations: Iterable[SFEvaluation]) -> Tuple[List[SFEvaluation], List[SFEvaluation]]:
    """Split evaluations into (feasible, excluded)."""
    feasible, excluded = [], []
    for e in evaluations:
        (excluded if e.excluded else feasible).append(e)
    return feasible, excluded


def exclusion_counts(evaluations: Iterable[SFEvaluation]) -> Dict[str, int]:
    counts = {reason.value: 0 for reason in ExclusionReason}
    for e in evaluations:
        for reason in e.exclusion_reasons:
            counts[reason.value] += 1
    return counts


def _normalize(values: List[float], lower_is_better: bool) -> List[float]:
    lo, hi = min(values), max(values)
    if hi == lo:
        return [1.0] * len(values)
    span = hi - lo
    if lower_is_better:
        return [(hi - v) / span for v in values]
    return [(v - lo) / span for v in values]


def phase2_score(evaluations: Iterable[SFEvaluation], weights: ScoreWeights) -> Dict[SpreadingFactor, SFScore]:
    """
    Min-max normalize each factor across the surviving SFs and combine.

    Raises:
        NoFeasibleSFError: If every evaluation is excluded
    """
    evaluations = list(evaluations)
    candidates, _ = phase1_exclude(evaluations)
    if not candidates:
        raise NoFeasibleSFError(exclusion_counts(evaluations))

    if len(candidates) == 1:
        only = candidates[0].sf
        return {only: SFScore(total=1.0, toa=1.0, energy=1.0, data_rate=1.0, link_margin=1.0)}

    toa = _normalize([c.toa for c in candidates], lower_is_better=True)
    energy = _normalize([c.energy for c in candidates], lower_is_better=True)
    rate = _normalize([c.data_rate for c in candidates], lower_is_better=False)
    margin = _normalize([c.link_margin for c in candidates], lower_is_better=False)

    scores = {}
    for i, c in enumerate(candidates):
        total = (weights.w_toa * toa[i] + weights.w_energy * energy[i]
                 + weights.w_data_rate * rate[i] + weights.w_link_margin * margin[i])
        scores[c.sf] = SFScore(total=total, toa=toa[i], energy=energy[i],
                               data_rate=rate[i], link_margin=margin[i])
    return scores


def best_scored(scores: Dict[SpreadingFactor, SFScore]) -> SpreadingFactor:
    """Highest total; lowest SF among equal totals."""
    return min(scores, key=lambda sf: (-scores[sf].total, int(sf)))


def _describe(e: SFEvaluation, scenario: ScenarioSpec, fade_margin: float) -> str:
    if not e.excluded:
        return (f"{e.sf}: feasible (ToA {e.toa * 1000:.1f} ms, margin {e.link_margin:.1f} dB, "
                f"airtime {e.hourly_airtime:.1f} s/h, range {e.reliable_range:.0f} m)")
    details = []
    for reason in e.exclusion_reasons:
        if reason is ExclusionReason.DISTANCE:
            details.append(f"range {e.reliable_range:.1f} m < {scenario.planning_distance:.1f} m")
        elif reason is ExclusionReason.LINK_MARGIN:
            details.append(f"margin {e.link_margin:.1f} dB < {fade_margin:.1f} dB")
        elif reason is ExclusionReason.DUTY_CYCLE:
            allowance = scenario.region.duty_cycle_limit * SECONDS_PER_HOUR
            details.append(f"airtime {e.hourly_airtime:.1f} s/h > {allowance:.1f} s/h")
        elif reason is ExclusionReason.DATA_RATE:
            details.append(f"rate {e.data_rate:.0f} bps < {scenario.required_throughput:.0f} bps")
        elif reason is ExclusionReason.DOPPLER:
            details.append(f"Doppler at {scenario.speed:.1f} m/s exceeds chirp tolerance")
    names = ', '.join(r.value for r in e.exclusion_reasons)
    return f"{e.sf}: excluded [{names}] " + '; '.join(details)


def _describe_score(sf: SpreadingFactor, s: SFScore, weights: ScoreWeights) -> str:
    return (f"{sf}: score {s.total:.3f} = {weights.w_toa:.2f}*{s.toa:.3f} (toa) "
            f"+ {weights.w_energy:.2f}*{s.energy:.3f} (energy) "
            f"+ {weights.w_data_rate:.2f}*{s.data_rate:.3f} (rate) "
            f"+ {weights.w_link_margin:.2f}*{s.link_margin:.3f} (margin)")


def select_sf(scenario: ScenarioSpec, config: RadioConfig, weights: ScoreWeights,
              fade_margin: float = DEFAULT_FADE_MARGIN, relaxed: bool = False) -> SelectionResult:
    """
    Run both phases and pick the optimum fixed SF.

    Args:
        scenario: Planning case
        config: Radio configuration
        weights: Phase-2 weights
        fade_margin: Required link margin in dB
        relaxed: When nothing is feasible, ignore the data-rate rule and
            take the SF with the largest link margin

    Returns:
        SelectionResult with the full audit trail

    Raises:
        NoFeasibleSFError: If no SF survives (and relaxed mode cannot help)
    """
    evaluations = evaluate_candidates(scenario, config, fade_margin)
    trace = [
        f"Scenario {scenario.scenario_id}: planning distance {scenario.planning_distance:.1f} m "
        f"({scenario.distance:.1f} m + {scenario.excursion:.1f} m excursion), "
        f"speed {scenario.speed:g} m/s ({scenario.mobility_class.value}), "
        f"{scenario.payload_bytes} B at {scenario.packets_per_hour:g} pkt/h"
    ]
    trace.extend(_describe(e, scenario, fade_margin) for e in evaluations)

    try:
        scores = phase2_score(evaluations, weights)
    except NoFeasibleSFError as e:
        error = NoFeasibleSFError(e.counts, scenario.scenario_id)
        if not relaxed:
            raise error from None
        return _relaxed_selection(scenario, evaluations, weights, trace, error)

    trace.extend(_describe_score(sf, s, weights) for sf, s in sorted(scores.items()))
    chosen = best_scored(scores)
    trace.append(f"Selected {chosen} (score {scores[chosen].total:.3f})")
    logger.debug(f"Scenario {scenario.scenario_id}: selected {chosen}")
    return SelectionResult(chosen=chosen, scores=scores, evaluations=evaluations, decision_trace=trace)


def _relaxed_selection(scenario: ScenarioSpec, evaluations: List[SFEvaluation], weights: ScoreWeights,
                       trace: List[str], error: NoFeasibleSFError) -> SelectionResult:
    rate_only = [
        e for e in evaluations
        if set(e.exclusion_reasons) <= {ExclusionReason.DATA_RATE}
    ]
    if not rate_only:
        raise error

    chosen = min(rate_only, key=lambda e: (-e.link_margin, int(e.sf))).sf
    relieved = [
        replace(e, exclusion_reasons=()) for e in rate_only
    ]
    scores = phase2_score(relieved, weights)
    trace.append("Relaxed mode: data-rate rule ignored, choosing the largest link margin")
    trace.extend(_describe_score(sf, s, weights) for sf, s in sorted(scores.items()))
    trace.append(f"Selected {chosen} (relaxed)")
    logger.warning(f"Scenario {scenario.scenario_id}: relaxed selection picked {chosen}")
    return SelectionResult(chosen=chosen, scores=scores, evaluations=evaluations,
                           decision_trace=trace, relaxed=True)
