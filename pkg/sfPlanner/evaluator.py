"""
Validation pipeline: predicted SF vs brute-force best SF over a scenario
set, confusion matrix, and the fixed-SF vs dynamic-protocol comparison.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from constants import DEFAULT_FADE_MARGIN, DEFAULT_PACKETS, DEFAULT_TIE_TOLERANCE, MESSAGES
from sfPlanner.errors import InvalidPairError, NoFeasibleSFError
from sfPlanner.linksim import (
    DynamicProtocolConfig,
    brute_force_best_sf,
    derive_seed,
    simulate_dynamic_protocol,
    simulate_link,
    trace_for_scenario,
    transmission_schedule,
)
from sfPlanner.phy import RadioConfig, SpreadingFactor
from sfPlanner.selector import MobilityClass, ScenarioSpec, ScoreWeights, select_sf

logger = logging.getLogger(__name__)

N_SF = len(SpreadingFactor)
_STATIC_STREAM = 1
_DYNAMIC_STREAM = 2


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts indexed [predicted - 7, actual - 7]."""
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def exact_match_rate(self) -> float:
        return float(np.trace(self.counts)) / self.total if self.total else 0.0

    @property
    def within_one_sf_rate(self) -> float:
        if not self.total:
            return 0.0
        idx = np.arange(N_SF)
        near = np.abs(np.subtract.outer(idx, idx)) <= 1
        return float(self.counts[near].sum()) / self.total

    def predicted_histogram(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def actual_histogram(self) -> np.ndarray:
        return self.counts.sum(axis=0)


def confusion_matrix(pairs: Iterable[Tuple[int, int]]) -> ConfusionMatrix:
    """
    Raises:
        InvalidPairError: On an empty list or an SF outside 7..12
    """
    pairs = list(pairs)
    if not pairs:
        raise InvalidPairError("confusion matrix needs at least one (predicted, actual) pair")
    values = np.array([(int(p), int(a)) for p, a in pairs], dtype=int)
    if values.min() < SpreadingFactor.SF7 or values.max() > SpreadingFactor.SF12:
        bad = [pair for pair in pairs if not all(7 <= int(v) <= 12 for v in pair)]
        raise InvalidPairError(f"SF outside 7..12 in pair {bad[0]}")
    counts = np.zeros((N_SF, N_SF), dtype=int)
    np.add.at(counts, (values[:, 0] - 7, values[:, 1] - 7), 1)
    return ConfusionMatrix(counts)


@dataclass(frozen=True)
class ValidationRow:
    scenario_id: str
    mobility_class: str
    predicted: Optional[SpreadingFactor]
    actual: SpreadingFactor
    best: SpreadingFactor
    tied: Tuple[SpreadingFactor, ...]
    pdr_at_predicted: Optional[float]
    pdr_at_actual: float
    infeasible: bool = False
    degenerate: bool = False


@dataclass
class ValidationReport:
    total_scenarios: int
    confusion: ConfusionMatrix
    rows: List[ValidationRow] = field(default_factory=list)

    @property
    def exact_match_rate(self) -> float:
        return self.confusion.exact_match_rate

    @property
    def within_one_sf_rate(self) -> float:
        return self.confusion.within_one_sf_rate

    @property
    def infeasible(self) -> List[str]:
        return [r.scenario_id for r in self.rows if r.infeasible]

    @property
    def infeasible_count(self) -> int:
        return len(self.infeasible)

    @property
    def over_provisioned(self) -> int:
        """Scored rows whose prediction sits above the lowest tied SF; they still count as exact."""
        return sum(1 for r in self.rows if not r.infeasible and r.predicted is not None and r.predicted > r.best)

    def summary_line(self) -> str:
        return f"exact={self.exact_match_rate:.3f} within1={self.within_one_sf_rate:.3f}"


def _run_tasks(fn: Callable, tasks: Sequence, jobs: int, progress: bool, desc: str) -> list:
    """Map fn over tasks, in order, on a bounded process pool when jobs > 1."""
    if jobs <= 1 or len(tasks) < 2:
        return [fn(task) for task in tqdm(tasks, desc=desc, disable=not progress)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        mapped = pool.map(fn, tasks, chunksize=max(1, len(tasks) // (jobs * 8)))
        return list(tqdm(mapped, total=len(tasks), desc=desc, disable=not progress))


def _validate_one(task) -> ValidationRow:
    spec, config, weights, seed, n_packets, fade_margin, tie_tolerance, sigma, horizon = task
    _, _, run_horizon = transmission_schedule(n_packets, spec.packets_per_hour, horizon)
    trace = trace_for_scenario(spec, run_horizon)
    oracle = brute_force_best_sf(spec, config, trace, derive_seed(seed, spec.seed),
                                 n_packets, sigma, horizon)
    pdr = oracle.pdr_by_sf
    top = max(pdr.values())
    tied = tuple(sf for sf in SpreadingFactor if pdr[sf] >= top - tie_tolerance)
    best = tied[0]

    try:
        predicted = select_sf(spec, config, weights, fade_margin).chosen
    except NoFeasibleSFError as e:
        logger.warning(str(e))
        return ValidationRow(
            scenario_id=spec.scenario_id,
            mobility_class=spec.mobility_class.value,
            predicted=None,
            actual=best,
            best=best,
            tied=tied,
            pdr_at_predicted=None,
            pdr_at_actual=pdr[best],
            infeasible=True,
            degenerate=oracle.degenerate,
        )

    # a prediction inside the tie band counts as the actual best
    actual = predicted if predicted in tied else best
    return ValidationRow(
        scenario_id=spec.scenario_id,
        mobility_class=spec.mobility_class.value,
        predicted=predicted,
        actual=actual,
        best=best,
        tied=tied,
        pdr_at_predicted=pdr[predicted],
        pdr_at_actual=pdr[actual],
        degenerate=oracle.degenerate,
    )


def validate(specs: Sequence[ScenarioSpec], config: RadioConfig, weights: ScoreWeights, seed: int,
             n_packets: int = DEFAULT_PACKETS, fade_margin: float = DEFAULT_FADE_MARGIN,
             tie_tolerance: float = DEFAULT_TIE_TOLERANCE, shadowing_sigma: Optional[float] = None,
             horizon: Optional[float] = None, jobs: int = 1, progress: bool = False) -> ValidationReport:
    """
    Compare the algorithm's choice with the simulated best SF per scenario.

    Brute-force PDRs within tie_tolerance of the maximum count as tied;
    the lowest tied SF is the actual best unless the prediction is tied.
    Scenarios without a feasible SF are listed as infeasible and left out
    of the rates.

    Args:
        specs: Scenarios to validate
        config: Radio configuration
        weights: Phase-2 weights
        seed: Base seed; each scenario's stream derives from it and the scenario seed
        n_packets: Packets per (scenario, SF) run
        fade_margin: Required link margin in dB
        tie_tolerance: PDR band treated as a tie
        shadowing_sigma: Override of every environment's sigma
        horizon: Optional run length override (seconds)
        jobs: Worker processes
        progress: Show a progress bar

    Returns:
        ValidationReport with rows ordered by scenario_id
    """
    specs = list(specs)
    if not specs:
        raise ValueError("validate needs at least one scenario")

    tasks = [
        (spec, config, weights, seed, n_packets, fade_margin, tie_tolerance, shadowing_sigma, horizon)
        for spec in specs
    ]
    rows = sorted(_run_tasks(_validate_one, tasks, jobs, progress, 'Validating'), key=lambda r: r.scenario_id)

    scored = [(r.predicted, r.actual) for r in rows if not r.infeasible]
    if scored:
        confusion = confusion_matrix(scored)
    else:
        confusion = ConfusionMatrix(np.zeros((N_SF, N_SF), dtype=int))

    report = ValidationReport(total_scenarios=len(specs), confusion=confusion, rows=rows)
    logger.info(
        f"Validated {report.total_scenarios} scenarios: {report.summary_line()} "
        f"infeasible={report.infeasible_count}"
    )
    return report


COMPARISON_COLUMNS = [
    'scenario_id', 'mobility_class', 'distance', 'speed', 'static_sf',
    'pdr_static', 'pdr_dynamic', 'switches',
]
CLASS_COLUMNS = ['mobility_class', 'scenarios', 'pdr_static', 'pdr_dynamic']


@dataclass
class StaticDynamicComparison:
    rows: pd.DataFrame
    by_class: pd.DataFrame
    skipped: List[str] = field(default_factory=list)
    notice: Optional[str] = None

    @property
    def empty(self) -> bool:
        return self.rows.empty

    def class_means(self, mobility_class: MobilityClass) -> Tuple[float, float]:
        """(mean pdr_static, mean pdr_dynamic) for one mobility class."""
        subset = self.rows[self.rows['mobility_class'] == MobilityClass(mobility_class).value]
        return float(subset['pdr_static'].mean()), float(subset['pdr_dynamic'].mean())


def class_summary(rows: pd.DataFrame) -> pd.DataFrame:
    """Scenario count and mean PDRs per mobility class, slowest class first."""
    if rows.empty:
        return pd.DataFrame(columns=CLASS_COLUMNS)
    by_class = (
        rows.groupby('mobility_class', sort=False)
        .agg(scenarios=('scenario_id', 'count'), pdr_static=('pdr_static', 'mean'),
             pdr_dynamic=('pdr_dynamic', 'mean'))
        .reset_index()
    )
    order = {c.value: c.rank for c in MobilityClass}
    return by_class.sort_values('mobility_class', key=lambda col: col.map(order)).reset_index(drop=True)


def _compare_one(task) -> Optional[dict]:
    spec, config, weights, dyn, seed, n_packets, fade_margin, sigma, horizon = task
    try:
        chosen = select_sf(spec, config, weights, fade_margin).chosen
    except NoFeasibleSFError:
        return None
    _, _, run_horizon = transmission_schedule(n_packets, spec.packets_per_hour, horizon)
    trace = trace_for_scenario(spec, run_horizon)
    static = simulate_link(spec, chosen, config, trace, derive_seed(seed, spec.seed, _STATIC_STREAM),
                           n_packets, sigma, horizon)
    dynamic = simulate_dynamic_protocol(spec, config, dyn, trace,
                                        derive_seed(seed, spec.seed, _DYNAMIC_STREAM),
                                        n_packets, sigma, horizon)
    return {
        'scenario_id': spec.scenario_id,
        'mobility_class': spec.mobility_class.value,
        'distance': spec.distance,
        'speed': spec.speed,
        'static_sf': str(chosen),
        'pdr_static': static.pdr,
        'pdr_dynamic': dynamic.pdr,
        'switches': dynamic.switches,
    }


def compare_static_vs_dynamic(specs: Sequence[ScenarioSpec], config: RadioConfig, weights: ScoreWeights,
                              dyn: DynamicProtocolConfig, seed: int, n_packets: int = DEFAULT_PACKETS,
                              fade_margin: float = DEFAULT_FADE_MARGIN,
                              min_class: MobilityClass = MobilityClass.MODERATE,
                              shadowing_sigma: Optional[float] = None, horizon: Optional[float] = None,
                              jobs: int = 1, progress: bool = False) -> StaticDynamicComparison:
    """
    PDR of the planned fixed SF against the dynamic protocol, per scenario
    and averaged per mobility class.

    Only scenarios at or above min_class are compared; scenarios without
    a feasible SF are skipped and listed.
    """
    min_class = MobilityClass(min_class)
    subset = [s for s in specs if s.mobility_class.rank >= min_class.rank]
    if min_class is not MobilityClass.STATIC:
        subset = [s for s in subset if s.speed > 0]

    if not subset:
        logger.warning(MESSAGES['empty_compare'])
        return StaticDynamicComparison(
            rows=pd.DataFrame(columns=COMPARISON_COLUMNS),
            by_class=pd.DataFrame(columns=CLASS_COLUMNS),
            notice=MESSAGES['empty_compare'],
        )

    tasks = [
        (spec, config, weights, dyn, seed, n_packets, fade_margin, shadowing_sigma, horizon)
        for spec in subset
    ]
    results = _run_tasks(_compare_one, tasks, jobs, progress, 'Comparing')
    skipped = sorted(spec.scenario_id for spec, result in zip(subset, results) if result is None)
    records = sorted((r for r in results if r is not None), key=lambda r: r['scenario_id'])
    rows = pd.DataFrame(records, columns=COMPARISON_COLUMNS)

    by_class = class_summary(rows)

    if skipped:
        logger.warning(f"Skipped {len(skipped)} infeasible scenarios in comparison")
    return StaticDynamicComparison(rows=rows, by_class=by_class, skipped=skipped)
