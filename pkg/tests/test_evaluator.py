import numpy as np
import pytest

from constants import MESSAGES
from sfPlanner.errors import InvalidPairError
from sfPlanner.evaluator import ValidationReport, ValidationRow, compare_static_vs_dynamic, confusion_matrix, validate
from sfPlanner.linksim import DynamicProtocolConfig
from sfPlanner.phy import SpreadingFactor
from sfPlanner.scenarios import ScenarioGrid, generate_grid
from sfPlanner.selector import MobilityClass

SF = SpreadingFactor


class TestConfusionMatrix:
    def test_hand_example(self):
        cm = confusion_matrix([(7, 7), (8, 9), (9, 11), (10, 10)])
        assert cm.total == 4
        assert cm.exact_match_rate == 0.5
        assert cm.within_one_sf_rate == 0.75
        assert cm.counts[1, 2] == 1
        assert list(cm.predicted_histogram()) == [1, 1, 1, 1, 0, 0]
        assert list(cm.actual_histogram()) == [1, 0, 1, 1, 1, 0]

    def test_identity(self):
        pairs = [(sf, sf) for sf in SF for _ in range(3)]
        cm = confusion_matrix(pairs)
        assert cm.exact_match_rate == 1.0
        assert cm.within_one_sf_rate == 1.0
        assert np.array_equal(cm.counts, 3 * np.eye(6, dtype=int))

    def test_invariants(self):
        rng = np.random.default_rng(5)
        pairs = [tuple(p) for p in rng.integers(7, 13, size=(500, 2))]
        cm = confusion_matrix(pairs)
        assert cm.total == 500
        assert 0.0 <= cm.exact_match_rate <= cm.within_one_sf_rate <= 1.0
        assert cm.predicted_histogram().sum() == cm.actual_histogram().sum() == 500

    def test_rejects_bad_pairs(self):
        with pytest.raises(InvalidPairError):
            confusion_matrix([])
        with pytest.raises(InvalidPairError, match='13'):
            confusion_matrix([(7, 7), (13, 12)])


class TestValidate:
    @pytest.fixture
    def field_specs(self, make_spec):
        return [make_spec(d, speed=5.0, scenario_id=f"T{i}")
                for i, d in enumerate((100.0, 500.0, 1000.0, 1500.0, 1800.0), start=1)]

    def test_field_trial_predictions(self, field_specs, radio, weights):
        report = validate(field_specs, radio, weights, seed=42, n_packets=300)
        predicted = [row.predicted for row in report.rows]
        assert predicted[:3] == [SF.SF7, SF.SF8, SF.SF9]
        assert predicted[3] in (SF.SF10, SF.SF11)
        assert predicted[4] is SF.SF11
        assert report.total_scenarios == 5
        assert report.confusion.total == 5

    def test_near_scenario_pdr(self, field_specs, radio, weights):
        report = validate(field_specs[:1], radio, weights, seed=42)
        row = report.rows[0]
        assert row.best is SF.SF7
        assert row.pdr_at_predicted > 0.99

    def test_tied_prediction_counts_as_exact(self, field_specs, radio, weights):
        report = validate(field_specs, radio, weights, seed=42, n_packets=300, tie_tolerance=1.0)
        assert all(row.actual == row.predicted for row in report.rows)
        assert report.exact_match_rate == 1.0

    def test_deterministic(self, field_specs, radio, weights):
        first = validate(field_specs, radio, weights, seed=42, n_packets=200)
        second = validate(field_specs, radio, weights, seed=42, n_packets=200)
        assert first.rows == second.rows
        assert np.array_equal(first.confusion.counts, second.confusion.counts)

    def test_worker_pool_matches_serial(self, field_specs, radio, weights):
        serial = validate(field_specs, radio, weights, seed=42, n_packets=200)
        pooled = validate(field_specs, radio, weights, seed=42, n_packets=200, jobs=2)
        assert serial.rows == pooled.rows

    def test_infeasible_listed_and_left_out(self, field_specs, make_spec, radio, weights):
        specs = field_specs + [make_spec(5000.0, scenario_id='T9')]
        report = validate(specs, radio, weights, seed=42, n_packets=200)
        assert report.infeasible == ['T9']
        assert report.total_scenarios == 6
        assert report.confusion.total == 5
        infeasible_row = report.rows[-1]
        assert infeasible_row.predicted is None
        assert infeasible_row.pdr_at_predicted is None

    def test_summary_line_format(self, field_specs, radio, weights):
        line = validate(field_specs, radio, weights, seed=42, n_packets=100).summary_line()
        assert line.startswith('exact=') and ' within1=' in line

    def test_over_provisioned_counts_as_exact(self):
        # SF9 sits in the tie band with SF7, so the pair scores (9, 9)
        row = ValidationRow(scenario_id='O1', mobility_class='static', predicted=SF.SF9, actual=SF.SF9,
                            best=SF.SF7, tied=(SF.SF7, SF.SF8, SF.SF9), pdr_at_predicted=1.0, pdr_at_actual=1.0)
        exact = ValidationRow(scenario_id='O2', mobility_class='static', predicted=SF.SF8, actual=SF.SF8,
                              best=SF.SF8, tied=(SF.SF8,), pdr_at_predicted=1.0, pdr_at_actual=1.0)
        report = ValidationReport(2, confusion_matrix([(9, 9), (8, 8)]), [row, exact])
        assert report.exact_match_rate == 1.0
        assert report.over_provisioned == 1

    def test_needs_scenarios(self, radio, weights):
        with pytest.raises(ValueError):
            validate([], radio, weights, seed=1)

    @pytest.mark.slow
    def test_default_grid_accuracy(self, radio, weights):
        specs = generate_grid(ScenarioGrid(), seed=42)
        report = validate(specs, radio, weights, seed=42, jobs=4)
        assert report.total_scenarios == 672
        assert report.exact_match_rate >= 0.90
        assert report.within_one_sf_rate >= 0.97


class TestCompare:
    @pytest.fixture
    def fast_specs(self, make_spec):
        return [make_spec(d, speed=20.0, scenario_id=f"H{i}")
                for i, d in enumerate((623.1, 1015.4, 1407.7), start=1)]

    def test_fixed_plan_beats_dynamic_at_high_mobility(self, fast_specs, radio, weights):
        comparison = compare_static_vs_dynamic(fast_specs, radio, weights, DynamicProtocolConfig(), seed=42)
        assert not comparison.empty
        assert len(comparison.rows) == 3
        static, dynamic = comparison.class_means(MobilityClass.HIGH)
        assert static > dynamic
        assert list(comparison.by_class['mobility_class']) == ['high']
        assert (comparison.rows['switches'] >= 0).all()

    def test_static_only_subset_is_empty(self, make_spec, radio, weights):
        specs = [make_spec(300.0), make_spec(900.0)]
        comparison = compare_static_vs_dynamic(specs, radio, weights, DynamicProtocolConfig(), seed=1)
        assert comparison.empty
        assert comparison.notice == MESSAGES['empty_compare']

    def test_min_class_static_includes_parked(self, make_spec, radio, weights):
        specs = [make_spec(300.0, scenario_id='P'), make_spec(300.0, speed=10.0, scenario_id='M')]
        comparison = compare_static_vs_dynamic(specs, radio, weights, DynamicProtocolConfig(), seed=1,
                                               n_packets=100, min_class=MobilityClass.STATIC)
        assert list(comparison.rows['scenario_id']) == ['M', 'P']
        assert list(comparison.by_class['mobility_class']) == ['static', 'high']

    def test_infeasible_skipped(self, fast_specs, make_spec, radio, weights):
        specs = fast_specs[:1] + [make_spec(5000.0, speed=10.0, scenario_id='X')]
        comparison = compare_static_vs_dynamic(specs, radio, weights, DynamicProtocolConfig(), seed=1,
                                               n_packets=100)
        assert comparison.skipped == ['X']
        assert list(comparison.rows['scenario_id']) == ['H1']

    def test_deterministic(self, fast_specs, radio, weights):
        first = compare_static_vs_dynamic(fast_specs, radio, weights, DynamicProtocolConfig(), seed=3, n_packets=200)
        second = compare_static_vs_dynamic(fast_specs, radio, weights, DynamicProtocolConfig(), seed=3, n_packets=200)
        assert first.rows.equals(second.rows)
