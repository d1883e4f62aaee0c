import pandas as pd
import pytest

from sfPlanner.evaluator import validate
from sfPlanner.linksim import pdr_distance_sweep
from sfPlanner.reports import REPORT_COLUMNS, ReportWriter, read_summary


@pytest.fixture
def report(make_spec, radio, weights):
    specs = [make_spec(d, speed=5.0, scenario_id=f"R{i}") for i, d in enumerate((100.0, 1000.0, 5000.0), start=1)]
    return validate(specs, radio, weights, seed=42, n_packets=200)


class TestReportWriter:
    def test_validation_files(self, tmp_path, report):
        writer = ReportWriter(tmp_path)
        written = writer.write_validation(report)
        assert {p.name for p in written} == {'report.csv', 'confusion.csv', 'summary.txt', 'confusion.svg'}

        frame = pd.read_csv(writer.path('report'), keep_default_na=False)
        assert list(frame.columns) == REPORT_COLUMNS
        assert list(frame['scenario_id']) == ['R1', 'R2', 'R3']
        assert frame.loc[2, 'predicted'] == ''

        confusion = pd.read_csv(writer.path('confusion'), index_col=0)
        assert confusion.to_numpy().sum() == 2

        lines = writer.path('summary').read_text(encoding='utf-8').splitlines()
        assert lines[0] == report.summary_line()
        assert 'infeasible=1' in lines[1]
        assert lines[2] == f"over_provisioned={report.over_provisioned}"
        assert lines[-1] == 'infeasible_ids=R3'
        assert read_summary(writer.path('summary')) == report.summary_line()

        svg = writer.path('confusion_svg').read_text(encoding='utf-8')
        assert svg.startswith('<svg') and svg.rstrip().endswith('</svg>')

    def test_skip_svg(self, tmp_path, report):
        writer = ReportWriter(tmp_path)
        writer.write_validation(report, svg=False)
        assert not writer.path('confusion_svg').exists()

    def test_rebuild_matches_original(self, tmp_path, report):
        writer = ReportWriter(tmp_path)
        writer.write_validation(report)
        summary = writer.path('summary').read_bytes()
        confusion = writer.path('confusion').read_bytes()
        writer.path('summary').unlink()

        rebuilt = writer.rebuild_from_csv()
        assert writer.path('summary').read_bytes() == summary
        assert writer.path('confusion').read_bytes() == confusion
        assert rebuilt['infeasible'] == ['R3']
        assert rebuilt['total'] == 3

    def test_missing_summary(self, tmp_path):
        assert read_summary(tmp_path / 'summary.txt') is None

    def test_sweep_files(self, tmp_path, make_spec, radio):
        sweep = pdr_distance_sweep(make_spec(200.0), radio, [500.0, 1500.0, 2500.0], seed=1, n_packets=100)
        writer = ReportWriter(tmp_path)
        written = writer.write_sweep(sweep)
        assert [p.name for p in written] == ['pdr_distance.csv', 'pdr_distance.svg']
        assert '<polyline' in writer.path('sweep_svg').read_text(encoding='utf-8')
