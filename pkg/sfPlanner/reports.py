"""
Report writers: CSV tables, the summary text file and small SVG charts
built from string templates (no plotting library needed to view them).
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from constants import OUTPUT_FILES
from sfPlanner.evaluator import (
    N_SF,
    ConfusionMatrix,
    StaticDynamicComparison,
    ValidationReport,
    class_summary,
    confusion_matrix,
)
from sfPlanner.phy import SpreadingFactor

logger = logging.getLogger(__name__)

REPORT_COLUMNS = [
    'scenario_id', 'predicted', 'actual', 'best', 'tied',
    'pdr_at_predicted', 'pdr_at_actual', 'infeasible', 'mobility_class',
]
SF_LABELS = [str(sf) for sf in SpreadingFactor]
FLOAT_FORMAT = '%.6f'

SVG_STYLE = """
text { font-family: Helvetica, Arial, sans-serif; fill: #222; }
.title { font-size: 16px; font-weight: bold; }
.axis { font-size: 12px; }
.cell { font-size: 12px; text-anchor: middle; }
.legend { font-size: 12px; }
"""

SERIES_COLORS = ['#2e7d32', '#1565c0', '#ef6c00', '#6a1b9a', '#c62828', '#00838f']


def _svg_document(width: int, height: int, title: str, body: str) -> str:
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
        f'<style>{SVG_STYLE}</style>\n'
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>\n'
        f'<text class="title" x="{width / 2:.0f}" y="24" text-anchor="middle">{title}</text>\n'
        f'{body}</svg>\n'
    )


class ReportWriter:
    """Writes every artifact of a validation or comparison run into one directory."""

    def __init__(self, out_dir: str | Path):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def path(self, key: str) -> Path:
        return self.out_dir / OUTPUT_FILES[key]

    # Validation

    def report_frame(self, report: ValidationReport) -> pd.DataFrame:
        records = []
        for r in report.rows:
            records.append({
                'scenario_id': r.scenario_id,
                'mobility_class': r.mobility_class,
                'predicted': str(r.predicted) if r.predicted is not None else '',
                'actual': str(r.actual),
                'best': str(r.best),
                'tied': ' '.join(str(sf) for sf in r.tied),
                'pdr_at_predicted': r.pdr_at_predicted if r.pdr_at_predicted is not None else np.nan,
                'pdr_at_actual': r.pdr_at_actual,
                'infeasible': r.infeasible,
            })
        return pd.DataFrame(records, columns=REPORT_COLUMNS)

    def write_validation(self, report: ValidationReport, svg: bool = True) -> List[Path]:
        """
        Write report.csv, confusion.csv, summary.txt and optionally confusion.svg.

        Returns:
            Paths written
        """
        written = [self.path('report'), self.path('confusion'), self.path('summary')]
        self.report_frame(report).to_csv(written[0], index=False, float_format=FLOAT_FORMAT)
        self.write_confusion(report.confusion)
        self.write_summary(report.confusion, report.total_scenarios, report.infeasible, report.over_provisioned)
        if svg:
            written.append(self.write_confusion_svg(report.confusion))
        logger.info(f"Validation report written to {self.out_dir}")
        return written

    def write_confusion(self, confusion: ConfusionMatrix) -> Path:
        frame = pd.DataFrame(confusion.counts, index=SF_LABELS, columns=SF_LABELS)
        frame.index.name = 'predicted'
        frame.to_csv(self.path('confusion'))
        return self.path('confusion')

    def write_summary(self, confusion: ConfusionMatrix, total: int, infeasible: List[str],
                      over_provisioned: int = 0) -> Path:
        lines = [
            f"exact={confusion.exact_match_rate:.3f} within1={confusion.within_one_sf_rate:.3f}",
            f"total={total} scored={confusion.total} infeasible={len(infeasible)}",
            # tie-band hits above the lowest best SF; exact cannot see them
            f"over_provisioned={over_provisioned}",
            "predicted_histogram=" + ' '.join(
                f"{label}:{n}" for label, n in zip(SF_LABELS, confusion.predicted_histogram())),
            "actual_histogram=" + ' '.join(
                f"{label}:{n}" for label, n in zip(SF_LABELS, confusion.actual_histogram())),
        ]
        if infeasible:
            lines.append("infeasible_ids=" + ','.join(infeasible))
        self.path('summary').write_text('\n'.join(lines) + '\n', encoding='utf-8')
        return self.path('summary')

    def write_confusion_svg(self, confusion: ConfusionMatrix) -> Path:
        cell, left, top = 60, 90, 70
        size = cell * N_SF
        peak = max(int(confusion.counts.max()), 1)
        parts = []
        for i in range(N_SF):
            for j in range(N_SF):
                count = int(confusion.counts[i, j])
                shade = int(255 - 200 * count / peak)
                x, y = left + j * cell, top + i * cell
                parts.append(
                    f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                    f'fill="rgb({shade},{shade},255)" stroke="#999"/>\n'
                    f'<text class="cell" x="{x + cell / 2:.0f}" y="{y + cell / 2 + 4:.0f}">{count}</text>\n'
                )
            parts.append(
                f'<text class="axis" x="{left - 10}" y="{top + i * cell + cell / 2 + 4:.0f}" '
                f'text-anchor="end">{SF_LABELS[i]}</text>\n'
            )
        for j in range(N_SF):
            parts.append(
                f'<text class="axis" x="{left + j * cell + cell / 2:.0f}" y="{top - 8}" '
                f'text-anchor="middle">{SF_LABELS[j]}</text>\n'
            )
        parts.append(f'<text class="axis" x="{left + size / 2:.0f}" y="{top + size + 28}" '
                     f'text-anchor="middle">Actual best SF</text>\n')
        parts.append(f'<text class="axis" x="18" y="{top + size / 2:.0f}" text-anchor="middle" '
                     f'transform="rotate(-90 18 {top + size / 2:.0f})">Predicted SF</text>\n')
        title = (f"Predicted vs actual best SF (exact {confusion.exact_match_rate:.1%}, "
                 f"within one {confusion.within_one_sf_rate:.1%})")
        svg = _svg_document(left + size + 30, top + size + 45, title, ''.join(parts))
        self.path('confusion_svg').write_text(svg, encoding='utf-8')
        return self.path('confusion_svg')

    # Comparison

    def write_comparison(self, comparison: StaticDynamicComparison, svg: bool = True) -> List[Path]:
        written = [self.path('compare')]
        comparison.rows.to_csv(written[0], index=False, float_format=FLOAT_FORMAT)
        if svg and not comparison.by_class.empty:
            written.append(self.write_comparison_svg(comparison.by_class))
        return written

    def write_comparison_svg(self, by_class: pd.DataFrame) -> Path:
        left, top, plot_h, group_w, bar_w = 60, 50, 220, 120, 40
        parts = [f'<line x1="{left}" y1="{top + plot_h}" x2="{left + group_w * len(by_class) + 20}" '
                 f'y2="{top + plot_h}" stroke="#444"/>\n']
        for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
            y = top + plot_h * (1 - tick)
            parts.append(f'<text class="axis" x="{left - 6}" y="{y + 4:.0f}" text-anchor="end">{tick:.2f}</text>\n')
        for k, row in enumerate(by_class.itertuples(index=False)):
            x0 = left + 20 + k * group_w
            for m, (value, color) in enumerate(((row.pdr_static, SERIES_COLORS[0]),
                                                (row.pdr_dynamic, SERIES_COLORS[2]))):
                h = plot_h * float(value)
                x = x0 + m * bar_w
                parts.append(f'<rect x="{x}" y="{top + plot_h - h:.1f}" width="{bar_w - 4}" '
                             f'height="{h:.1f}" fill="{color}"/>\n')
                parts.append(f'<text class="cell" x="{x + bar_w / 2 - 2:.0f}" y="{top + plot_h - h - 4:.0f}">'
                             f'{float(value):.3f}</text>\n')
            parts.append(f'<text class="axis" x="{x0 + bar_w - 2}" y="{top + plot_h + 18}" '
                         f'text-anchor="middle">{row.mobility_class} ({row.scenarios})</text>\n')
        legend_y = top + plot_h + 40
        parts.append(f'<rect x="{left}" y="{legend_y}" width="12" height="12" fill="{SERIES_COLORS[0]}"/>'
                     f'<text class="legend" x="{left + 18}" y="{legend_y + 11}">planned fixed SF</text>\n')
        parts.append(f'<rect x="{left + 150}" y="{legend_y}" width="12" height="12" fill="{SERIES_COLORS[2]}"/>'
                     f'<text class="legend" x="{left + 168}" y="{legend_y + 11}">dynamic protocol</text>\n')
        width = left + 40 + group_w * max(len(by_class), 2)
        svg = _svg_document(width, legend_y + 30, "Mean PDR per mobility class", ''.join(parts))
        self.path('compare_svg').write_text(svg, encoding='utf-8')
        return self.path('compare_svg')

    # Distance sweep

    def write_sweep(self, sweep: pd.DataFrame, svg: bool = True) -> List[Path]:
        written = [self.path('sweep')]
        sweep.to_csv(written[0], index=False, float_format=FLOAT_FORMAT)
        if svg and not sweep.empty:
            written.append(self.write_sweep_svg(sweep))
        return written

    def write_sweep_svg(self, sweep: pd.DataFrame) -> Path:
        left, top, plot_w, plot_h = 60, 50, 480, 240
        d_min, d_max = float(sweep['distance'].min()), float(sweep['distance'].max())
        span = (d_max - d_min) or 1.0

        def xy(distance: float, pdr: float) -> str:
            return f"{left + plot_w * (distance - d_min) / span:.1f},{top + plot_h * (1 - pdr):.1f}"

        parts = [f'<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>\n']
        for k, (label, group) in enumerate(sweep.groupby('sf', sort=False)):
            color = SERIES_COLORS[k % len(SERIES_COLORS)]
            points = ' '.join(xy(d, p) for d, p in zip(group['distance'], group['pdr']))
            parts.append(f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="2"/>\n')
            parts.append(f'<text class="legend" x="{left + plot_w + 10}" y="{top + 14 + 16 * k}" '
                         f'fill="{color}">{label}</text>\n')
        parts.append(f'<text class="axis" x="{left}" y="{top + plot_h + 18}">{d_min:.0f} m</text>\n')
        parts.append(f'<text class="axis" x="{left + plot_w}" y="{top + plot_h + 18}" '
                     f'text-anchor="end">{d_max:.0f} m</text>\n')
        svg = _svg_document(left + plot_w + 70, top + plot_h + 40, "PDR vs distance per SF", ''.join(parts))
        self.path('sweep_svg').write_text(svg, encoding='utf-8')
        return self.path('sweep_svg')

    # Rebuild from files

    def rebuild_from_csv(self, svg: bool = True) -> Dict[str, object]:
        """
        Recreate summary.txt and confusion.svg from an existing report.csv.

        Raises:
            FileNotFoundError: If report.csv is missing
        """
        frame = pd.read_csv(self.path('report'), dtype=str, keep_default_na=False)
        infeasible_mask = frame['infeasible'].str.lower() == 'true'
        scored = frame[~infeasible_mask]
        pairs = [(SpreadingFactor.parse(p), SpreadingFactor.parse(a))
                 for p, a in zip(scored['predicted'], scored['actual'])]
        confusion = confusion_matrix(pairs) if pairs else ConfusionMatrix(np.zeros((N_SF, N_SF), dtype=int))
        infeasible = frame.loc[infeasible_mask, 'scenario_id'].tolist()
        over_provisioned = sum(SpreadingFactor.parse(p) > SpreadingFactor.parse(b)
                               for p, b in zip(scored['predicted'], scored['best']))
        self.write_confusion(confusion)
        self.write_summary(confusion, len(frame), infeasible, over_provisioned)
        if svg:
            self.write_confusion_svg(confusion)
        compare_path = self.path('compare')
        if svg and compare_path.exists():
            rows = pd.read_csv(compare_path)
            if not rows.empty:
                self.write_comparison_svg(class_summary(rows))
        return {'confusion': confusion, 'total': len(frame), 'infeasible': infeasible}


def read_summary(path: str | Path) -> Optional[str]:
    path = Path(path)
    if not path.exists():
        return None
    return path.read_text(encoding='utf-8').splitlines()[0]
