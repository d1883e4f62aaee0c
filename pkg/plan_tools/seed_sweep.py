#!/usr/bin/env python3
"""
Repeat the validation over several base seeds and report how stable the
match rates are.

Usage:
    python plan_tools/seed_sweep.py scenarios.csv
    python plan_tools/seed_sweep.py scenarios.csv 1 2 3 4 5
    python plan_tools/seed_sweep.py --default-grid 42 43 44
"""

import sys
from pathlib import Path

import pandas as pd

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config import Config, load_app_config
from sfPlanner.errors import PlannerError
from sfPlanner.evaluator import validate
from sfPlanner.scenarios import generate_grid, load_scenarios


def sweep_seeds(source, seeds):
    app = load_app_config(Config.CONFIG_PATH)
    if source == '--default-grid':
        specs = generate_grid(app.grid, seed=seeds[0], region=app.region,
                              carrier_frequency=app.radio.carrier_frequency,
                              pass_half_duration=app.simulator.pass_half_duration)
    else:
        specs = load_scenarios(source)

    print(f"📊 {len(specs)} scenarios, seeds: {', '.join(map(str, seeds))}")
    rows = []
    for seed in seeds:
        report = validate(
            specs, app.radio, app.weights, seed=seed,
            n_packets=app.simulator.n_packets,
            fade_margin=app.selector.fade_margin,
            tie_tolerance=app.simulator.tie_tolerance,
            shadowing_sigma=app.simulator.shadowing_sigma,
            horizon=app.simulator.horizon,
            jobs=max(1, Config.JOBS),
        )
        rows.append({
            'seed': seed,
            'exact': report.exact_match_rate,
            'within1': report.within_one_sf_rate,
            'infeasible': report.infeasible_count,
        })
        print(f"  seed={seed:<6} {report.summary_line()}")

    frame = pd.DataFrame(rows)
    print("-" * 50)
    print(f"exact   mean={frame['exact'].mean():.3f} min={frame['exact'].min():.3f} max={frame['exact'].max():.3f}")
    print(f"within1 mean={frame['within1'].mean():.3f} min={frame['within1'].min():.3f} "
          f"max={frame['within1'].max():.3f}")
    return frame


def main():
    if len(sys.argv) < 2:
        print(__doc__)
        sys.exit(1)

    source = sys.argv[1]
    if source != '--default-grid' and not Path(source).exists():
        print(f"❌ File not found: {source}")
        sys.exit(1)

    try:
        seeds = [int(s) for s in sys.argv[2:]] or [42, 43, 44]
    except ValueError:
        print("❌ Seeds must be integers")
        sys.exit(1)

    try:
        sweep_seeds(source, seeds)
    except PlannerError as e:
        print(f"❌ Error: {e}")
        sys.exit(1)
    except KeyboardInterrupt:
        print("\nInterrupted")
        sys.exit(130)


if __name__ == "__main__":
    main()
