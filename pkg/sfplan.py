#!/usr/bin/env python3
"""
sfplan - plan the spreading factor of a single-channel mobile LoRa gateway
and check the plan against a seeded link simulator.

Usage:
    python sfplan.py select --distance 500 --speed 5 --payload 20 --rate 60
    python sfplan.py simulate --distance 1500 --sf all
    python sfplan.py generate --default-grid --out scenarios.csv
    python sfplan.py validate --scenarios scenarios.csv --out-dir results
    python sfplan.py compare --scenarios scenarios.csv --out-dir results
    python sfplan.py report --out-dir results
    python sfplan.py sweep --environment open-los --out-dir results
"""

import argparse
import json
import logging
import sys
from logging.handlers import TimedRotatingFileHandler
from pathlib import Path
from typing import List, Optional

import numpy as np

from config import AppConfig, Config, load_app_config, resolve_seed
from constants import (
    ENVIRONMENT_PRESETS,
    EXIT_ERROR,
    EXIT_INTERRUPTED,
    EXIT_NO_FEASIBLE,
    EXIT_OK,
    MESSAGES,
    OUTPUT_FILES,
    REGION_CARRIERS,
    REGION_PROFILES,
    WEIGHT_PRESETS,
)
from sfPlanner.errors import NoFeasibleSFError, PlannerError, ScenarioParseError
from sfPlanner.evaluator import compare_static_vs_dynamic, validate
from sfPlanner.linksim import (
    brute_force_best_sf,
    derive_seed,
    fixed_trace,
    linear_pass,
    out_and_back,
    outcomes_frame,
    pdr_distance_sweep,
    simulate_link,
    trace_for_scenario,
    transmission_schedule,
)
from sfPlanner.phy import EnvironmentModel, SpreadingFactor, free_space_loss
from sfPlanner.reports import ReportWriter
from sfPlanner.scenarios import ScenarioLoader, generate_grid, load_scenarios, save_scenarios
from sfPlanner.selector import MobilityClass, RegionProfile, ScenarioSpec, ScoreWeights, select_sf

logger = logging.getLogger(__name__)


def quick_log_setup(level: str = 'INFO', log_file: Optional[str] = None) -> None:
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_file:
        # Rotate daily, keep a week
        handlers.append(TimedRotatingFileHandler(
            log_file,
            when='midnight',
            interval=1,
            backupCount=7,
            encoding='utf-8'
        ))

    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format='%(asctime)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


# Settings

def _app_config(args) -> AppConfig:
    """Planner config from --config (or SFPLAN_CONFIG) with flag overrides applied."""
    app = load_app_config(args.config or Config.CONFIG_PATH)
    overrides = {
        'simulator.n_packets': getattr(args, 'packets', None),
        'simulator.shadowing_sigma': getattr(args, 'shadowing', None),
        'simulator.tie_tolerance': getattr(args, 'tie_tolerance', None),
        'selector.fade_margin': getattr(args, 'fade_margin', None),
    }
    carrier = app.radio.carrier_frequency
    if getattr(args, 'region', None):
        region = RegionProfile.preset(args.region)
        overrides['region'] = region.model_dump(mode='json')
        low, high = region.allowed_band
        if not low <= carrier <= high:
            carrier = REGION_CARRIERS[args.region]
            logger.info(f"Carrier retuned to {carrier / 1e6:.3f} MHz for region {args.region}")
            overrides['radio.carrier_frequency'] = carrier
            overrides['environment.reference_loss_1m'] = free_space_loss(1.0, carrier)
    if getattr(args, 'environment', None):
        env = EnvironmentModel.preset(args.environment, carrier)
        overrides['environment'] = env.model_dump(mode='json')
    if getattr(args, 'weights', None):
        overrides['weights'] = ScoreWeights.preset(args.weights).model_dump(mode='json')
    return app.with_overrides(overrides)


def _jobs(args) -> int:
    return max(1, args.jobs if args.jobs is not None else Config.JOBS)


def _scenarios_from_args(args, app: AppConfig) -> List[ScenarioSpec]:
    if getattr(args, 'scenario', None):
        return ScenarioLoader.load(args.scenario)
    if args.distance is None:
        args.parser.error(MESSAGES['missing_scenario'])

    excursion = args.excursion
    if excursion is None:
        excursion = args.speed * app.simulator.pass_half_duration
    try:
        spec = ScenarioSpec(
            scenario_id='cli',
            distance=args.distance,
            speed=args.speed,
            excursion=excursion,
            payload_bytes=args.payload,
            packets_per_hour=args.rate,
            required_throughput=args.throughput,
            environment=app.environment,
            region=app.region,
        )
    except ValueError as e:
        raise ScenarioParseError(str(e)) from e
    return [spec]


def _grid_specs(app: AppConfig, seed: int) -> List[ScenarioSpec]:
    return generate_grid(app.grid, seed, app.region, app.radio.carrier_frequency,
                         app.simulator.pass_half_duration)


# Commands

def _print_selection(result) -> None:
    print(f"{'SF':<5} {'ToA ms':>9} {'Rate bps':>9} {'Energy J/h':>11} {'Margin dB':>10} "
          f"{'Range m':>9} {'Air s/h':>8} {'Score':>6}  Status")
    for e in result.evaluations:
        score = result.scores.get(e.sf)
        status = ', '.join(r.value for r in e.exclusion_reasons) if e.excluded else 'ok'
        print(f"{str(e.sf):<5} {e.toa * 1000:>9.3f} {e.data_rate:>9.1f} {e.energy:>11.4f} "
              f"{e.link_margin:>10.2f} {e.reliable_range:>9.1f} {e.hourly_airtime:>8.2f} "
              f"{(f'{score.total:.3f}' if score else '-'):>6}  {status}")
    print()
    for line in result.decision_trace:
        print(f"  {line}")
    print()
    print(f"Selected: {result.chosen}{' (relaxed)' if result.relaxed else ''}")


def cmd_select(args) -> int:
    """Run the two-phase selection for one scenario (or each one in a file)"""
    app = _app_config(args)
    results = []
    for spec in _scenarios_from_args(args, app):
        try:
            result = select_sf(spec, app.radio, app.weights, app.selector.fade_margin, relaxed=args.relaxed)
        except NoFeasibleSFError as e:
            print(f"{spec.scenario_id}: {e}")
            print(MESSAGES['no_feasible'])
            return EXIT_NO_FEASIBLE
        _print_selection(result)
        results.append(result)

    if args.json:
        payload = results[0].to_dict() if len(results) == 1 else [r.to_dict() for r in results]
        path = Path(args.json)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2) + '\n', encoding='utf-8')
        print(f"JSON written to {path}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    """Simulate one scenario at one SF or at all six"""
    app = _app_config(args)
    seed = resolve_seed(args.seed, app)
    spec = _scenarios_from_args(args, app)[0]
    n_packets = app.simulator.n_packets
    _, _, horizon = transmission_schedule(n_packets, spec.packets_per_hour, app.simulator.horizon)

    if args.trace == 'auto':
        trace = trace_for_scenario(spec, horizon)
    elif args.trace == 'fixed':
        trace = fixed_trace(spec.distance, horizon)
    elif args.trace == 'linear-pass':
        start = args.start if args.start is not None else spec.min_distance
        end = args.end if args.end is not None else spec.planning_distance
        trace = linear_pass(start, end, spec.speed, horizon)
    else:
        trace = out_and_back(spec.min_distance, spec.planning_distance, spec.speed, horizon)

    sigma = app.simulator.shadowing_sigma
    if args.sf == 'all':
        best, outcomes = brute_force_best_sf(spec, app.radio, trace, seed, n_packets, sigma, app.simulator.horizon)
    else:
        sf = SpreadingFactor.parse(args.sf)
        outcomes = [simulate_link(spec, sf, app.radio, trace, derive_seed(seed, int(sf)),
                                  n_packets, sigma, app.simulator.horizon)]
        best = sf

    frame = outcomes_frame(outcomes)
    print(frame[['sf', 'sent', 'delivered', 'pdr', 'airtime']].to_string(index=False, float_format='%.4f'))
    if args.sf == 'all':
        print(f"\nBest: {best}")

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / OUTPUT_FILES['simulate']
    frame.to_csv(path, index=False, float_format='%.6f')
    logger.info(f"Simulation results written to {path}")
    return EXIT_OK


def cmd_generate(args) -> int:
    """Generate the validation scenario grid"""
    app = _app_config(args)
    seed = resolve_seed(args.seed, app)
    grid = app.grid if not args.default_grid else type(app.grid)()
    updates = {}
    if args.distances:
        updates['distances'] = args.distances
    if args.speeds:
        updates['speeds'] = args.speeds
    if args.environments:
        updates['environments'] = args.environments
    if updates:
        grid = type(grid).model_validate({**grid.model_dump(), **updates})

    specs = generate_grid(grid, seed, app.region, app.radio.carrier_frequency, app.simulator.pass_half_duration)
    out = Path(args.out) if args.out else Path(args.out_dir) / OUTPUT_FILES['scenarios']
    save_scenarios(specs, out)
    print(f"{len(specs)} scenarios written to {out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    """Predicted vs brute-force best SF over a scenario set"""
    app = _app_config(args)
    seed = resolve_seed(args.seed, app)
    specs = load_scenarios(args.scenarios) if args.scenarios else _grid_specs(app, seed)

    report = validate(
        specs, app.radio, app.weights, seed,
        n_packets=app.simulator.n_packets,
        fade_margin=app.selector.fade_margin,
        tie_tolerance=app.simulator.tie_tolerance,
        shadowing_sigma=app.simulator.shadowing_sigma,
        horizon=app.simulator.horizon,
        jobs=_jobs(args),
        progress=args.progress,
    )
    ReportWriter(args.out_dir).write_validation(report, svg=not args.no_svg)

    print(report.summary_line())
    print(f"total={report.total_scenarios} infeasible={report.infeasible_count}")
    if report.infeasible:
        print(f"infeasible: {', '.join(report.infeasible)}")
    return EXIT_OK


def cmd_compare(args) -> int:
    """Planned fixed SF vs the dynamic protocol, per mobility class"""
    app = _app_config(args)
    seed = resolve_seed(args.seed, app)
    specs = load_scenarios(args.scenarios) if args.scenarios else _grid_specs(app, seed)

    comparison = compare_static_vs_dynamic(
        specs, app.radio, app.weights, app.dynamic, seed,
        n_packets=app.simulator.n_packets,
        fade_margin=app.selector.fade_margin,
        min_class=MobilityClass(args.min_class),
        shadowing_sigma=app.simulator.shadowing_sigma,
        horizon=app.simulator.horizon,
        jobs=_jobs(args),
        progress=args.progress,
    )
    ReportWriter(args.out_dir).write_comparison(comparison, svg=not args.no_svg)

    if comparison.notice:
        print(comparison.notice)
        return EXIT_OK
    print(comparison.by_class.to_string(index=False, float_format='%.4f'))
    if comparison.skipped:
        print(f"skipped (infeasible): {len(comparison.skipped)}")
    return EXIT_OK


def cmd_report(args) -> int:
    """Rebuild summary.txt and SVGs from an existing report.csv"""
    writer = ReportWriter(args.out_dir)
    if not writer.path('report').exists():
        print(MESSAGES['report_missing'].format(out_dir=args.out_dir))
        return EXIT_ERROR
    rebuilt = writer.rebuild_from_csv(svg=not args.no_svg)
    confusion = rebuilt['confusion']
    print(f"exact={confusion.exact_match_rate:.3f} within1={confusion.within_one_sf_rate:.3f}")
    print(f"total={rebuilt['total']} infeasible={len(rebuilt['infeasible'])}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    """PDR vs distance for each SF at fixed distances"""
    app = _app_config(args)
    seed = resolve_seed(args.seed, app)
    distances = args.distances or np.arange(100.0, 1801.0, 100.0).tolist()
    sfs = [SpreadingFactor.parse(s) for s in args.sfs] if args.sfs else list(SpreadingFactor)
    base = ScenarioSpec(
        scenario_id='sweep',
        distance=distances[0],
        payload_bytes=args.payload,
        packets_per_hour=args.rate,
        environment=app.environment,
        region=app.region,
    )
    sweep = pdr_distance_sweep(base, app.radio, distances, seed, app.simulator.n_packets, sfs)
    ReportWriter(args.out_dir).write_sweep(sweep, svg=not args.no_svg)
    table = sweep.pivot(index='distance', columns='sf', values='pdr')[[str(sf) for sf in sfs]]
    print(table.to_string(float_format='%.3f'))
    return EXIT_OK


# Parser

def _add_scenario_flags(parser: argparse.ArgumentParser, allow_file: bool = True) -> None:
    if allow_file:
        parser.add_argument('--scenario', help='Scenario file (key-value, JSON or CSV)')
    parser.add_argument('--distance', type=float, help='Target distance in metres')
    parser.add_argument('--speed', type=float, default=0.0, help='Gateway speed in m/s (default: 0)')
    parser.add_argument('--excursion', type=float,
                        help='Metres travelled either side of the target (default: speed x pass half-duration)')
    parser.add_argument('--payload', type=int, default=20, help='Payload bytes (default: 20)')
    parser.add_argument('--rate', type=float, default=60.0, help='Packets per hour (default: 60)')
    parser.add_argument('--throughput', type=float, help='Required data rate in bit/s')


def _add_settings_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--environment', choices=sorted(ENVIRONMENT_PRESETS), help='Environment preset')
    parser.add_argument('--region', choices=sorted(REGION_PROFILES), help='Regulatory profile')
    parser.add_argument('--weights', choices=sorted(WEIGHT_PRESETS), help='Phase-2 weight preset')
    parser.add_argument('--fade-margin', type=float, help='Required link margin in dB')


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--packets', type=int, help='Packets per simulated run')
    parser.add_argument('--shadowing', type=float, help='Override shadowing sigma (dB)')


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='Planner config file (key-value or JSON)')
    common.add_argument('--seed', type=int, help='Random seed (fallback: config, SFPLAN_SEED, 42)')
    common.add_argument('--out-dir', default='.', help='Directory for output files (default: .)')
    common.add_argument('--jobs', type=int, help='Worker processes (default: SFPLAN_JOBS or 1)')
    common.add_argument('--log-level', default=None, help='Logging level (default: SFPLAN_LOG_LEVEL or INFO)')
    common.add_argument('--log-file', default=None, help='Also log to a daily rotating file')

    parser = argparse.ArgumentParser(
        prog='sfplan',
        description='Optimum spreading factor planning for single-channel mobile LoRa gateways',
    )
    subparsers = parser.add_subparsers(dest='command', required=True)

    p = subparsers.add_parser('select', parents=[common], help='Select the optimum SF for a scenario')
    _add_scenario_flags(p)
    _add_settings_flags(p)
    p.add_argument('--relaxed', action='store_true',
                   help='If nothing is feasible, ignore the data-rate rule and take the largest margin')
    p.add_argument('--json', metavar='PATH', help='Also write the selection result as JSON')
    p.set_defaults(handler=cmd_select, parser=p)

    p = subparsers.add_parser('simulate', parents=[common], help='Simulate packet delivery for a scenario')
    _add_scenario_flags(p)
    _add_settings_flags(p)
    _add_run_flags(p)
    p.add_argument('--sf', default='all', help="SF7..SF12 or 'all' (default: all)")
    p.add_argument('--trace', choices=['auto', 'fixed', 'linear-pass', 'out-and-back'], default='auto',
                   help='Mobility trace (default: fixed when parked, linear pass when moving)')
    p.add_argument('--start', type=float, help='Linear pass start distance (m)')
    p.add_argument('--end', type=float, help='Linear pass end distance (m)')
    p.set_defaults(handler=cmd_simulate, parser=p)

    p = subparsers.add_parser('generate', parents=[common], help='Generate the validation scenario grid')
    p.add_argument('--default-grid', action='store_true', help='Use the built-in 672-scenario grid')
    p.add_argument('--distances', type=float, nargs='+', help='Override distance axis (m)')
    p.add_argument('--speeds', type=float, nargs='+', help='Override speed axis (m/s)')
    p.add_argument('--environments', nargs='+', choices=sorted(ENVIRONMENT_PRESETS), help='Override environments')
    p.add_argument('--region', choices=sorted(REGION_PROFILES), help='Regulatory profile')
    p.add_argument('--out', help='Output CSV (default: <out-dir>/scenarios.csv)')
    p.set_defaults(handler=cmd_generate, parser=p)

    p = subparsers.add_parser('validate', parents=[common], help='Compare predictions with brute-force simulation')
    p.add_argument('--scenarios', help='Scenario CSV (default: generate the configured grid)')
    _add_settings_flags(p)
    _add_run_flags(p)
    p.add_argument('--tie-tolerance', type=float, help='PDR difference treated as a tie (default: 0.005)')
    p.add_argument('--no-svg', action='store_true', help='Skip confusion.svg')
    p.add_argument('--progress', action='store_true', help='Show a progress bar')
    p.set_defaults(handler=cmd_validate, parser=p)

    p = subparsers.add_parser('compare', parents=[common], help='Planned fixed SF vs dynamic protocol')
    p.add_argument('--scenarios', help='Scenario CSV (default: generate the configured grid)')
    _add_settings_flags(p)
    _add_run_flags(p)
    p.add_argument('--min-class', choices=[c.value for c in MobilityClass], default='moderate',
                   help='Lowest mobility class compared (default: moderate)')
    p.add_argument('--no-svg', action='store_true', help='Skip pdr_compare.svg')
    p.add_argument('--progress', action='store_true', help='Show a progress bar')
    p.set_defaults(handler=cmd_compare, parser=p)

    p = subparsers.add_parser('report', parents=[common], help='Rebuild summary and SVGs from report.csv')
    p.add_argument('--no-svg', action='store_true', help='Only rewrite summary.txt and confusion.csv')
    p.set_defaults(handler=cmd_report, parser=p)

    p = subparsers.add_parser('sweep', parents=[common], help='PDR vs distance per SF')
    _add_settings_flags(p)
    _add_run_flags(p)
    p.add_argument('--distances', type=float, nargs='+', help='Distances in m (default: 100..1800 step 100)')
    p.add_argument('--sfs', nargs='+', help='SFs to sweep (default: all)')
    p.add_argument('--payload', type=int, default=20, help='Payload bytes (default: 20)')
    p.add_argument('--rate', type=float, default=60.0, help='Packets per hour (default: 60)')
    p.add_argument('--no-svg', action='store_true', help='Skip pdr_distance.svg')
    p.set_defaults(handler=cmd_sweep, parser=p)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments and run one command"""
    args = build_parser().parse_args(argv)
    quick_log_setup(args.log_level or Config.LOG_LEVEL, args.log_file or Config.LOG_FILE)

    try:
        Config.validate()
        return args.handler(args)
    except KeyboardInterrupt:
        logger.info(MESSAGES['interrupted'])
        return EXIT_INTERRUPTED
    except NoFeasibleSFError as e:
        logger.error(str(e))
        return EXIT_NO_FEASIBLE
    except PlannerError as e:
        logger.error(str(e))
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as e:
        logger.error(f"Command '{args.command}' failed: {e}", exc_info=True)
        return EXIT_ERROR
    finally:
        logger.debug(f"sfplan {args.command} finished")


if __name__ == '__main__':
    sys.exit(main())
