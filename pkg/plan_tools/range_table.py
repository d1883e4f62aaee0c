#!/usr/bin/env python3
"""
Print per-SF reliable range, time on air and hourly energy for each
environment preset under the current planner config.

Usage:
    python plan_tools/range_table.py
    python plan_tools/range_table.py planner.cfg
    python plan_tools/range_table.py planner.cfg 20
"""

import sys
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config import Config, load_app_config
from constants import ENVIRONMENT_PRESETS
from sfPlanner.errors import PlannerError
from sfPlanner.phy import EnvironmentModel, SpreadingFactor, energy_per_hour, range_table, time_on_air


def show_ranges(config_path=None, payload_bytes=20):
    app = load_app_config(config_path or Config.CONFIG_PATH)
    radio = app.radio
    fade_margin = app.selector.fade_margin

    print("=" * 70)
    print(f"  RELIABLE RANGE (m), fade margin {fade_margin:g} dB, {radio.tx_power:g} dBm")
    print("=" * 70)
    header = f"{'environment':<16}" + ''.join(f"{str(sf):>9}" for sf in SpreadingFactor)
    print(header)
    for label in ENVIRONMENT_PRESETS:
        env = EnvironmentModel.preset(label, radio.carrier_frequency)
        ranges = range_table(radio, env, fade_margin)
        print(f"{label:<16}" + ''.join(f"{ranges[sf]:>9.0f}" for sf in SpreadingFactor))

    print()
    print(f"Time on air and energy for a {payload_bytes} B payload at 60 packets/h")
    print("-" * 70)
    for sf in SpreadingFactor:
        toa = time_on_air(sf, radio, payload_bytes)
        energy = energy_per_hour(sf, radio, payload_bytes, 60.0)
        print(f"  {str(sf):<5} toa={toa * 1000:8.1f} ms  energy={energy:8.3f} J/h")


def main():
    config_path = sys.argv[1] if len(sys.argv) > 1 else None
    try:
        payload = int(sys.argv[2]) if len(sys.argv) > 2 else 20
    except ValueError:
        print(f"❌ Payload must be an integer, got: {sys.argv[2]}")
        sys.exit(1)

    try:
        show_ranges(config_path, payload)
    except PlannerError as e:
        print(f"❌ Error: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
