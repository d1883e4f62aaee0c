"""
Constants, lookup tables and CLI text for the SF planner
"""

SPREADING_FACTORS = (7, 8, 9, 10, 11, 12)

SPEED_OF_LIGHT = 299_792_458.0  # m/s

# Low-data-rate optimization is mandatory above this symbol duration (seconds)
LDRO_SYMBOL_THRESHOLD = 0.016

MAX_PAYLOAD_BYTES = 255

# Receiver sensitivity floor (dBm) per bandwidth (Hz) and SF, SX1276 class radios
SENSITIVITY_TABLE = {
    125_000: {7: -123.0, 8: -126.0, 9: -129.0, 10: -132.0, 11: -134.5, 12: -137.0},
    250_000: {7: -122.0, 8: -125.0, 9: -128.0, 10: -130.0, 11: -132.0, 12: -135.0},
    500_000: {7: -116.0, 8: -119.0, 9: -122.0, 10: -125.0, 11: -128.0, 12: -129.0},
}

# Supply current (mA) drawn in TX mode per programmed output power (dBm)
TX_CURRENT_TABLE = {
    -2: 22.0, -1: 22.0, 0: 22.0, 1: 23.0, 2: 24.0, 3: 24.0, 4: 24.0, 5: 25.0,
    6: 25.0, 7: 25.0, 8: 25.0, 9: 26.0, 10: 31.0, 11: 32.0, 12: 34.0, 13: 35.0,
    14: 44.0, 15: 82.0, 16: 85.0, 17: 90.0, 18: 105.0, 19: 115.0, 20: 125.0,
}

# Radio defaults (433 MHz single-channel gateway)
RADIO_DEFAULTS = {
    'carrier_frequency': 433.175e6,  # first channel inside the 433 MHz SRD band
    'bandwidth': 125_000.0,
    'coding_rate': 5,
    'preamble_symbols': 8,
    'tx_power': 10.0,
    'system_loss': 43.1,  # lumped feeder/body/polarisation loss, calibrated
    'supply_voltage': 3.3,
}

# Line-of-sight environment variants: exponent and shadowing sigma (dB).
# Reference loss at 1 m is free-space loss at the carrier.
ENVIRONMENT_PRESETS = {
    'open-los': {'path_loss_exponent': 2.0, 'shadowing_sigma': 3.0},
    'semi-rural-los': {'path_loss_exponent': 2.05, 'shadowing_sigma': 3.0},
    'coastal-los': {'path_loss_exponent': 2.0, 'shadowing_sigma': 2.5},
    'obstructed-los': {'path_loss_exponent': 2.10, 'shadowing_sigma': 3.5},
}
DEFAULT_ENVIRONMENT = 'open-los'

# Regulatory profiles (ERC/REC 70-03 short range devices)
REGION_PROFILES = {
    'ism433': {
        'duty_cycle_limit': 0.10,
        'max_tx_power': 10.0,
        'allowed_band': (433.05e6, 434.79e6),
    },
    'ism433-strict': {
        'duty_cycle_limit': 0.01,
        'max_tx_power': 10.0,
        'allowed_band': (433.05e6, 434.79e6),
    },
    'eu868': {
        'duty_cycle_limit': 0.01,
        'max_tx_power': 14.0,
        'allowed_band': (863e6, 870e6),
    },
}
DEFAULT_REGION = 'ism433'

# Carrier used when a region is picked and the configured one lies outside its band
REGION_CARRIERS = {
    'ism433': 433.175e6,
    'ism433-strict': 433.175e6,
    'eu868': 868.1e6,
}

# Phase-2 weight presets: (toa, energy, data_rate, link_margin)
WEIGHT_PRESETS = {
    'balanced': (0.3, 0.3, 0.2, 0.2),
    'reliability': (0.1, 0.1, 0.2, 0.6),
    'battery': (0.35, 0.45, 0.1, 0.1),
    'throughput': (0.3, 0.1, 0.5, 0.1),
}

DEFAULT_FADE_MARGIN = 10.0  # dB
DEFAULT_SEED = 42
DEFAULT_PACKETS = 1000
DEFAULT_TIE_TOLERANCE = 0.005
# Half a pass (seconds) at speed sets a mobile scenario's excursion
DEFAULT_PASS_HALF_DURATION = 11.0

# Mobility class boundaries (m/s): static < 0.5 <= low < 5 <= moderate < 10 <= high
MOBILITY_THRESHOLDS = {
    'static': 0.5,
    'low': 5.0,
    'moderate': 10.0,
}

# Default validation grid
GRID_DISTANCE_RANGE = (100.0, 1800.0)
GRID_DISTANCE_COUNT = 14
GRID_SPEEDS = (0.0, 5.0, 10.0, 20.0)
GRID_ENVIRONMENTS = ('open-los', 'semi-rural-los', 'coastal-los', 'obstructed-los')
TRAFFIC_PROFILES = {
    'light': {'payload_bytes': 10, 'packets_per_hour': 12.0, 'required_throughput': None},
    'nominal': {'payload_bytes': 20, 'packets_per_hour': 60.0, 'required_throughput': None},
    'heavy': {'payload_bytes': 50, 'packets_per_hour': 240.0, 'required_throughput': 200.0},
}

# Output file names
OUTPUT_FILES = {
    'scenarios': 'scenarios.csv',
    'report': 'report.csv',
    'confusion': 'confusion.csv',
    'summary': 'summary.txt',
    'simulate': 'simulate.csv',
    'compare': 'compare.csv',
    'sweep': 'pdr_distance.csv',
    'confusion_svg': 'confusion.svg',
    'compare_svg': 'pdr_compare.svg',
    'sweep_svg': 'pdr_distance.svg',
    'selection_json': 'selection.json',
}

# CLI messages
MESSAGES = {
    "no_feasible": (
        "No spreading factor satisfies every rule for this scenario.\n"
        "Try --relaxed to ignore the data-rate rule, or lower the traffic load."
    ),
    "empty_compare": "No mobile scenarios in the selected subset; comparison table is empty.",
    "missing_scenario": "Either --scenario FILE or --distance is required.",
    "report_missing": "report.csv not found in {out_dir}; run 'validate' first.",
    "interrupted": "Interrupted by user",
}

# Exit codes
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_NO_FEASIBLE = 3
EXIT_INTERRUPTED = 130
