"""
Scenario grid generation and scenario persistence.

Scenarios are stored one per row in a flat CSV whose columns cover every
ScenarioSpec field (environment and region are flattened). A single
scenario can also be written as a key-value text file or JSON.
"""

import itertools
import json
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional

import numpy as np
import pandas as pd
from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from constants import (
    DEFAULT_PASS_HALF_DURATION,
    GRID_DISTANCE_COUNT,
    GRID_DISTANCE_RANGE,
    GRID_ENVIRONMENTS,
    GRID_SPEEDS,
    RADIO_DEFAULTS,
    TRAFFIC_PROFILES,
)
from sfPlanner.errors import InvalidConfigError, InvalidGridError, ScenarioParseError
from sfPlanner.linksim.simulator import derive_seed
from sfPlanner.phy import EnvironmentModel
from sfPlanner.selector import RegionProfile, ScenarioSpec

logger = logging.getLogger(__name__)

SCENARIO_COLUMNS = [
    'scenario_id', 'distance', 'speed', 'excursion', 'payload_bytes', 'packets_per_hour',
    'required_throughput', 'environment', 'path_loss_exponent', 'reference_loss_1m',
    'shadowing_sigma', 'region', 'duty_cycle_limit', 'max_tx_power', 'band_low', 'band_high',
    'seed', 'mobility_class',
]

# pydantic error locations -> CSV column
_COLUMN_FOR_LOC = {
    ('environment', 'class_label'): 'environment',
    ('environment', 'path_loss_exponent'): 'path_loss_exponent',
    ('environment', 'reference_loss_1m'): 'reference_loss_1m',
    ('environment', 'shadowing_sigma'): 'shadowing_sigma',
    ('region', 'name'): 'region',
    ('region', 'duty_cycle_limit'): 'duty_cycle_limit',
    ('region', 'max_tx_power'): 'max_tx_power',
    ('region', 'allowed_band'): 'band_low',
}


def default_distances() -> List[float]:
    low, high = GRID_DISTANCE_RANGE
    return [round(float(d), 1) for d in np.linspace(low, high, GRID_DISTANCE_COUNT)]


class TrafficProfile(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str = 'nominal'
    payload_bytes: int = Field(20, ge=1, le=255)
    packets_per_hour: float = Field(60.0, ge=1)
    required_throughput: Optional[float] = Field(None, gt=0)


def default_traffic() -> List[TrafficProfile]:
    return [TrafficProfile(name=name, **values) for name, values in TRAFFIC_PROFILES.items()]


class ScenarioGrid(BaseModel):
    """Axes of the validation grid; the scenario set is their product."""
    model_config = ConfigDict(frozen=True)

    distances: List[float] = Field(default_factory=default_distances)
    speeds: List[float] = Field(default_factory=lambda: list(GRID_SPEEDS))
    environments: List[str] = Field(default_factory=lambda: list(GRID_ENVIRONMENTS))
    traffic_profiles: List[TrafficProfile] = Field(default_factory=default_traffic)

    @property
    def size(self) -> int:
        return len(self.distances) * len(self.speeds) * len(self.environments) * len(self.traffic_profiles)


def generate_grid(grid: ScenarioGrid, seed: int, region: Optional[RegionProfile] = None,
                  carrier_frequency: float = RADIO_DEFAULTS['carrier_frequency'],
                  pass_half_duration: float = DEFAULT_PASS_HALF_DURATION) -> List[ScenarioSpec]:
    """
    Enumerate the grid in (distance, speed, environment, traffic) order.

    Args:
        grid: Grid axes
        seed: Base seed; each scenario gets its own derived seed
        region: Regulatory profile for every scenario (default profile if None)
        carrier_frequency: Carrier used for the environments' reference loss
        pass_half_duration: Seconds of travel either side of the target distance

    Returns:
        ScenarioSpecs with ids S0001, S0002, ...

    Raises:
        InvalidGridError: If an axis is empty or names an unknown environment
    """
    axes = {
        'distances': grid.distances,
        'speeds': grid.speeds,
        'environments': grid.environments,
        'traffic_profiles': grid.traffic_profiles,
    }
    empty = [name for name, values in axes.items() if not values]
    if empty:
        raise InvalidGridError(f"Grid axis empty: {', '.join(empty)}")

    region = region or RegionProfile.preset()
    try:
        environments = {label: EnvironmentModel.preset(label, carrier_frequency) for label in grid.environments}
    except InvalidConfigError as e:
        raise InvalidGridError(str(e)) from e

    width = max(4, len(str(grid.size)))
    specs = []
    combos = itertools.product(grid.distances, grid.speeds, grid.environments, grid.traffic_profiles)
    for index, (distance, speed, label, traffic) in enumerate(combos, start=1):
        specs.append(ScenarioSpec(
            scenario_id=f"S{index:0{width}d}",
            distance=distance,
            speed=speed,
            excursion=speed * pass_half_duration,
            payload_bytes=traffic.payload_bytes,
            packets_per_hour=traffic.packets_per_hour,
            required_throughput=traffic.required_throughput,
            environment=environments[label],
            region=region,
            seed=derive_seed(seed, index),
        ))

    logger.info(f"Generated {len(specs)} scenarios")
    return specs


def _fmt(value) -> str:
    if value is None:
        return ''
    if isinstance(value, float):
        return repr(value)
    return str(value)


def spec_to_record(spec: ScenarioSpec) -> Dict[str, str]:
    env = spec.environment
    region = spec.region
    low, high = region.allowed_band
    values = {
        'scenario_id': spec.scenario_id,
        'distance': spec.distance,
        'speed': spec.speed,
        'excursion': spec.excursion,
        'payload_bytes': spec.payload_bytes,
        'packets_per_hour': spec.packets_per_hour,
        'required_throughput': spec.required_throughput,
        'environment': env.class_label.value,
        'path_loss_exponent': env.path_loss_exponent,
        'reference_loss_1m': env.reference_loss_1m,
        'shadowing_sigma': env.shadowing_sigma,
        'region': region.name,
        'duty_cycle_limit': region.duty_cycle_limit,
        'max_tx_power': region.max_tx_power,
        'band_low': low,
        'band_high': high,
        'seed': spec.seed,
        'mobility_class': spec.mobility_class.value,
    }
    return {k: _fmt(v) for k, v in values.items()}


def _blank(value) -> bool:
    return value is None or str(value).strip() == ''


def spec_from_record(record: Dict[str, str], row: Optional[int] = None) -> ScenarioSpec:
    """
    Build a ScenarioSpec from flat string fields.

    Environment and region fall back to their presets when only the label
    or profile name is given.

    Raises:
        ScenarioParseError: Naming the row and offending column
    """
    record = {k.strip().lower(): v for k, v in record.items() if k}
    if _blank(record.get('distance')):
        raise ScenarioParseError("missing value", row=row, column='distance')

    data = {
        key: record[key] for key in
        ('scenario_id', 'distance', 'speed', 'excursion', 'payload_bytes', 'packets_per_hour',
         'required_throughput', 'seed')
        if not _blank(record.get(key))
    }

    try:
        label = record.get('environment') or 'open-los'
        if _blank(record.get('path_loss_exponent')):
            data['environment'] = EnvironmentModel.preset(label.strip())
        else:
            data['environment'] = {
                'class_label': label.strip(),
                'path_loss_exponent': record.get('path_loss_exponent'),
                'reference_loss_1m': record.get('reference_loss_1m'),
                'shadowing_sigma': record.get('shadowing_sigma'),
            }

        region_name = record.get('region') or None
        if _blank(record.get('duty_cycle_limit')):
            data['region'] = RegionProfile.preset(region_name.strip()) if region_name else RegionProfile.preset()
        else:
            data['region'] = {
                'name': region_name or 'custom',
                'duty_cycle_limit': record.get('duty_cycle_limit'),
                'max_tx_power': record.get('max_tx_power'),
                'allowed_band': (record.get('band_low'), record.get('band_high')),
            }
    except InvalidConfigError as e:
        column = 'environment' if 'environment' in str(e) else 'region'
        raise ScenarioParseError(str(e), row=row, column=column) from e

    try:
        spec = ScenarioSpec(**data)
    except ValidationError as e:
        first = e.errors()[0]
        loc = tuple(str(part) for part in first['loc'])
        column = _COLUMN_FOR_LOC.get(loc[:2], loc[0] if loc else None)
        raise ScenarioParseError(first['msg'], row=row, column=column) from e

    declared = record.get('mobility_class')
    if not _blank(declared) and declared.strip() != spec.mobility_class.value:
        raise ScenarioParseError(
            f"'{declared}' does not match speed {spec.speed} m/s ({spec.mobility_class.value})",
            row=row, column='mobility_class',
        )
    return spec


def save_scenarios(specs: Iterable[ScenarioSpec], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([spec_to_record(s) for s in specs], columns=SCENARIO_COLUMNS)
    frame.to_csv(path, index=False)
    logger.info(f"Saved {len(frame)} scenarios to {path}")
    return path


def load_scenarios(path: str | Path) -> List[ScenarioSpec]:
    """
    Load a scenario CSV.

    Raises:
        ScenarioParseError: On a missing column or malformed row (1-based data row)
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ScenarioParseError(f"cannot read {path}: {e}") from e

    if 'distance' not in frame.columns:
        raise ScenarioParseError("required column missing", column='distance')

    specs = [spec_from_record(record, row=i) for i, record in enumerate(frame.to_dict('records'), start=1)]
    ids = [s.scenario_id for s in specs]
    if len(set(ids)) != len(ids):
        raise ScenarioParseError("duplicate scenario ids", column='scenario_id')
    logger.info(f"Loaded {len(specs)} scenarios from {path}")
    return specs


def load_scenario_file(path: str | Path) -> ScenarioSpec:
    """Load a single scenario from a key-value text file or JSON object."""
    path = Path(path)
    if not path.exists():
        raise ScenarioParseError(f"file not found: {path}")
    if path.suffix.lower() == '.json':
        try:
            raw = json.loads(path.read_text(encoding='utf-8'))
        except json.JSONDecodeError as e:
            raise ScenarioParseError(f"invalid JSON in {path}: {e}") from e
        record = {k: '' if v is None else str(v) for k, v in raw.items()}
    else:
        record = {k: v or '' for k, v in dotenv_values(path).items()}
    return spec_from_record(record)


class ScenarioLoader:
    """Pick the right reader for a scenario source by file extension."""

    SUPPORTED_EXTENSIONS = {
        '.csv': 'CSV',
        '.json': 'JSON',
        '.env': 'Key-value',
        '.txt': 'Key-value',
        '.cfg': 'Key-value',
        '.scenario': 'Key-value',
    }

    @classmethod
    def can_load(cls, file_path: str | Path) -> bool:
        return Path(file_path).suffix.lower() in cls.SUPPORTED_EXTENSIONS

    @classmethod
    def load(cls, file_path: str | Path) -> List[ScenarioSpec]:
        """
        Load one or many scenarios.

        Raises:
            ScenarioParseError: If the format is unsupported or parsing fails
        """
        path = Path(file_path)
        if not cls.can_load(path):
            supported = ', '.join(cls.SUPPORTED_EXTENSIONS)
            raise ScenarioParseError(f"Unsupported scenario file type '{path.suffix}'. Supported: {supported}")
        if path.suffix.lower() == '.csv':
            return load_scenarios(path)
        return [load_scenario_file(path)]
