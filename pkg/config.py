"""
Configuration management for the planner
"""
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import dotenv_values, load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from constants import (
    DEFAULT_ENVIRONMENT,
    DEFAULT_FADE_MARGIN,
    DEFAULT_PACKETS,
    DEFAULT_PASS_HALF_DURATION,
    DEFAULT_SEED,
    DEFAULT_TIE_TOLERANCE,
    RADIO_DEFAULTS,
    REGION_CARRIERS,
)
from sfPlanner.errors import InvalidConfigError
from sfPlanner.linksim import DynamicProtocolConfig
from sfPlanner.phy import EnvironmentModel, RadioConfig
from sfPlanner.scenarios import ScenarioGrid
from sfPlanner.selector import RegionProfile, ScoreWeights

logger = logging.getLogger(__name__)

# Load environment variables from config.env in the same directory as this file
_BASE_DIR = Path(__file__).resolve().parent
_CONFIG_ENV_PATH = _BASE_DIR / 'config.env'
load_dotenv(dotenv_path=_CONFIG_ENV_PATH)


class Config:
    """Process-level settings (environment variables)"""

    CONFIG_PATH = os.getenv('SFPLAN_CONFIG')  # planner config file used when --config is absent
    LOG_LEVEL = os.getenv('SFPLAN_LOG_LEVEL', 'INFO')
    LOG_FILE = os.getenv('SFPLAN_LOG_FILE')  # enables the rotating file log
    JOBS = int(os.getenv('SFPLAN_JOBS', '1'))

    @classmethod
    def env_seed(cls) -> Optional[int]:
        """Seed fallback from SFPLAN_SEED, read at call time"""
        raw = os.getenv('SFPLAN_SEED')
        if raw is None or not raw.strip():
            return None
        try:
            return int(raw)
        except ValueError:
            raise InvalidConfigError(f"SFPLAN_SEED must be an integer, got {raw!r}")

    @classmethod
    def validate(cls):
        """Validate process settings"""
        if not isinstance(logging.getLevelName(cls.LOG_LEVEL.upper()), int):
            raise ValueError(f"SFPLAN_LOG_LEVEL not a logging level: {cls.LOG_LEVEL}")
        if cls.JOBS < 1:
            raise ValueError("SFPLAN_JOBS must be >= 1")
        return True


class SelectorSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    fade_margin: float = Field(DEFAULT_FADE_MARGIN, ge=0)


class SimulatorSettings(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_packets: int = Field(DEFAULT_PACKETS, ge=1)
    shadowing_sigma: Optional[float] = Field(None, ge=0)  # overrides every environment when set
    horizon: Optional[float] = Field(None, gt=0)
    pass_half_duration: float = Field(DEFAULT_PASS_HALF_DURATION, ge=0)
    tie_tolerance: float = Field(DEFAULT_TIE_TOLERANCE, ge=0, le=1)


class AppConfig(BaseModel):
    """Planner settings; every field has a default so an empty file is valid."""
    model_config = ConfigDict(frozen=True)

    radio: RadioConfig = Field(default_factory=RadioConfig)
    environment: EnvironmentModel = Field(default_factory=EnvironmentModel.preset)
    region: RegionProfile = Field(default_factory=RegionProfile.preset)
    weights: ScoreWeights = Field(default_factory=ScoreWeights)
    selector: SelectorSettings = Field(default_factory=SelectorSettings)
    simulator: SimulatorSettings = Field(default_factory=SimulatorSettings)
    dynamic: DynamicProtocolConfig = Field(default_factory=DynamicProtocolConfig)
    grid: ScenarioGrid = Field(default_factory=ScenarioGrid)
    seed: Optional[int] = Field(None, ge=0)

    @model_validator(mode='after')
    def _radio_fits_region(self) -> 'AppConfig':
        self.region.check_radio(self.radio)
        return self

    def with_overrides(self, overrides: Dict[str, Any]) -> 'AppConfig':
        """
        Copy with dotted-key overrides applied (None values are skipped).

        Args:
            overrides: e.g. {'radio.tx_power': 8, 'simulator.n_packets': 500}
        """
        tree = self.model_dump(mode='json')
        for dotted, value in overrides.items():
            if value is None:
                continue
            node = tree
            *parents, leaf = dotted.split('.')
            for part in parents:
                node = node.setdefault(part, {})
            node[leaf] = value
        return build_app_config(tree, check_keys=False)


_SECTIONS = {
    'radio': RadioConfig,
    'environment': EnvironmentModel,
    'region': RegionProfile,
    'weights': ScoreWeights,
    'selector': SelectorSettings,
    'simulator': SimulatorSettings,
    'dynamic': DynamicProtocolConfig,
    'grid': ScenarioGrid,
}
_EXTRA_KEYS = {'weights': {'preset'}}


def _parse_value(raw: Optional[str]) -> Any:
    """Key-value strings: inline JSON for mappings, commas for lists."""
    if raw is None:
        return None
    text = raw.strip()
    if not text:
        return None
    if text[0] in '[{':
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise InvalidConfigError(f"Invalid inline JSON {text!r}: {e}")
    if ',' in text:
        return [part.strip() for part in text.split(',') if part.strip()]
    return text


def _nest(flat: Dict[str, Any]) -> Dict[str, Any]:
    tree: Dict[str, Any] = {}
    for key, value in flat.items():
        if value is None:
            continue
        parts = key.strip().lower().split('.')
        node = tree
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise InvalidConfigError(f"Key '{key}' conflicts with a scalar setting")
        node[parts[-1]] = value
    return tree


def _check_keys(tree: Dict[str, Any]) -> None:
    for section, values in tree.items():
        if section == 'seed':
            continue
        model = _SECTIONS.get(section)
        if model is None:
            raise InvalidConfigError(f"Unknown config section '{section}'")
        if not isinstance(values, dict):
            raise InvalidConfigError(f"Config section '{section}' must hold key = value pairs")
        allowed = set(model.model_fields) | _EXTRA_KEYS.get(section, set())
        unknown = sorted(set(values) - allowed)
        if unknown:
            raise InvalidConfigError(f"Unknown key(s) in '{section}': {', '.join(unknown)}")


def _expand_presets(tree: Dict[str, Any]) -> Dict[str, Any]:
    """Named presets fill in whatever the file leaves out."""
    tree = dict(tree)

    region = tree.get('region')
    if isinstance(region, dict) and region.get('name'):
        name = str(region['name'])
        try:
            base = RegionProfile.preset(name).model_dump()
        except InvalidConfigError:
            base = {}  # custom region, fields given explicitly
        tree['region'] = {**base, **region}
        radio = tree.get('radio') if isinstance(tree.get('radio'), dict) else {}
        if name in REGION_CARRIERS and 'carrier_frequency' not in radio:
            low, high = base['allowed_band']
            if not low <= RADIO_DEFAULTS['carrier_frequency'] <= high:
                tree['radio'] = {**radio, 'carrier_frequency': REGION_CARRIERS[name]}

    carrier = tree.get('radio', {}).get('carrier_frequency', RadioConfig().carrier_frequency)
    env = tree.get('environment')
    if env is None and 'carrier_frequency' in tree.get('radio', {}):
        env = {'class_label': DEFAULT_ENVIRONMENT}
    if isinstance(env, dict) and env.get('class_label'):
        label = getattr(env['class_label'], 'value', env['class_label'])
        base = EnvironmentModel.preset(str(label), float(carrier)).model_dump()
        tree['environment'] = {**base, **env}

    weights = tree.get('weights')
    if isinstance(weights, dict) and weights.get('preset'):
        weights = dict(weights)
        base = ScoreWeights.preset(str(weights.pop('preset'))).model_dump()
        tree['weights'] = {**base, **weights}
    return tree


def build_app_config(tree: Dict[str, Any], check_keys: bool = True) -> AppConfig:
    """
    Validate a nested settings tree.

    Raises:
        InvalidConfigError: Naming the offending setting
    """
    if check_keys:
        _check_keys(tree)
    try:
        return AppConfig.model_validate(_expand_presets(tree))
    except ValidationError as e:
        problems = '; '.join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors()
        )
        raise InvalidConfigError(f"Invalid configuration: {problems}") from e


def load_app_config(path: Optional[str | Path] = None) -> AppConfig:
    """
    Load planner settings from a key-value text file or JSON.

    Key-value files use dotted keys (``radio.tx_power = 10``), ``#``
    comments, comma-separated lists and inline JSON for mappings.

    Args:
        path: Config file; None or an empty file gives all defaults

    Returns:
        Validated AppConfig
    """
    if path is None:
        return AppConfig()
    path = Path(path)
    if not path.exists():
        raise InvalidConfigError(f"Config file not found: {path}")

    if path.suffix.lower() == '.json':
        text = path.read_text(encoding='utf-8').strip()
        try:
            tree = json.loads(text) if text else {}
        except json.JSONDecodeError as e:
            raise InvalidConfigError(f"Invalid JSON in {path}: {e}") from e
        if not isinstance(tree, dict):
            raise InvalidConfigError(f"{path} must contain a JSON object")
    else:
        tree = _nest({key: _parse_value(value) for key, value in dotenv_values(path).items()})

    config = build_app_config(tree)
    logger.info(f"Loaded planner config from {path}")
    return config


def resolve_seed(flag_seed: Optional[int], app_config: AppConfig) -> int:
    """--seed flag, then config file, then SFPLAN_SEED, then the default."""
    for candidate in (flag_seed, app_config.seed, Config.env_seed()):
        if candidate is not None:
            return int(candidate)
    return DEFAULT_SEED
