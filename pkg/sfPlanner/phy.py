"""
LoRa physical-layer maths: symbol timing, time on air, sensitivity,
log-distance path loss, link budget, reliable range, energy and Doppler.

Every function here is pure. Scalar helpers are used by the selector,
the *_array helpers by the simulator.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Dict, Mapping, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from constants import (
    DEFAULT_ENVIRONMENT,
    ENVIRONMENT_PRESETS,
    LDRO_SYMBOL_THRESHOLD,
    MAX_PAYLOAD_BYTES,
    RADIO_DEFAULTS,
    SENSITIVITY_TABLE,
    SPEED_OF_LIGHT,
    TX_CURRENT_TABLE,
)
from sfPlanner.errors import InvalidConfigError, InvalidPayloadError

logger = logging.getLogger(__name__)


class SpreadingFactor(IntEnum):
    """LoRa spreading factor, totally ordered SF7 < ... < SF12."""
    SF7 = 7
    SF8 = 8
    SF9 = 9
    SF10 = 10
    SF11 = 11
    SF12 = 12

    def __str__(self) -> str:
        return f"SF{self.value}"

    @classmethod
    def parse(cls, value: Union[str, int]) -> 'SpreadingFactor':
        """Accept 9, '9' or 'SF9' (any case)."""
        text = str(value).strip().upper()
        if text.startswith('SF'):
            text = text[2:]
        try:
            return cls(int(text))
        except ValueError:
            raise InvalidConfigError(f"Unknown spreading factor: {value!r} (expected SF7..SF12)")


def _as_sf(sf: Union[int, SpreadingFactor]) -> SpreadingFactor:
    if isinstance(sf, SpreadingFactor):
        return sf
    return SpreadingFactor.parse(sf)


def free_space_loss(distance: float, frequency: float) -> float:
    """Free-space path loss (dB) at distance (m) and frequency (Hz)."""
    return 20.0 * math.log10(4.0 * math.pi * distance * frequency / SPEED_OF_LIGHT)


class EnvironmentLabel(str, Enum):
    OPEN_LOS = 'open-los'
    SEMI_RURAL_LOS = 'semi-rural-los'
    COASTAL_LOS = 'coastal-los'
    OBSTRUCTED_LOS = 'obstructed-los'


class EnvironmentModel(BaseModel):
    """Log-distance propagation with log-normal shadowing."""
    model_config = ConfigDict(frozen=True)

    class_label: EnvironmentLabel = EnvironmentLabel.OPEN_LOS
    path_loss_exponent: float = Field(2.0, ge=2.0)
    reference_loss_1m: float = Field(
        default_factory=lambda: free_space_loss(1.0, RADIO_DEFAULTS['carrier_frequency'])
    )
    shadowing_sigma: float = Field(3.0, ge=0.0)

    @classmethod
    def preset(cls, label: str = DEFAULT_ENVIRONMENT,
               carrier_frequency: float = RADIO_DEFAULTS['carrier_frequency']) -> 'EnvironmentModel':
        """
        Build one of the shipped line-of-sight environments.

        Args:
            label: Environment class label (open-los, semi-rural-los, ...)
            carrier_frequency: Carrier (Hz) used for the 1 m reference loss

        Raises:
            InvalidConfigError: If the label is unknown
        """
        if label not in ENVIRONMENT_PRESETS:
            known = ', '.join(ENVIRONMENT_PRESETS)
            raise InvalidConfigError(f"Unknown environment '{label}'. Known: {known}")
        return cls(
            class_label=label,
            reference_loss_1m=free_space_loss(1.0, carrier_frequency),
            **ENVIRONMENT_PRESETS[label],
        )


class RadioConfig(BaseModel):
    """Radio and framing parameters of the link."""
    model_config = ConfigDict(frozen=True)

    carrier_frequency: float = Field(RADIO_DEFAULTS['carrier_frequency'], gt=0)
    bandwidth: float = Field(RADIO_DEFAULTS['bandwidth'], gt=0)
    coding_rate: int = Field(RADIO_DEFAULTS['coding_rate'], ge=5, le=8)  # 4/5..4/8
    preamble_symbols: int = Field(RADIO_DEFAULTS['preamble_symbols'], ge=0)
    explicit_header: bool = True
    crc_enabled: bool = True
    tx_power: float = RADIO_DEFAULTS['tx_power']
    tx_antenna_gain: float = 0.0
    rx_antenna_gain: float = 0.0
    system_loss: float = Field(RADIO_DEFAULTS['system_loss'], ge=0.0)
    supply_voltage: float = Field(RADIO_DEFAULTS['supply_voltage'], gt=0)
    tx_current_by_power: Dict[float, float] = Field(
        default_factory=lambda: {float(k): v for k, v in TX_CURRENT_TABLE.items()}
    )

    @field_validator('tx_current_by_power')
    @classmethod
    def _non_empty_table(cls, table: Dict[float, float]) -> Dict[float, float]:
        if not table:
            raise ValueError("tx_current_by_power must have at least one entry")
        if any(v <= 0 for v in table.values()):
            raise ValueError("tx currents must be positive")
        return table


@dataclass(frozen=True)
class LinkBudget:
    expected_rssi: float
    sensitivity: float
    link_margin: float
    path_loss: float
    distance_clamped: bool = False


def symbol_duration(sf: Union[int, SpreadingFactor], bandwidth: float) -> float:
    """Chirp duration in seconds: 2^SF / BW."""
    if bandwidth <= 0:
        raise InvalidConfigError(f"Bandwidth must be positive, got {bandwidth}")
    return 2 ** int(_as_sf(sf)) / bandwidth


def low_data_rate_optimize(sf: Union[int, SpreadingFactor], bandwidth: float) -> bool:
    return symbol_duration(sf, bandwidth) > LDRO_SYMBOL_THRESHOLD


def payload_symbols(sf: Union[int, SpreadingFactor], config: RadioConfig, payload_bytes: int) -> int:
    """
    Number of payload symbols (header and CRC included) per the SX127x
    packet-duration formula.

    Raises:
        InvalidPayloadError: If payload_bytes is outside 1..255
    """
    if not 1 <= payload_bytes <= MAX_PAYLOAD_BYTES:
        raise InvalidPayloadError(
            f"Payload must be 1..{MAX_PAYLOAD_BYTES} bytes, got {payload_bytes}"
        )
    sf = _as_sf(sf)
    de = 1 if low_data_rate_optimize(sf, config.bandwidth) else 0
    ih = 0 if config.explicit_header else 1
    crc = 1 if config.crc_enabled else 0

    numerator = 8 * payload_bytes - 4 * int(sf) + 28 + 16 * crc - 20 * ih
    denominator = 4 * (int(sf) - 2 * de)
    blocks = -(-numerator // denominator)  # ceil on integers
    return 8 + max(blocks * config.coding_rate, 0)


def time_on_air(sf: Union[int, SpreadingFactor], config: RadioConfig, payload_bytes: int) -> float:
    """Packet duration in seconds: (preamble + 4.25) symbols plus payload symbols."""
    t_sym = symbol_duration(sf, config.bandwidth)
    n_payload = payload_symbols(sf, config, payload_bytes)
    return (config.preamble_symbols + 4.25 + n_payload) * t_sym


def effective_data_rate(sf: Union[int, SpreadingFactor], config: RadioConfig, payload_bytes: int) -> float:
    """Payload bits per second of airtime."""
    return payload_bytes * 8 / time_on_air(sf, config, payload_bytes)


def sensitivity(sf: Union[int, SpreadingFactor], bandwidth: float,
                table: Mapping[int, Mapping[int, float]] = SENSITIVITY_TABLE) -> float:
    """Receiver sensitivity floor in dBm."""
    row = table.get(bandwidth)
    if row is None:
        supported = ', '.join(str(int(bw)) for bw in table)
        raise InvalidConfigError(f"Unsupported bandwidth {bandwidth} Hz (supported: {supported})")
    return row[int(_as_sf(sf))]


def path_loss(distance: float, env: EnvironmentModel) -> float:
    """Log-distance path loss in dB. Distances below 1 m are clamped to 1 m."""
    if distance < 1.0:
        logger.warning(f"Distance {distance} m below 1 m reference, clamped to 1 m")
        distance = 1.0
    return env.reference_loss_1m + 10.0 * env.path_loss_exponent * math.log10(distance)


def rssi_offset(config: RadioConfig) -> float:
    """EIRP plus receive gain minus lumped system loss (dBm)."""
    return config.tx_power + config.tx_antenna_gain + config.rx_antenna_gain - config.system_loss


def link_budget(sf: Union[int, SpreadingFactor], config: RadioConfig,
                distance: float, env: EnvironmentModel) -> LinkBudget:
    loss = path_loss(distance, env)
    expected = rssi_offset(config) - loss
    floor = sensitivity(sf, config.bandwidth)
    return LinkBudget(
        expected_rssi=expected,
        sensitivity=floor,
        link_margin=expected - floor,
        path_loss=loss,
        distance_clamped=distance < 1.0,
    )


def max_reliable_range(sf: Union[int, SpreadingFactor], config: RadioConfig,
                       env: EnvironmentModel, fade_margin: float) -> float:
    """
    Largest distance (m) at which the link margin still reaches fade_margin.

    Closed-form inversion of the log-distance model. Returns 0.0 when even
    the 1 m reference point falls short.

    Raises:
        InvalidConfigError: If fade_margin is negative
    """
    if fade_margin < 0:
        raise InvalidConfigError(f"Fade margin must be >= 0 dB, got {fade_margin}")
    allowed_loss = rssi_offset(config) - sensitivity(sf, config.bandwidth) - fade_margin
    excess = allowed_loss - env.reference_loss_1m
    if excess < 0:
        return 0.0
    return 10.0 ** (excess / (10.0 * env.path_loss_exponent))


def range_table(config: RadioConfig, env: EnvironmentModel, fade_margin: float) -> Dict[SpreadingFactor, float]:
    return {sf: max_reliable_range(sf, config, env, fade_margin) for sf in SpreadingFactor}


def tx_current(tx_power: float, table: Mapping[float, float]) -> float:
    """
    Supply current (mA) at a given output power.

    Powers missing from the table are linearly interpolated between the
    nearest entries and clamped at the table ends.
    """
    if tx_power in table:
        return float(table[tx_power])
    powers = sorted(table)
    currents = [table[p] for p in powers]
    value = float(np.interp(tx_power, powers, currents))
    logger.warning(f"tx_power {tx_power} dBm not in current table, interpolated {value:.1f} mA")
    return value


def energy_per_hour(sf: Union[int, SpreadingFactor], config: RadioConfig,
                    payload_bytes: int, packets_per_hour: float) -> float:
    """Transmit energy in joules per hour: V * I * ToA * rate."""
    if packets_per_hour < 0:
        raise InvalidConfigError(f"packets_per_hour must be >= 0, got {packets_per_hour}")
    toa = time_on_air(sf, config, payload_bytes)
    if packets_per_hour == 0:
        return 0.0
    current_a = tx_current(config.tx_power, config.tx_current_by_power) / 1000.0
    return config.supply_voltage * current_a * toa * packets_per_hour


def doppler_shift(speed: float, carrier_frequency: float) -> float:
    return speed * carrier_frequency / SPEED_OF_LIGHT


def doppler_tolerance(sf: Union[int, SpreadingFactor], bandwidth: float) -> float:
    """Frequency offset (Hz) a chirp tolerates: BW / 2^(SF+1)."""
    return bandwidth / 2 ** (int(_as_sf(sf)) + 1)


def doppler_exclusion_check(sf: Union[int, SpreadingFactor], config: RadioConfig, speed: float) -> bool:
    """True when the Doppler shift at this speed exceeds the SF's tolerance."""
    if speed < 0:
        raise InvalidConfigError(f"Speed must be >= 0, got {speed}")
    return doppler_shift(speed, config.carrier_frequency) > doppler_tolerance(sf, config.bandwidth)


# Vectorized helpers for the simulator

def path_loss_array(distances: np.ndarray, env: EnvironmentModel) -> np.ndarray:
    d = np.maximum(np.asarray(distances, dtype=float), 1.0)
    return env.reference_loss_1m + 10.0 * env.path_loss_exponent * np.log10(d)


def expected_rssi_array(config: RadioConfig, distances: np.ndarray, env: EnvironmentModel) -> np.ndarray:
    return rssi_offset(config) - path_loss_array(distances, env)


def link_margin_array(sf: Union[int, SpreadingFactor], config: RadioConfig,
                      distances: np.ndarray, env: EnvironmentModel) -> np.ndarray:
    return expected_rssi_array(config, distances, env) - sensitivity(sf, config.bandwidth)
