import math

import numpy as np
import pytest
from pydantic import ValidationError

from constants import SENSITIVITY_TABLE, TX_CURRENT_TABLE
from sfPlanner.errors import InvalidConfigError, InvalidPayloadError
from sfPlanner.phy import (
    EnvironmentModel,
    RadioConfig,
    SpreadingFactor,
    doppler_exclusion_check,
    doppler_shift,
    doppler_tolerance,
    effective_data_rate,
    energy_per_hour,
    expected_rssi_array,
    free_space_loss,
    link_budget,
    link_margin_array,
    low_data_rate_optimize,
    max_reliable_range,
    path_loss,
    path_loss_array,
    payload_symbols,
    range_table,
    rssi_offset,
    sensitivity,
    symbol_duration,
    time_on_air,
    tx_current,
)

N_CASES = 10_000


class TestSpreadingFactor:
    def test_order_and_labels(self):
        assert list(SpreadingFactor) == sorted(SpreadingFactor)
        assert [str(sf) for sf in SpreadingFactor] == ['SF7', 'SF8', 'SF9', 'SF10', 'SF11', 'SF12']

    @pytest.mark.parametrize('text', ['9', 'SF9', 'sf9', ' Sf9 ', 9])
    def test_parse(self, text):
        assert SpreadingFactor.parse(text) is SpreadingFactor.SF9

    @pytest.mark.parametrize('text', ['SF6', '13', 'fast', ''])
    def test_parse_rejects(self, text):
        with pytest.raises(InvalidConfigError):
            SpreadingFactor.parse(text)


class TestTimeOnAir:
    def test_sf7_default_frame(self, radio):
        assert payload_symbols(7, radio, 20) == 43
        assert time_on_air(SpreadingFactor.SF7, radio, 20) == pytest.approx(0.056576, abs=1e-6)

    def test_sf12_default_frame(self, radio):
        assert payload_symbols(12, radio, 20) == 28
        assert time_on_air(SpreadingFactor.SF12, radio, 20) == pytest.approx(1.318912, abs=1e-6)

    def test_low_data_rate_optimize_threshold(self):
        assert not low_data_rate_optimize(10, 125_000)
        assert low_data_rate_optimize(11, 125_000)
        assert not low_data_rate_optimize(12, 500_000)

    def test_symbol_duration(self):
        assert symbol_duration(7, 125_000) == pytest.approx(1.024e-3)
        with pytest.raises(InvalidConfigError):
            symbol_duration(7, 0)

    @pytest.mark.parametrize('payload', [0, 256, -3])
    def test_payload_bounds(self, radio, payload):
        with pytest.raises(InvalidPayloadError):
            time_on_air(7, radio, payload)

    def test_grows_with_sf_and_payload(self, radio):
        toas = [time_on_air(sf, radio, 20) for sf in SpreadingFactor]
        assert toas == sorted(toas)
        assert time_on_air(9, radio, 50) > time_on_air(9, radio, 20)

    def test_strictly_increasing_in_sf_for_every_payload(self, radio):
        for payload in range(1, 256):
            toas = [time_on_air(sf, radio, payload) for sf in SpreadingFactor]
            assert all(a < b for a, b in zip(toas, toas[1:])), payload

    def test_implicit_header_shortens_frame(self, radio):
        implicit = radio.model_copy(update={'explicit_header': False})
        assert time_on_air(7, implicit, 20) < time_on_air(7, radio, 20)

    def test_effective_data_rate(self, radio):
        assert effective_data_rate(7, radio, 20) == pytest.approx(160 / 0.056576)
        rates = [effective_data_rate(sf, radio, 20) for sf in SpreadingFactor]
        assert rates == sorted(rates, reverse=True)


class TestSensitivity:
    def test_defaults_at_125k(self):
        expected = [-123.0, -126.0, -129.0, -132.0, -134.5, -137.0]
        assert [sensitivity(sf, 125_000) for sf in SpreadingFactor] == expected

    @pytest.mark.parametrize('bandwidth', sorted(SENSITIVITY_TABLE))
    def test_strictly_decreasing_in_sf(self, bandwidth):
        floors = [sensitivity(sf, bandwidth) for sf in SpreadingFactor]
        assert all(a > b for a, b in zip(floors, floors[1:]))

    def test_unsupported_bandwidth(self):
        with pytest.raises(InvalidConfigError):
            sensitivity(7, 62_500)


class TestPropagation:
    def test_reference_loss_is_free_space_at_1m(self, open_los):
        assert open_los.reference_loss_1m == pytest.approx(25.18, abs=0.01)
        assert path_loss(1.0, open_los) == pytest.approx(open_los.reference_loss_1m)

    def test_exponent_scaling(self, open_los):
        assert path_loss(1000.0, open_los) - path_loss(100.0, open_los) == pytest.approx(20.0)

    def test_sub_metre_distance_clamped(self, radio, open_los):
        assert path_loss(0.2, open_los) == path_loss(1.0, open_los)
        assert link_budget(7, radio, 0.2, open_los).distance_clamped

    def test_presets(self):
        obstructed = EnvironmentModel.preset('obstructed-los')
        assert obstructed.path_loss_exponent == 2.1
        assert obstructed.shadowing_sigma == 3.5
        with pytest.raises(InvalidConfigError):
            EnvironmentModel.preset('underwater')

    def test_exponent_below_free_space_rejected(self):
        with pytest.raises(ValidationError):
            EnvironmentModel(path_loss_exponent=1.5)

    def test_free_space_loss_reference_value(self):
        assert free_space_loss(1.0, 868e6) == pytest.approx(31.22, abs=0.01)


class TestLinkBudgetProperties:
    """Randomized invariants over many (distance, exponent, SF, power) cases."""

    @pytest.fixture
    def cases(self):
        rng = np.random.default_rng(2024)
        return {
            'distance': rng.uniform(1.0, 20_000.0, N_CASES),
            'exponent': rng.uniform(2.0, 4.0, N_CASES),
            'sf': rng.integers(7, 13, N_CASES),
            'tx_power': rng.uniform(-2.0, 14.0, N_CASES),
            'fade': rng.uniform(0.0, 30.0, N_CASES),
        }

    def test_identity(self, cases):
        for i in range(N_CASES):
            config = RadioConfig(tx_power=float(cases['tx_power'][i]))
            env = EnvironmentModel(path_loss_exponent=float(cases['exponent'][i]))
            budget = link_budget(int(cases['sf'][i]), config, float(cases['distance'][i]), env)
            assert budget.link_margin == pytest.approx(budget.expected_rssi - budget.sensitivity)
            assert budget.expected_rssi == pytest.approx(rssi_offset(config) - budget.path_loss)

    def test_lossless_radio_budget(self):
        radio = RadioConfig(tx_power=14.0, system_loss=0.0)
        env = EnvironmentModel(path_loss_exponent=2.7)
        budget = link_budget(7, radio, 100.0, env)
        assert budget.expected_rssi == pytest.approx(14.0 - path_loss(100.0, env), abs=1e-9)
        assert budget.path_loss == pytest.approx(env.reference_loss_1m + 54.0)

        gained = radio.model_copy(update={'tx_antenna_gain': 2.0, 'rx_antenna_gain': 3.0})
        assert link_budget(7, gained, 100.0, env).expected_rssi == pytest.approx(budget.expected_rssi + 5.0)

    def test_path_loss_monotone(self, cases):
        for exponent in np.unique(np.round(cases['exponent'], 1)):
            env = EnvironmentModel(path_loss_exponent=float(exponent))
            losses = path_loss_array(np.sort(cases['distance']), env)
            assert np.all(np.diff(losses) >= 0)

    def test_range_round_trip(self, radio, cases):
        for i in range(N_CASES):
            env = EnvironmentModel(path_loss_exponent=float(cases['exponent'][i]))
            sf, fade = int(cases['sf'][i]), float(cases['fade'][i])
            reach = max_reliable_range(sf, radio, env, fade)
            assert reach > 0
            assert link_budget(sf, radio, reach, env).link_margin == pytest.approx(fade, abs=1e-6)

    def test_vectorized_matches_scalar(self, radio, cases):
        env = EnvironmentModel(path_loss_exponent=2.6)
        distances = cases['distance'][:500]
        rssi = expected_rssi_array(radio, distances, env)
        margins = link_margin_array(9, radio, distances, env)
        for d, r, m in zip(distances, rssi, margins):
            budget = link_budget(9, radio, float(d), env)
            assert r == pytest.approx(budget.expected_rssi)
            assert m == pytest.approx(budget.link_margin)


class TestReliableRange:
    def test_default_calibration(self, radio, open_los):
        table = range_table(radio, open_los, 10.0)
        assert 350.0 <= table[SpreadingFactor.SF7] <= 550.0
        assert table[SpreadingFactor.SF7] == pytest.approx(544.7, abs=0.5)
        assert table[SpreadingFactor.SF12] == pytest.approx(2730.0, abs=5.0)
        ranges = list(table.values())
        assert ranges == sorted(ranges)

    def test_unreachable_returns_zero(self, open_los):
        weak = RadioConfig(tx_power=-2.0, system_loss=120.0)
        assert max_reliable_range(7, weak, open_los, 10.0) == 0.0

    def test_negative_fade_margin(self, radio, open_los):
        with pytest.raises(InvalidConfigError):
            max_reliable_range(7, radio, open_los, -1.0)


class TestEnergy:
    def test_sf7_reference(self, radio):
        assert energy_per_hour(7, radio, 20, 60) == pytest.approx(3.3 * 0.031 * 0.056576 * 60)

    def test_ratio_follows_airtime(self, radio):
        ratio = energy_per_hour(12, radio, 20, 60) / energy_per_hour(7, radio, 20, 60)
        assert ratio == pytest.approx(1318.912 / 56.576)
        assert ratio == pytest.approx(23.3, abs=0.05)

    def test_zero_rate(self, radio):
        assert energy_per_hour(12, radio, 20, 0) == 0.0
        with pytest.raises(InvalidConfigError):
            energy_per_hour(12, radio, 20, -1)

    def test_tx_current_interpolates_missing_power(self):
        assert tx_current(10.0, TX_CURRENT_TABLE) == 31.0
        assert tx_current(10.5, TX_CURRENT_TABLE) == pytest.approx(31.5)
        assert tx_current(30.0, TX_CURRENT_TABLE) == 125.0


class TestDoppler:
    def test_sf12_at_50_kmh(self, radio):
        assert doppler_shift(13.9, radio.carrier_frequency) == pytest.approx(20.08, abs=0.01)
        assert doppler_tolerance(12, radio.bandwidth) == pytest.approx(15.26, abs=0.01)
        assert doppler_exclusion_check(12, radio, 13.9)

    def test_sf11_survives_20_ms(self, radio):
        assert not doppler_exclusion_check(11, radio, 20.0)

    def test_static_never_excluded(self, radio):
        assert not any(doppler_exclusion_check(sf, radio, 0.0) for sf in SpreadingFactor)

    def test_threshold_speed(self, radio):
        limit = doppler_tolerance(12, radio.bandwidth) * 299_792_458.0 / radio.carrier_frequency
        assert math.isclose(limit, 10.56, abs_tol=0.01)
        assert not doppler_exclusion_check(12, radio, limit - 0.01)
        assert doppler_exclusion_check(12, radio, limit + 0.01)

    def test_negative_speed(self, radio):
        with pytest.raises(InvalidConfigError):
            doppler_exclusion_check(7, radio, -1.0)
