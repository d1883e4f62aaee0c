import pytest
from pydantic import ValidationError

from sfPlanner.errors import InvalidTraceError
from sfPlanner.linksim import (
    DynamicProtocolConfig,
    brute_force_best_sf,
    fixed_trace,
    simulate_dynamic_protocol,
    simulate_link,
    trace_for_scenario,
)
from sfPlanner.linksim.simulator import transmission_schedule
from sfPlanner.selector import select_sf


def _run(spec, radio, dyn=None, seed=3, n_packets=100, sigma=None):
    horizon = transmission_schedule(n_packets, spec.packets_per_hour)[2]
    trace = trace_for_scenario(spec, horizon)
    return simulate_dynamic_protocol(spec, radio, dyn or DynamicProtocolConfig(), trace, seed,
                                     n_packets=n_packets, shadowing_sigma=sigma)


class TestDynamicProtocolConfig:
    def test_defaults(self):
        dyn = DynamicProtocolConfig()
        assert dyn.initial_sf == 12
        assert dyn.margin_low_threshold < dyn.margin_high_threshold

    def test_hysteresis_band_must_be_open(self):
        with pytest.raises(ValidationError):
            DynamicProtocolConfig(margin_low_threshold=10.0, margin_high_threshold=10.0)

    def test_initial_sf_range(self):
        with pytest.raises(ValidationError):
            DynamicProtocolConfig(initial_sf=6)


class TestDynamicProtocol:
    def test_steps_down_to_sf7_at_short_range(self, make_spec, radio):
        outcome = _run(make_spec(100.0), radio, sigma=0.0)
        assert outcome.pdr == 1.0
        assert outcome.switches == 5

    def test_free_switches(self, make_spec, radio):
        outcome = _run(make_spec(100.0), radio, DynamicProtocolConfig(control_packet_bytes=0), sigma=0.0)
        assert outcome.pdr == 1.0
        assert outcome.switches == 5

    def test_never_finds_unreachable_node(self, make_spec, radio):
        outcome = _run(make_spec(100_000.0), radio)
        assert outcome.packets_delivered == 0
        assert outcome.switches == 0

    def test_deterministic(self, make_spec, radio):
        spec = make_spec(1015.4, speed=20.0)
        assert _run(spec, radio, seed=8) == _run(spec, radio, seed=8)

    def test_counts_only_data_packets(self, make_spec, radio):
        outcome = _run(make_spec(623.1, speed=20.0), radio, n_packets=200)
        assert outcome.packets_sent == 200
        assert 0 <= outcome.packets_delivered <= 200
        assert outcome.airtime_used > 0

    def test_trace_must_cover_schedule(self, make_spec, radio):
        with pytest.raises(InvalidTraceError):
            simulate_dynamic_protocol(make_spec(300.0), radio, DynamicProtocolConfig(),
                                      fixed_trace(300.0, 60.0), seed=1, n_packets=100)


class TestAgainstFixedPlan:
    def test_parked_at_planned_sf_matches_fixed_link(self, make_spec, radio, weights):
        spec = make_spec(1000.0)
        chosen = select_sf(spec, radio, weights).chosen
        dyn = DynamicProtocolConfig(initial_sf=int(chosen), margin_low_threshold=-100.0,
                                    margin_high_threshold=100.0)
        trace = fixed_trace(spec.distance, transmission_schedule(1000, spec.packets_per_hour)[2])

        dynamic = simulate_dynamic_protocol(spec, radio, dyn, trace, seed=5, n_packets=1000, shadowing_sigma=0.0)
        static = simulate_link(spec, chosen, radio, trace, seed=5, n_packets=1000, shadowing_sigma=0.0)
        assert dynamic.switches == 0
        assert dynamic.deferred <= 1  # first data frame waits for the beacon exchange
        assert dynamic.packets_delivered == static.packets_delivered

        shadowed = simulate_dynamic_protocol(spec, radio, dyn, trace, seed=5, n_packets=1000)
        reference = simulate_link(spec, chosen, radio, trace, seed=5, n_packets=1000)
        assert shadowed.switches == 0
        assert abs(shadowed.pdr - reference.pdr) <= 0.005

    @pytest.mark.parametrize('distance', [300.0, 900.0, 1400.0])
    def test_free_instant_switching_tracks_best_fixed_sf(self, make_spec, radio, distance):
        spec = make_spec(distance, speed=1.0)
        dyn = DynamicProtocolConfig(sf_switch_dwell=0.0, control_packet_bytes=0)
        horizon = transmission_schedule(1000, spec.packets_per_hour)[2]
        trace = trace_for_scenario(spec, horizon)

        dynamic = simulate_dynamic_protocol(spec, radio, dyn, trace, seed=21, n_packets=1000)
        best = max(brute_force_best_sf(spec, radio, trace, seed=21, n_packets=1000).pdr_by_sf.values())
        assert abs(dynamic.pdr - best) <= 0.02
