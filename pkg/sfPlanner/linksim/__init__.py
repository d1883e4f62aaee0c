"""
Link-level simulation: mobility traces, duty-cycle gating, the seeded
packet simulator used as brute-force oracle and the dynamic SF baseline.
"""

from sfPlanner.linksim.airtime import AirtimeLedger
from sfPlanner.linksim.dynamic import DynamicProtocolConfig, simulate_dynamic_protocol
from sfPlanner.linksim.mobility import (
    MobilityTrace,
    TraceKind,
    fixed_trace,
    linear_pass,
    out_and_back,
    trace_for_scenario,
)
from sfPlanner.linksim.simulator import (
    BruteForceResult,
    SimOutcome,
    brute_force_best_sf,
    derive_seed,
    outcomes_frame,
    pdr_distance_sweep,
    simulate_link,
    transmission_schedule,
)

__all__ = [
    'AirtimeLedger',
    'BruteForceResult',
    'DynamicProtocolConfig',
    'MobilityTrace',
    'SimOutcome',
    'TraceKind',
    'brute_force_best_sf',
    'derive_seed',
    'fixed_trace',
    'linear_pass',
    'out_and_back',
    'outcomes_frame',
    'pdr_distance_sweep',
    'simulate_dynamic_protocol',
    'simulate_link',
    'trace_for_scenario',
    'transmission_schedule',
]
