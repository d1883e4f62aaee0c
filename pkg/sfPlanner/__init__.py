"""
sfPlanner - optimum spreading factor planning for single-channel mobile
LoRa gateways, with a seeded link simulator to check the choices.
"""

from sfPlanner.errors import (
    InvalidConfigError,
    InvalidGridError,
    InvalidPairError,
    InvalidPayloadError,
    InvalidTraceError,
    NoFeasibleSFError,
    PlannerError,
    ScenarioParseError,
)
from sfPlanner.evaluator import compare_static_vs_dynamic, confusion_matrix, validate
from sfPlanner.linksim import (
    DynamicProtocolConfig,
    MobilityTrace,
    SimOutcome,
    brute_force_best_sf,
    simulate_dynamic_protocol,
    simulate_link,
)
from sfPlanner.phy import EnvironmentModel, LinkBudget, RadioConfig, SpreadingFactor
from sfPlanner.scenarios import ScenarioGrid, generate_grid, load_scenarios, save_scenarios
from sfPlanner.selector import (
    MobilityClass,
    RegionProfile,
    ScenarioSpec,
    ScoreWeights,
    SelectionResult,
    SFEvaluation,
    evaluate_candidates,
    phase2_score,
    select_sf,
)

__version__ = '1.0.1'
__all__ = [
    'DynamicProtocolConfig',
    'EnvironmentModel',
    'InvalidConfigError',
    'InvalidGridError',
    'InvalidPairError',
    'InvalidPayloadError',
    'InvalidTraceError',
    'LinkBudget',
    'MobilityClass',
    'MobilityTrace',
    'NoFeasibleSFError',
    'PlannerError',
    'RadioConfig',
    'RegionProfile',
    'SFEvaluation',
    'ScenarioGrid',
    'ScenarioParseError',
    'ScenarioSpec',
    'ScoreWeights',
    'SelectionResult',
    'SimOutcome',
    'SpreadingFactor',
    'brute_force_best_sf',
    'compare_static_vs_dynamic',
    'confusion_matrix',
    'evaluate_candidates',
    'generate_grid',
    'load_scenarios',
    'phase2_score',
    'save_scenarios',
    'select_sf',
    'simulate_dynamic_protocol',
    'simulate_link',
    'validate',
]
