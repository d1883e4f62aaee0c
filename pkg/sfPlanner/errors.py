"""
Exception hierarchy for the planner.

Everything raised on purpose derives from PlannerError so the CLI can map
it to an exit code without catching unrelated failures.
"""

from typing import Dict, Optional


class PlannerError(Exception):
    """Base class for planner errors."""


class InvalidConfigError(PlannerError, ValueError):
    """Radio, environment, region or application settings are invalid."""


class InvalidPayloadError(PlannerError, ValueError):
    """Payload size outside 1..255 bytes."""


class InvalidTraceError(PlannerError, ValueError):
    """Mobility trace is malformed or does not cover the schedule."""


class InvalidGridError(PlannerError, ValueError):
    """Scenario grid has an empty axis or an unknown label."""


class InvalidPairError(PlannerError, ValueError):
    """Predicted/actual pair with an SF outside 7..12."""


class NoFeasibleSFError(PlannerError):
    """Every spreading factor was excluded in the rule phase."""

    def __init__(self, counts: Dict[str, int], scenario_id: Optional[str] = None):
        self.counts = dict(counts)
        self.scenario_id = scenario_id
        detail = ', '.join(f"{reason}={n}" for reason, n in self.counts.items() if n)
        where = f" for scenario {scenario_id}" if scenario_id else ""
        super().__init__(f"No feasible spreading factor{where} (exclusions: {detail or 'none'})")


class ScenarioParseError(PlannerError, ValueError):
    """A scenario row or file could not be parsed."""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        self.row = row
        self.column = column
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column:
            location.append(f"column '{column}'")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")
