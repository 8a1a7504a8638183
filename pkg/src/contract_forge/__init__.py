"""Contract design for collaborative model training with accuracy rewards.

The package covers the full pipeline: per-type solo-training reservation
points, the observable-cost benchmark, the private-cost menu solver, reward
assignment at realized participation, constraint audits, welfare accounting,
an equilibrium check for the no-contract baseline, and a CLI harness.
"""

from .audit import (
    AuditReport,
    check_full,
    check_ic_equivalence,
    check_reservation_append,
)
from .complete_info import CompleteContract, solve_complete
from .config import (
    PRESET_NAMES,
    ScenarioConfig,
    SweepGrids,
    load_config_file,
    load_preset,
    parse_config,
    serialize_config,
)
from .equilibrium import DeviationReport, best_response, check_pbe, deviation_utility
from .errors import (
    ConfigError,
    ContractForgeError,
    ContractViolationError,
    DomainError,
    EnumerationCapError,
    InfeasibleSurplusError,
    SolverError,
)
from .model import (
    AccuracySpec,
    ModelEconomy,
    ValuationSpec,
    accuracy,
    accuracy_slope,
    clamp_threshold,
    model_value,
    model_value_slope,
    valuation,
    valuation_inverse,
)
from .population import (
    DEFAULT_ENUM_CAP,
    OutcomeTable,
    Population,
    Realization,
    enumerate_realizations,
    expect,
    expect_conditional,
    outcome_table,
)
from .reservation import ReservationPoint, reserve, reservations
from .rewards import RealizedRewards, assign, expected_bound, expected_bounds
from .solver import (
    ContractMenu,
    SolveReport,
    closed_form_rewards,
    objective,
    solve_incomplete,
)
from .welfare import (
    WelfareReport,
    information_cost,
    information_rent,
    welfare_report,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracySpec",
    "AuditReport",
    "CompleteContract",
    "ConfigError",
    "ContractForgeError",
    "ContractMenu",
    "ContractViolationError",
    "DEFAULT_ENUM_CAP",
    "DeviationReport",
    "DomainError",
    "EnumerationCapError",
    "InfeasibleSurplusError",
    "ModelEconomy",
    "OutcomeTable",
    "PRESET_NAMES",
    "Population",
    "Realization",
    "RealizedRewards",
    "ReservationPoint",
    "ScenarioConfig",
    "SolveReport",
    "SolverError",
    "SweepGrids",
    "ValuationSpec",
    "WelfareReport",
    "accuracy",
    "accuracy_slope",
    "assign",
    "best_response",
    "check_full",
    "check_ic_equivalence",
    "check_pbe",
    "check_reservation_append",
    "clamp_threshold",
    "closed_form_rewards",
    "deviation_utility",
    "enumerate_realizations",
    "expect",
    "expect_conditional",
    "expected_bound",
    "expected_bounds",
    "information_cost",
    "information_rent",
    "load_config_file",
    "load_preset",
    "model_value",
    "model_value_slope",
    "objective",
    "outcome_table",
    "parse_config",
    "reservations",
    "reserve",
    "serialize_config",
    "solve_complete",
    "solve_incomplete",
    "valuation",
    "valuation_inverse",
    "welfare_report",
]
