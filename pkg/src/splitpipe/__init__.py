"""Pipeline-parallel split learning over a TDMA cell: timing model,
constraint system, schedule simulator, joint optimizer and baselines."""

from .baselines import (BaselineReport, latency_epsl, latency_psl,
                        latency_sl, report_c2p2sl)
from .errors import (InfeasibleDecisionError, InfeasibleProblemError,
                     ScenarioFormatError, ScenarioValidationError,
                     SplitPipeError)
from .link_model import LinkRates, link_rates, path_loss_db
from .optimizer import (AOState, SolverTolerances, default_decision,
                        enumerate_split, optimal_k, run_ao,
                        solve_batch_partition, solve_slot_allocation)
from .scenario import (BSProfile, ChannelParams, LayerProfile, ModelProfile,
                       Scenario, UEProfile, builtin_resnet18, load_scenario,
                       random_scenario, save_scenario, validate_scenario)
from .schedule_sim import (ScheduleTrace, TaskBlock, export_gantt,
                           export_trace_table, simulate)
from .timing import (ConstraintReport, Decision, TimingBreakdown, bubble_rate,
                     check_constraints, evaluate, uniform_batch_split)

__all__ = [
    "AOState", "BSProfile", "BaselineReport", "ChannelParams",
    "ConstraintReport", "Decision", "InfeasibleDecisionError",
    "InfeasibleProblemError", "LayerProfile", "LinkRates", "ModelProfile",
    "Scenario", "ScenarioFormatError", "ScenarioValidationError",
    "ScheduleTrace", "SolverTolerances", "SplitPipeError", "TaskBlock",
    "TimingBreakdown", "UEProfile", "bubble_rate", "builtin_resnet18",
    "check_constraints", "default_decision", "enumerate_split", "evaluate",
    "export_gantt", "export_trace_table", "latency_epsl", "latency_psl",
    "latency_sl", "link_rates", "load_scenario", "optimal_k", "path_loss_db",
    "random_scenario", "report_c2p2sl", "run_ao", "save_scenario",
    "simulate", "solve_batch_partition", "solve_slot_allocation",
    "uniform_batch_split", "validate_scenario",
]

__version__ = "0.1.0"
