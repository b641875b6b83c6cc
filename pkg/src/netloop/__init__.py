"""Multi-loop control over a shared delay-tiered network.

N linear plants close their sensor-to-controller loops over common
communication links; link d delivers after exactly d steps, has a price,
and a per-step capacity.  The package plans which link each loop should
use (per-loop binary programs over the control-relevant staleness cost),
arbitrates the shared capacities (centralized grant programs in four
regimes plus a delay-insensitive baseline), and replays the closed loops
under seeded Monte Carlo to compare realized costs.

Entry points: :func:`load_config` + :func:`run_experiment` for full
experiments (the ``netloop`` command wraps them), or the layer-by-layer
API re-exported below.
"""

from .config import ExperimentConfig, OutputOptions, load_config, parse_config
from .core import NetworkModel, PlantModel, RngStreams
from .delay_policy import DelayPlan, impassive_plan, reactive_plan
from .errors import (AllocationInfeasibleError, ConfigurationError,
                     ConsistencyError, NetloopError, SolverError)
from .estimator import ControllerInfo, ReceivedSample
from .lqg import (RiccatiSolution, closed_form_cost, control_input,
                  error_cost_table, error_cost_term, riccati_backward)
from .milp import MilpBuilder, MilpProblem, SolverOptions, solve
from .resource_manager import (AllocationPlan, allocate_agnostic,
                               allocate_aware_impassive,
                               allocate_aware_reactive,
                               allocate_delay_insensitive, feasibility_bound,
                               requests_from_plans)
from .sim import (BatchCosts, EpisodeTrace, Metrics, ScheduleOutcome,
                  average_deviation, link_utilization, local_cost,
                  plan_schedules, run_episode, run_experiment, simulate_batch,
                  social_cost)

__version__ = "0.1.0"

__all__ = [
    "AllocationInfeasibleError",
    "AllocationPlan",
    "BatchCosts",
    "ConfigurationError",
    "ConsistencyError",
    "ControllerInfo",
    "DelayPlan",
    "EpisodeTrace",
    "ExperimentConfig",
    "Metrics",
    "MilpBuilder",
    "MilpProblem",
    "NetloopError",
    "NetworkModel",
    "OutputOptions",
    "PlantModel",
    "ReceivedSample",
    "RiccatiSolution",
    "RngStreams",
    "ScheduleOutcome",
    "SolverError",
    "SolverOptions",
    "allocate_agnostic",
    "allocate_aware_impassive",
    "allocate_aware_reactive",
    "allocate_delay_insensitive",
    "average_deviation",
    "closed_form_cost",
    "control_input",
    "error_cost_table",
    "error_cost_term",
    "feasibility_bound",
    "impassive_plan",
    "link_utilization",
    "load_config",
    "local_cost",
    "parse_config",
    "plan_schedules",
    "reactive_plan",
    "requests_from_plans",
    "riccati_backward",
    "run_episode",
    "run_experiment",
    "simulate_batch",
    "social_cost",
    "solve",
    "__version__",
]
