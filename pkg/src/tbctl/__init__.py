"""Optimal post-exposure treatment of tuberculosis with reinfection.

Forward-backward sweep solver for a five-compartment reinfection model,
plus the cost-effectiveness measures used to compare intervention
strategies across epidemiological scenarios.
"""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    IntegrationError,
    InvalidInputError,
    InvalidParametersError,
    TBControlError,
    TieError,
    UndefinedRatioError,
)
from .model import ControlPoint, Parameters, State, basic_reproduction_number, dynamics_rhs
from .equilibrium import EquilibriumResult, endemic_equilibrium
from .ode import TimeGrid, Trajectory, rk4_backward, rk4_forward
from .optctl import (
    STRATEGIES,
    AdjointState,
    FbsSettings,
    OptimalSolution,
    StrategyMask,
    adjoint_rhs,
    hamiltonian,
    objective,
    project_controls,
    solve_fbs,
)
from .measures import (
    CostWeights,
    SummaryMeasures,
    acer,
    cases_averted,
    effectiveness,
    efficacy,
    icer_table,
    relaxation_time,
    summarize,
    total_cost,
)
from .scenarios import (
    ScenarioResult,
    ScenarioSpec,
    run_scenario,
    strategy_comparison,
    sweep_beta,
    sweep_tf,
    sweep_weights,
)
