"""Mean-variance portfolio selection under regime switching with random exit.

The package solves the coupled backward equations that price the riskless
bond (psi), the squared-wealth cost (p) and the normalized target loading
(g) regime by regime, assembles the closed-form efficient frontier from the
time-zero solution values, and cross-checks the analytics against a Monte
Carlo simulation of the controlled wealth process.

Typical workflow::

    gen = validate_generator([[-1.0, 1.0], [0.8, -0.8]])
    market = constant_market([0.10, 0.15], [0.30, 0.25], [0.50, 0.45],
                             horizon=1.0, n_regimes=2)
    exit_law = constant_horizon(0.5, horizon=1.0)
    sol = solve_backward(market, exit_law, gen)
    occ = gen.occupation_probabilities(0, sol.grid)
    dv = compute_delta(sol.grid, sol.p, sol.g, exit_law, occ, gen)
    inputs = frontier_inputs(sol, dv.delta, x0=1.0, initial_regime=0)
    law = build_law(sol, market, inputs, z=1.2)
"""

from .errors import (
    BadGrid,
    BoundViolated,
    DegenerateVolatility,
    DenominatorNonNegative,
    DimensionMismatch,
    GridMismatch,
    InfeasibleMarket,
    InvalidConfig,
    ModelError,
    NegativeBeta,
    NegativeDensity,
    NegativeOffDiagonal,
    NegativeTime,
    NonPositiveRate,
    NotSquare,
    NumericalBlowup,
    OutOfRangeTime,
    PositivityLost,
    RowSumViolation,
    ScheduleGap,
    StepTooLarge,
    SurvivalMarginViolated,
    ZBelowMinimum,
)
from .schedules import PiecewiseConstant, build_schedule
from .chain import (
    ChainPath,
    CountingRecord,
    ValidatedGenerator,
    counting_processes,
    validate_generator,
)
from .market import MarketModel, WealthState, build_market, constant_market
from .horizon import HorizonSpec, build_horizon, constant_horizon
from .bsde import (
    BackwardSolution,
    DeltaValue,
    compute_delta,
    shared_grid,
    solve_backward,
    solve_g,
    solve_p,
    solve_psi,
)
from .frontier import (
    FeasiblePortfolioLaw,
    FeedbackLaw,
    FrontierInputs,
    FrontierPoint,
    MutualFundLaw,
    build_law,
    feasibility_gamma,
    feasible_portfolio,
    frontier_curve,
    frontier_inputs,
    lambda_star,
    min_variance,
    mutual_fund,
    optimal_control,
    variance_at,
    variance_minimum,
    z_minimum,
    z_zero,
)
from .config import ModelConfig, load_config, parse_config
from .montecarlo import (
    DualCostReport,
    EulerBiasReport,
    FrontierCheckRow,
    SimConfig,
    SimResult,
    ZeroLaw,
    dual_cost_check,
    euler_bias_probe,
    frontier_validation,
    simulate,
)

__version__ = "0.1.0"

__all__ = [
    "ModelError",
    "InvalidConfig",
    "NotSquare",
    "NegativeOffDiagonal",
    "RowSumViolation",
    "NegativeTime",
    "BadGrid",
    "DimensionMismatch",
    "NonPositiveRate",
    "DegenerateVolatility",
    "ScheduleGap",
    "OutOfRangeTime",
    "NegativeDensity",
    "SurvivalMarginViolated",
    "StepTooLarge",
    "PositivityLost",
    "BoundViolated",
    "GridMismatch",
    "DenominatorNonNegative",
    "InfeasibleMarket",
    "NegativeBeta",
    "ZBelowMinimum",
    "NumericalBlowup",
    "PiecewiseConstant",
    "build_schedule",
    "ValidatedGenerator",
    "ChainPath",
    "CountingRecord",
    "validate_generator",
    "counting_processes",
    "MarketModel",
    "WealthState",
    "build_market",
    "constant_market",
    "HorizonSpec",
    "build_horizon",
    "constant_horizon",
    "BackwardSolution",
    "DeltaValue",
    "shared_grid",
    "solve_backward",
    "solve_psi",
    "solve_p",
    "solve_g",
    "compute_delta",
    "FrontierInputs",
    "FrontierPoint",
    "FeedbackLaw",
    "FeasiblePortfolioLaw",
    "MutualFundLaw",
    "frontier_inputs",
    "lambda_star",
    "z_minimum",
    "variance_minimum",
    "variance_at",
    "build_law",
    "min_variance",
    "mutual_fund",
    "optimal_control",
    "feasibility_gamma",
    "z_zero",
    "feasible_portfolio",
    "frontier_curve",
    "ModelConfig",
    "load_config",
    "parse_config",
    "SimConfig",
    "SimResult",
    "ZeroLaw",
    "simulate",
    "DualCostReport",
    "dual_cost_check",
    "FrontierCheckRow",
    "frontier_validation",
    "EulerBiasReport",
    "euler_bias_probe",
    "__version__",
]
