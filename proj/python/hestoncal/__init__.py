"""Heston parameter calibration with an adjoint ADI solver."""

from ._hestoncal import (
    REPORT_HEADER,
    CalibConfig,
    CalibrationResult,
    ConfigError,
    Grid,
    GridMismatch,
    HestonParams,
    MarketSpec,
    QuadratureError,
    SolverError,
    Trajectory,
    adjoint_gradient,
    black_scholes_put,
    build_grid,
    calibrate,
    cost,
    finite_difference_gradient,
    heston_analytic_put,
    interpolate_price,
    project,
    run_study,
    solve_forward,
)

__all__ = [
    "REPORT_HEADER",
    "CalibConfig",
    "CalibrationResult",
    "ConfigError",
    "Grid",
    "GridMismatch",
    "HestonParams",
    "MarketSpec",
    "QuadratureError",
    "SolverError",
    "Trajectory",
    "adjoint_gradient",
    "black_scholes_put",
    "build_grid",
    "calibrate",
    "cost",
    "finite_difference_gradient",
    "heston_analytic_put",
    "interpolate_price",
    "project",
    "run_study",
    "solve_forward",
]
