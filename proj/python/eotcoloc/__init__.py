"""Entropic optimal transport colocalization curves with bootstrap confidence bands."""

from ._core import (
    BandResult,
    BootstrapConfig,
    ColocCurve,
    ConvergenceError,
    CostKind,
    CostMatrix,
    CostSpec,
    CoverageResult,
    DiscreteMeasure,
    EotSolution,
    GridMeasure,
    IoError,
    NumericalError,
    Potentials,
    SolverConfig,
    ThresholdGrid,
    ValidationError,
    bootstrap_band,
    coloc_curve,
    coverage_experiment,
    default_grid,
    dual_objective,
    eval_kernel_functional,
    independent_coupling_gap,
    load_grid,
    load_points_csv,
    primal_objective,
    qq_data,
    realize_cost,
    resample,
    sample_vmf,
    scenario_i,
    scenario_ii,
    solve,
    subsample_grid,
    sup_distance,
    to_measure,
    upper_quantile,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
