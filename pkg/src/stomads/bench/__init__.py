"""Benchmark harness: convergence test, profiles and experiment grids."""
from .grid import (
    DEFAULT_SIGMAS,
    Cell,
    GridResult,
    cell_id,
    default_variants,
    load_cells,
    profiles_from_cells,
    run_grid,
)
from .profiles import (
    DATA_ALPHAS,
    PERF_POINTS,
    ConvergenceTest,
    ProfileTable,
    data_profile,
    evals_to_convergence,
    performance_profile,
    write_svg,
)

__all__ = [
    "DEFAULT_SIGMAS", "Cell", "GridResult", "cell_id", "default_variants", "load_cells",
    "profiles_from_cells", "run_grid", "DATA_ALPHAS", "PERF_POINTS", "ConvergenceTest",
    "ProfileTable", "data_profile", "evals_to_convergence", "performance_profile", "write_svg",
]
