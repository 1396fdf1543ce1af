"""StoMADS: mesh adaptive direct search for noisy blackbox objectives."""
from .estimator import (
    AccuracyParams,
    BudgetExhausted,
    EstimateRecord,
    EvaluationError,
    Evaluator,
    check_accuracy,
    fresh_estimate,
    merge_on_failure,
    merge_on_success,
    required_sample_size,
)
from .mesh import InvalidMeshState, MeshState, Outcome, apply_mads_outcome, apply_outcome, is_mesh_point, mesh_size
from .poll import PollSet, build_poll_set, householder, next_seed_vector, order_opportunistic
from .solver import (
    IterationOutcome,
    RunRecord,
    SolverConfig,
    choose_nu_beta,
    classify_iteration,
    lemma_violations,
    phi_diagnostic,
    psi_diagnostic,
    solve,
)

__version__ = "0.1.0"
