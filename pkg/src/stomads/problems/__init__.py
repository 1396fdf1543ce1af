"""Benchmark problems, noise wrappers and the external blackbox client."""
from .noise import NoiseSpec, NoisyProblem, evaluate_noisy
from .subprocess_client import SubprocessBlackbox, subprocess_blackbox
from .suite import FUNCTIONS, ProblemSpec, build_manifest, get_problem, load_manifest, quadratic, suite

__all__ = [
    "FUNCTIONS",
    "NoiseSpec",
    "NoisyProblem",
    "ProblemSpec",
    "SubprocessBlackbox",
    "build_manifest",
    "evaluate_noisy",
    "get_problem",
    "load_manifest",
    "quadratic",
    "subprocess_blackbox",
    "suite",
]
