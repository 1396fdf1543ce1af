"""Sample-average estimates of f built from noisy blackbox evaluations.

Every blackbox call goes through an :class:`Evaluator`, which enforces the
evaluation budget and keeps the per-evaluation history used by run records.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "EvaluationError",
    "BudgetExhausted",
    "AccuracyParams",
    "EstimateRecord",
    "Evaluator",
    "required_sample_size",
    "fresh_estimate",
    "merge_on_success",
    "merge_on_failure",
    "check_accuracy",
]


class EvaluationError(RuntimeError):
    """The blackbox failed or returned a non-finite value."""


class BudgetExhausted(RuntimeError):
    """Not enough evaluations left in the budget for the requested samples."""


@dataclass(frozen=True)
class AccuracyParams:
    eps_f: float = 0.05
    gamma: float = 3.4
    beta: float = 0.81
    V: float = 1.0
    kappa_F: float | None = None

    def __post_init__(self):
        if not self.gamma > 2:
            raise ValueError(f"gamma must exceed 2, got {self.gamma}")
        if not 0.5 < self.beta < 1:
            raise ValueError(f"beta must lie in (1/2, 1), got {self.beta}")
        if not self.eps_f > 0:
            raise ValueError(f"eps_f must be positive, got {self.eps_f}")
        if not self.V > 0:
            raise ValueError(f"V must be positive, got {self.V}")
        if self.kappa_F is None:
            object.__setattr__(self, "kappa_F", math.sqrt(self.V))
        elif not self.kappa_F > 0:
            raise ValueError(f"kappa_F must be positive, got {self.kappa_F}")


@dataclass(frozen=True)
class EstimateRecord:
    """Running aggregate of the samples taken at one point.

    ``sum_sq`` is the sum of squared deviations from ``mean``.
    """

    point: np.ndarray = field(compare=False)
    count: int
    mean: float
    sum_sq: float = 0.0

    def __post_init__(self):
        if self.count < 1:
            raise ValueError(f"an estimate needs at least one sample, got count={self.count}")

    @classmethod
    def from_samples(cls, point, samples) -> "EstimateRecord":
        samples = np.asarray(samples, dtype=float).ravel()
        if samples.size == 0:
            raise ValueError("no samples given")
        mean = math.fsum(samples) / samples.size
        return cls(
            point=np.array(point, dtype=float),
            count=int(samples.size),
            mean=mean,
            sum_sq=float(np.sum((samples - mean) ** 2)),
        )

    @property
    def variance(self) -> float:
        """Unbiased sample variance, nan for a single sample."""
        return self.sum_sq / (self.count - 1) if self.count > 1 else math.nan


def required_sample_size(params: AccuracyParams, delta_p: float) -> int:
    """``ceil(V / (eps_f^2 delta_p^4 (1 - sqrt(beta))))``, at least 1."""
    if not delta_p > 0:
        raise ValueError(f"delta_p must be positive, got {delta_p}")
    bound = params.V / (params.eps_f**2 * delta_p**4 * (1.0 - math.sqrt(params.beta)))
    # shave a few ulps so that bounds landing on an integer are not rounded up
    return max(1, math.ceil(bound * (1 - 1e-12)))


class Evaluator:
    """Budgeted, history-keeping front end to a blackbox.

    ``blackbox`` is any callable ``x -> float``; if it also has a
    ``sample(x, n)`` method returning ``n`` values, that is used for batches
    and must agree with ``n`` successive calls. ``true_value`` optionally
    maps a point to the noiseless objective for diagnostics.
    """

    def __init__(self, blackbox, budget: int | None = None, true_value=None):
        if budget is not None and budget < 0:
            raise ValueError(f"budget must be nonnegative, got {budget}")
        self.blackbox = blackbox
        self.budget = budget
        self.true_value = true_value
        self.iteration = 0
        self.n_evals = 0
        self._points = []
        self._counts = []
        self._iters = []
        self._values = []
        self._true = []

    @property
    def remaining(self) -> float:
        return math.inf if self.budget is None else self.budget - self.n_evals

    def sample(self, x, n: int) -> np.ndarray:
        n = int(n)
        if n < 1:
            raise ValueError(f"need at least one sample, got {n}")
        if n > self.remaining:
            raise BudgetExhausted(f"{n} samples requested, {self.remaining} left in budget")
        x = np.array(x, dtype=float)
        if hasattr(self.blackbox, "sample"):
            values = np.asarray(self.blackbox.sample(x, n), dtype=float).ravel()
        else:
            values = np.array([float(self.blackbox(x)) for _ in range(n)])
        if values.size != n:
            raise EvaluationError(f"blackbox returned {values.size} values, expected {n}")
        self.n_evals += n
        self._points.append(x)
        self._counts.append(n)
        self._iters.append(self.iteration)
        self._values.append(values)
        self._true.append(self.true_value(x) if self.true_value is not None else math.nan)
        if not np.all(np.isfinite(values)):
            raise EvaluationError(f"non-finite blackbox value at x={x.tolist()}")
        return values

    def history(self) -> dict:
        """Per-evaluation arrays: eval_index (1-based), k, x, noisy_f, true_f."""
        counts = np.array(self._counts, dtype=np.int64)
        n = len(self._points[0]) if self._points else 0
        return {
            "eval_index": np.arange(1, self.n_evals + 1),
            "k": np.repeat(np.array(self._iters, dtype=np.int64), counts),
            "x": np.repeat(np.array(self._points).reshape(-1, n), counts, axis=0) if n else np.empty((0, 0)),
            "noisy_f": np.concatenate(self._values) if self._values else np.empty(0),
            "true_f": np.repeat(np.array(self._true, dtype=float), counts),
        }


def fresh_estimate(blackbox, x, n_samples: int) -> EstimateRecord:
    """Average of ``n_samples`` independent noisy evaluations at ``x``."""
    if n_samples < 1:
        raise ValueError(f"n_samples must be at least 1, got {n_samples}")
    if isinstance(blackbox, Evaluator):
        values = blackbox.sample(x, n_samples)
    elif hasattr(blackbox, "sample"):
        values = np.asarray(blackbox.sample(x, n_samples), dtype=float)
        if not np.all(np.isfinite(values)):
            raise EvaluationError(f"non-finite blackbox value at x={list(x)}")
    else:
        values = np.array([float(blackbox(np.asarray(x, dtype=float))) for _ in range(n_samples)])
        if not np.all(np.isfinite(values)):
            raise EvaluationError(f"non-finite blackbox value at x={list(x)}")
    return EstimateRecord.from_samples(x, values)


def _as_record(point, fresh) -> EstimateRecord:
    if isinstance(fresh, EstimateRecord):
        return fresh
    return EstimateRecord.from_samples(point, fresh)


def _pool(a: EstimateRecord, b: EstimateRecord) -> EstimateRecord:
    if not np.array_equal(a.point, b.point):
        raise ValueError(f"cannot merge estimates at {a.point.tolist()} and {b.point.tolist()}")
    count = a.count + b.count
    mean = (a.count * a.mean + b.count * b.mean) / count
    delta = b.mean - a.mean
    sum_sq = a.sum_sq + b.sum_sq + delta * delta * a.count * b.count / count
    return EstimateRecord(point=a.point, count=count, mean=mean, sum_sq=sum_sq)


def merge_on_success(prev_trial: EstimateRecord, fresh) -> EstimateRecord:
    """Incumbent estimate after a success: reuse the ``n^k`` trial samples at the new incumbent.

    ``fresh`` is an :class:`EstimateRecord` or the raw new samples.
    """
    return _pool(prev_trial, _as_record(prev_trial.point, fresh))


def merge_on_failure(prev_incumbent: EstimateRecord, fresh) -> EstimateRecord:
    """Incumbent estimate after a failure: pool all ``p^k`` samples with the new ones."""
    return _pool(prev_incumbent, _as_record(prev_incumbent.point, fresh))


def check_accuracy(record: EstimateRecord, true_value: float, params: AccuracyParams, delta_p: float) -> bool:
    return abs(record.mean - true_value) <= params.eps_f * delta_p**2
