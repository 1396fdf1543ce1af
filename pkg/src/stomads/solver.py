"""StoMADS main loop, its deterministic MADS baseline, and convergence diagnostics."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple, Optional

import numpy as np

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
from .mesh import MeshState, Outcome, apply_mads_outcome, apply_outcome, is_mesh_point
from .poll import build_poll_set, next_seed_vector, order_opportunistic

__all__ = [
    "IterationOutcome",
    "SolverConfig",
    "IterationRow",
    "RunRecord",
    "NuBeta",
    "classify_iteration",
    "poll_step",
    "solve",
    "phi_diagnostic",
    "psi_diagnostic",
    "choose_nu_beta",
    "lemma_violations",
    "phi_increments",
]

# relative slack on the +-gamma*eps_f*delta_p^2 boundaries, absorbs rounding of the product
_BOUNDARY_RTOL = 1e-12


@dataclass(frozen=True)
class IterationOutcome:
    kind: Outcome
    accepted_direction: Optional[np.ndarray] = None
    decrease: float = math.nan


@dataclass(frozen=True)
class SolverConfig:
    """Run parameters.

    ``budget=None`` means ``1000 (n + 1)`` blackbox calls. ``search`` is an
    optional callable ``(x, state, k) -> iterable of mesh points`` tried
    before the poll. ``theoretical_sampling`` replaces the constant ``n_k``
    by the Chebyshev sample size, which needs ``variance_bound``.
    """

    tau: Fraction = Fraction(1, 2)
    z_hat: int = 10
    gamma: float = 3.4
    eps_f: float = 0.05
    n_k: int = 2
    eps_stop: float = 0.0
    budget: Optional[int] = None
    seed: int = 0
    mode: str = "stochastic"
    search: Optional[Callable] = field(default=None, compare=False)
    theoretical_sampling: bool = False
    variance_bound: Optional[float] = None
    beta: Optional[float] = None
    kappa_F: Optional[float] = None
    nu: Optional[float] = None
    max_iterations: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "tau", Fraction(self.tau).limit_denominator(10**6))
        if not self.gamma > 2:
            raise ValueError(f"gamma must exceed 2, got {self.gamma}")
        if not self.eps_f > 0:
            raise ValueError(f"eps_f must be positive, got {self.eps_f}")
        if not 1 <= self.n_k <= 32:
            raise ValueError(f"n_k must lie in 1..32, got {self.n_k}")
        if self.budget is not None and self.budget < 1:
            raise ValueError(f"budget must be at least 1, got {self.budget}")
        if not self.eps_stop >= 0:
            raise ValueError(f"eps_stop must be nonnegative, got {self.eps_stop}")
        if self.mode not in ("stochastic", "deterministic_mads"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.theoretical_sampling and not (self.variance_bound and self.variance_bound > 0):
            raise ValueError("theoretical sampling needs a positive variance_bound")

    def resolved_budget(self, n: int) -> int:
        return 1000 * (n + 1) if self.budget is None else self.budget

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k != "search"}
        d["tau"] = str(self.tau)
        d["search"] = self.search is not None
        return d


@dataclass
class IterationRow:
    k: int
    delta_m: float
    delta_p: float
    outcome: Optional[str]
    incumbent: np.ndarray
    f0: float
    f0_count: int
    n_samples: int
    decrease: float = math.nan
    accepted_direction: Optional[np.ndarray] = None
    fs: float = math.nan
    true_f_incumbent: float = math.nan
    true_f_trial: float = math.nan
    psi: list = field(default_factory=list)
    phi: float = math.nan
    n_evals: int = 0


class NuBeta(NamedTuple):
    nu: float
    beta: float
    feasible: bool


def classify_iteration(comparisons, gamma: float, eps_f: float, delta_p: float) -> IterationOutcome:
    """Success / certain failure / uncertain failure from ``(direction, f_s - f_0)`` pairs.

    Success takes the first comparison with ``f_s - f_0 <= -gamma eps_f delta_p^2``.
    Certain failure needs every comparison ``>= +gamma eps_f delta_p^2``.
    """
    comparisons = list(comparisons)
    if not comparisons:
        raise ValueError("no comparisons to classify")
    t = gamma * eps_f * delta_p**2 * (1 - _BOUNDARY_RTOL)
    for d, diff in comparisons:
        if diff <= -t:
            return IterationOutcome(Outcome.SUCCESS, None if d is None else np.asarray(d), diff)
    if all(diff >= t for _, diff in comparisons):
        return IterationOutcome(Outcome.CERTAIN_FAILURE, None, min(c[1] for c in comparisons))
    inside = next(diff for _, diff in comparisons if diff < t)
    return IterationOutcome(Outcome.UNCERTAIN_FAILURE, None, inside)


def phi_diagnostic(f_true: float, f_min: float, delta_p: float, nu: float) -> float:
    """``nu (f - f_min) + (1 - nu) delta_p^2``."""
    return nu * (f_true - f_min) + (1 - nu) * delta_p**2


def psi_diagnostic(f_inc: float, f_trial: float, delta_p: float) -> float:
    """Scaled true decrease ``(f(x) - f(x + delta_m d)) / delta_p``; positive when the trial improves."""
    return (f_inc - f_trial) / delta_p


def choose_nu_beta(tau, gamma: float, eps_f: float, kappa_F: float, nu: float | None = None,
                   tol: float = 1e-9) -> NuBeta:
    """Smallest ``nu`` with ``nu/(1-nu) >= 2(tau^-4 - 1)/(eps_f(gamma-2))`` and the
    smallest ``beta`` in (1/2, 1) with ``beta/sqrt(1-beta) >= 4 nu kappa_F/((1-nu)(1-tau^2))``.

    Passing ``nu`` fixes it instead of taking the smallest admissible value.
    ``feasible`` is False when no ``beta <= 1 - tol`` satisfies the bound.
    """
    tau = float(tau)
    if not gamma > 2:
        raise ValueError(f"gamma must exceed 2, got {gamma}")
    if not 0 < tau < 1:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    if nu is None:
        ratio = 2 * (tau**-4 - 1) / (eps_f * (gamma - 2))
        nu = ratio / (1 + ratio)
    one_minus_tau2 = 1 - tau * tau
    rhs = math.inf if one_minus_tau2 == 0 else 4 * nu * kappa_F / ((1 - nu) * one_minus_tau2)

    def g(b):
        return b / math.sqrt(1 - b)

    lo, hi = 0.5 + tol, 1 - tol
    if g(lo) >= rhs:
        return NuBeta(nu, lo, True)
    if not g(hi) >= rhs:
        return NuBeta(nu, math.nan, False)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) >= rhs:
            hi = mid
        else:
            lo = mid
    return NuBeta(nu, hi, True)


@dataclass
class RunRecord:
    """Everything one run produced: per-evaluation history and per-iteration rows."""

    problem: str
    dimension: int
    x0: np.ndarray
    f_x0: float
    f_star: float
    config: dict
    iterations: list
    history: dict
    incumbent_changes: list
    x_final: np.ndarray
    f0_final: float
    f0_count: int
    stop_reason: str
    error: Optional[str] = None
    # mesh and frame size in force when the run stopped
    partial_sizes: tuple = (math.nan, math.nan)

    @property
    def n_evals(self) -> int:
        return len(self.history["eval_index"])

    @property
    def budget_exhausted(self) -> bool:
        return self.stop_reason == "budget"

    def best_true_trace(self) -> np.ndarray:
        """Best true f among incumbents accepted up to each evaluation."""
        idx = np.array([c[0] for c in self.incumbent_changes], dtype=np.int64)
        vals = np.array([c[1] for c in self.incumbent_changes], dtype=float)
        # value in force at eval i is the last change with index <= i
        pos = np.searchsorted(idx, self.history["eval_index"], side="right") - 1
        return np.minimum.accumulate(vals)[pos]

    @property
    def true_f_final(self) -> float:
        for c in reversed(self.incumbent_changes):
            return c[1]
        return math.nan

    @property
    def min_delta_m(self) -> float:
        return min((r.delta_m for r in self.iterations), default=math.nan)

    def to_csv(self, path=None) -> str:
        """CSV with one row per evaluation; returns the text and writes it when ``path`` is given."""
        h = self.history
        by_k = {r.k: r for r in self.iterations}
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eval_index", "k"] + [f"x{i + 1}" for i in range(self.dimension)]
                   + ["noisy_f", "true_f", "delta_m", "delta_p", "outcome"])
        for i in range(self.n_evals):
            k = int(h["k"][i])
            row = by_k.get(k)
            true_f = float(h["true_f"][i])
            w.writerow(
                [int(h["eval_index"][i]), k]
                + [repr(float(v)) for v in h["x"][i]]
                + [repr(float(h["noisy_f"][i])), "" if math.isnan(true_f) else repr(true_f)]
                + ([repr(row.delta_m), repr(row.delta_p), row.outcome or ""] if row else
                   [repr(self.partial_sizes[0]), repr(self.partial_sizes[1]), ""])
            )
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    def summary(self) -> dict:
        trace = [[int(i), float(v)] for i, v in self.incumbent_changes]
        return {
            "problem": self.problem,
            "dimension": self.dimension,
            "x0": [float(v) for v in self.x0],
            "f_x0": _finite_or_none(self.f_x0),
            "f_star": _finite_or_none(self.f_star),
            "config": self.config,
            "n_evals": self.n_evals,
            "n_iterations": len(self.iterations),
            "stop_reason": self.stop_reason,
            "error": self.error,
            "x_final": [float(v) for v in self.x_final],
            "f0_final": _finite_or_none(self.f0_final),
            "f0_count": self.f0_count,
            "true_f_final": _finite_or_none(self.true_f_final),
            "min_delta_m": _finite_or_none(self.min_delta_m),
            "incumbent_true_f": trace,
            "outcomes": {o.value: sum(r.outcome == o.value for r in self.iterations) for o in Outcome},
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.summary(), indent=1, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def _finite_or_none(v):
    return float(v) if v is not None and math.isfinite(v) else None


def _mads_classify(comparisons) -> IterationOutcome:
    for d, diff in comparisons:
        if diff < 0:
            return IterationOutcome(Outcome.SUCCESS, np.asarray(d), diff)
    return IterationOutcome(Outcome.CERTAIN_FAILURE, None, min(c[1] for c in comparisons))


def poll_step(x, incumbent: EstimateRecord, state: MeshState, evaluator: Evaluator,
              config: SolverConfig, k: int, n_samples: int, last_success_dir=None, poll=None):
    """One POLL step around ``x``.

    Trial points ``x + delta_m d`` are estimated in opportunistic order and
    polling stops at the first success. Returns the outcome and the list of
    ``(direction, trial record, f_s - f_0)`` actually evaluated. Raises
    :class:`BudgetExhausted` if the budget runs out mid-poll. ``poll``
    overrides the generated poll set.
    """
    if poll is None:
        v = next_seed_vector(config.seed, k, state.dimension)
        poll = build_poll_set(v, state)
    poll = order_opportunistic(poll, last_success_dir)
    t = config.gamma * config.eps_f * state.delta_p**2 * (1 - _BOUNDARY_RTOL)
    trials = []
    for d in poll.ordered():
        y = x + state.delta_m * d
        rec = fresh_estimate(evaluator, y, n_samples)
        diff = rec.mean - incumbent.mean
        trials.append((d, rec, diff))
        if (diff < 0) if config.mode == "deterministic_mads" else (diff <= -t):
            break
    comparisons = [(d, diff) for d, _, diff in trials]
    if config.mode == "deterministic_mads":
        return _mads_classify(comparisons), trials
    return classify_iteration(comparisons, config.gamma, config.eps_f, state.delta_p), trials


def _search_step(x, incumbent, state, evaluator, config, k, n_samples):
    t = config.gamma * config.eps_f * state.delta_p**2 * (1 - _BOUNDARY_RTOL)
    for p in config.search(np.array(x), state, k) or ():
        p = np.asarray(p, dtype=float)
        if not is_mesh_point(p, x, state):
            raise ValueError(f"search candidate {p.tolist()} is not on the current mesh")
        rec = fresh_estimate(evaluator, p, n_samples)
        diff = rec.mean - incumbent.mean
        ok = diff < 0 if config.mode == "deterministic_mads" else diff <= -t
        if ok:
            d = np.round((p - x) / state.delta_m).astype(np.int64)
            return IterationOutcome(Outcome.SUCCESS, d, diff), rec
    return None, None


def _sample_size(config: SolverConfig, state: MeshState, params: Optional[AccuracyParams]) -> int:
    if params is None:
        return config.n_k
    return required_sample_size(params, state.delta_p)


def _accuracy_params(config: SolverConfig) -> Optional[AccuracyParams]:
    if not config.theoretical_sampling:
        return None
    V = config.variance_bound
    kappa = config.kappa_F if config.kappa_F is not None else math.sqrt(V)
    beta = config.beta
    if beta is None:
        nb = choose_nu_beta(config.tau, config.gamma, config.eps_f, kappa, nu=config.nu)
        if not nb.feasible:
            raise ValueError("no beta < 1 satisfies the convergence bound for this kappa_F")
        beta = nb.beta
    return AccuracyParams(eps_f=config.eps_f, gamma=config.gamma, beta=beta, V=V, kappa_F=kappa)


_EPS = np.finfo(float).eps


def solve(problem, config: SolverConfig | None = None, x0=None) -> RunRecord:
    """Run StoMADS (or the MADS baseline) until the budget or ``eps_stop`` ends it.

    A run also stops (``"mesh_precision"``) once the frame is too small to
    move the incumbent in floating point.

    ``problem`` is a blackbox callable, optionally with ``sample(x, n)``,
    ``true_value(x)``, ``x0``, ``f_star`` and ``name`` attributes (as on
    :class:`~stomads.problems.NoisyProblem`). A bare
    :class:`~stomads.problems.ProblemSpec` is evaluated without noise.
    """
    from .problems import NoisyProblem, ProblemSpec

    config = config or SolverConfig()
    if isinstance(problem, ProblemSpec):
        problem = NoisyProblem(problem, 0.0, seed=config.seed)
    if x0 is None:
        x0 = getattr(problem, "x0", None)
        if x0 is None:
            raise ValueError("x0 is required for a blackbox without a default start")
    x0 = np.array(x0, dtype=float)
    n = x0.size
    dim = getattr(problem, "dimension", None)
    if dim is not None and dim != n:
        raise ValueError(f"x0 has {n} coordinates, problem dimension is {dim}")
    true_value = getattr(problem, "true_value", None)
    f_star = getattr(problem, "f_star", math.nan)
    f_star = math.nan if f_star is None else float(f_star)
    mads = config.mode == "deterministic_mads"
    params = _accuracy_params(config)

    ev = Evaluator(problem, budget=config.resolved_budget(n), true_value=true_value)
    state = MeshState(dimension=n, exponent=0, tau=config.tau, z_hat=config.z_hat)
    x = x0.copy()
    f_x0 = true_value(x0) if true_value else math.nan
    changes = [(0, f_x0)]
    rows = []
    inc = None
    last_outcome = None
    last_dir = None
    stop_reason = "eps_stop"
    error = None
    k = 0
    try:
        while True:
            if config.max_iterations is not None and k >= config.max_iterations:
                stop_reason = "max_iterations"
                break
            ev.iteration = k
            nk = _sample_size(config, state, params)
            if inc is None:
                inc = fresh_estimate(ev, x, nk)
            elif not mads:
                merge = merge_on_success if last_outcome is Outcome.SUCCESS else merge_on_failure
                inc = merge(inc, fresh_estimate(ev, x, nk))
            row = IterationRow(k=k, delta_m=state.delta_m, delta_p=state.delta_p, outcome=None,
                               incumbent=x.copy(), f0=inc.mean, f0_count=inc.count, n_samples=nk,
                               true_f_incumbent=true_value(x) if true_value else math.nan)

            outcome, accepted = None, None
            if config.search is not None:
                outcome, accepted = _search_step(x, inc, state, ev, config, k, nk)
            if outcome is None:
                outcome, trials = poll_step(x, inc, state, ev, config, k, nk, last_dir)
                for d, rec, _ in trials:
                    if true_value:
                        row.psi.append(psi_diagnostic(row.true_f_incumbent, true_value(rec.point),
                                                      state.delta_p))
                if outcome.kind is Outcome.SUCCESS:
                    accepted = trials[-1][1]

            row.outcome = outcome.kind.value
            row.decrease = outcome.decrease
            row.n_evals = ev.n_evals
            if outcome.kind is Outcome.SUCCESS:
                row.accepted_direction = outcome.accepted_direction
                row.fs = accepted.mean
                row.true_f_trial = true_value(accepted.point) if true_value else math.nan
                x = accepted.point.copy()
                inc = accepted
                last_dir = outcome.accepted_direction
                changes.append((ev.n_evals, row.true_f_trial))
            rows.append(row)

            done = state.delta_p < config.eps_stop
            if mads:
                state = apply_mads_outcome(state, outcome.kind is Outcome.SUCCESS)
            else:
                state = apply_outcome(state, outcome.kind)
            last_outcome = outcome.kind
            k += 1
            if done:
                break
            # below this frame size every trial point rounds back to x
            if state.delta_p < _EPS * max(1.0, float(np.max(np.abs(x)))):
                stop_reason = "mesh_precision"
                break
    except BudgetExhausted:
        stop_reason = "budget"
    except EvaluationError as exc:
        stop_reason = "error"
        error = str(exc)

    record = RunRecord(
        problem=getattr(problem, "name", type(problem).__name__),
        dimension=n,
        x0=x0,
        f_x0=f_x0,
        f_star=f_star,
        config=config.to_dict(),
        iterations=rows,
        history=ev.history(),
        incumbent_changes=changes,
        x_final=x,
        f0_final=inc.mean if inc is not None else math.nan,
        f0_count=inc.count if inc is not None else 0,
        stop_reason=stop_reason,
        error=error,
        partial_sizes=(state.delta_m, state.delta_p),
    )
    _fill_phi(record, config)
    if error is not None:
        exc = EvaluationError(error)
        exc.record = record
        raise exc
    return record


def _fill_phi(record: RunRecord, config: SolverConfig):
    if not record.iterations or math.isnan(record.iterations[0].true_f_incumbent):
        return
    nu = config.nu
    if nu is None:
        nu = choose_nu_beta(config.tau, config.gamma, config.eps_f, 1.0).nu
    f_min = record.f_star
    if math.isnan(f_min):
        f_min = min(r.true_f_incumbent for r in record.iterations)
    for r in record.iterations:
        r.phi = phi_diagnostic(r.true_f_incumbent, f_min, r.delta_p, nu)


def phi_increments(record: RunRecord) -> np.ndarray:
    """``Phi_{k+1} - Phi_k`` over consecutive completed iterations."""
    phi = np.array([r.phi for r in record.iterations], dtype=float)
    return np.diff(phi)


def lemma_violations(record: RunRecord, gamma: float | None = None, eps_f: float | None = None) -> list:
    """Successful iterations whose estimates were both accurate yet the true decrease
    exceeds ``-(gamma - 2) eps_f delta_p^2``. Returns ``(k, decrease, bound)`` triples."""
    gamma = record.config["gamma"] if gamma is None else gamma
    eps_f = record.config["eps_f"] if eps_f is None else eps_f
    params = AccuracyParams(eps_f=eps_f, gamma=gamma)
    out = []
    for r in record.iterations:
        if r.outcome != Outcome.SUCCESS.value or math.isnan(r.true_f_trial):
            continue
        acc0 = check_accuracy(EstimateRecord(r.incumbent, r.f0_count, r.f0), r.true_f_incumbent,
                              params, r.delta_p)
        accs = abs(r.fs - r.true_f_trial) <= eps_f * r.delta_p**2
        if not (acc0 and accs):
            continue
        decrease = r.true_f_trial - r.true_f_incumbent
        bound = -(gamma - 2) * eps_f * r.delta_p**2
        slack = 1e-12 * (1 + abs(r.true_f_incumbent) + abs(r.true_f_trial))
        if decrease > bound + slack:
            out.append((r.k, decrease, bound))
    return out
