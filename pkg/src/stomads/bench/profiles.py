"""Convergence test, data profiles and performance profiles."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConvergenceTest",
    "evals_to_convergence",
    "ProfileTable",
    "data_profile",
    "performance_profile",
    "DATA_ALPHAS",
    "PERF_POINTS",
    "write_svg",
]

DATA_ALPHAS = np.arange(0, 1001, dtype=float)
PERF_POINTS = 512


@dataclass(frozen=True)
class ConvergenceTest:
    """Solved once the true f drops to ``f* + tau_conv (f(x0) - f*)``."""

    tau_conv: float

    def __post_init__(self):
        if not 0 <= self.tau_conv <= 1:
            raise ValueError(f"tau_conv must lie in [0, 1], got {self.tau_conv}")

    def threshold(self, f_x0: float, f_star: float) -> float:
        return f_star + self.tau_conv * (f_x0 - f_star)


def _trace_source(record):
    """(f_x0, f_star, change points, n_evals) from a RunRecord or its JSON summary."""
    if isinstance(record, dict):
        changes = record.get("incumbent_true_f")
        f_x0, f_star, n = record.get("f_x0"), record.get("f_star"), record.get("n_evals", 0)
    else:
        changes = record.incumbent_changes
        f_x0, f_star, n = record.f_x0, record.f_star, record.n_evals
    if changes is None or f_x0 is None or f_star is None:
        raise ValueError("record has no true-f trace")
    vals = [c[1] for c in changes]
    if any(v is None or not math.isfinite(v) for v in vals) or not math.isfinite(f_x0):
        raise ValueError("record has no true-f trace")
    return float(f_x0), float(f_star), changes, int(n)


def evals_to_convergence(record, test: ConvergenceTest) -> float:
    """First 1-based evaluation index at which the best true incumbent f passes ``test``.

    Accepts a :class:`~stomads.solver.RunRecord` or its ``summary()`` dict.
    Returns ``math.inf`` if the test is never passed.
    """
    f_x0, f_star, changes, n = _trace_source(record)
    thr = test.threshold(f_x0, f_star)
    for idx, val in changes:
        if val <= thr and idx <= n:
            return max(1, int(idx)) if n >= 1 else math.inf
    return math.inf


@dataclass(frozen=True)
class ProfileTable:
    """Fraction of problems solved per solver over an ``alpha`` grid."""

    kind: str
    solvers: tuple
    alpha: np.ndarray
    values: np.ndarray  # shape (len(alpha), len(solvers))
    t: np.ndarray  # shape (problems, solvers); inf where unsolved
    scale: np.ndarray  # per-problem divisor of t: (n+1) for data, best t for perf

    def value_at(self, solver, alpha: float) -> float:
        """Exact profile value at any ``alpha``, not only on the grid."""
        j = self.solvers.index(solver) if not isinstance(solver, int) else solver
        ratios = self.t[:, j] / self.scale
        return float(np.count_nonzero(np.isfinite(ratios) & (ratios <= alpha))) / self.t.shape[0]

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", *self.solvers])
        for a, row in zip(self.alpha, self.values):
            w.writerow([repr(float(a)), *(repr(float(v)) for v in row)])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def _as_t_matrix(t_matrix, solvers):
    t = np.array(t_matrix, dtype=float)
    if t.ndim != 2 or t.shape[0] == 0:
        raise ValueError("t_matrix must be a non-empty (problems x solvers) array")
    if np.any(np.isnan(t)) or np.any(t < 0):
        raise ValueError("evaluation counts must be nonnegative or inf")
    if solvers is None:
        solvers = tuple(f"solver{j + 1}" for j in range(t.shape[1]))
    solvers = tuple(solvers)
    if len(solvers) != t.shape[1]:
        raise ValueError(f"{len(solvers)} solver names for {t.shape[1]} columns")
    return t, solvers


def _fractions(ratios, alpha):
    # ratios: (P, S); fraction of rows with ratio <= alpha, for every alpha
    srt = np.sort(ratios, axis=0)
    counts = np.stack([np.searchsorted(srt[:, j], alpha, side="right") for j in range(srt.shape[1])], axis=1)
    return counts / ratios.shape[0]


def data_profile(t_matrix, dims, solvers=None, alpha=None) -> ProfileTable:
    """``d_s(alpha)``: share of problems with ``t_{p,s} / (n_p + 1) <= alpha``."""
    t, solvers = _as_t_matrix(t_matrix, solvers)
    dims = np.asarray(dims, dtype=float).ravel()
    if dims.size != t.shape[0]:
        raise ValueError(f"{dims.size} dimensions for {t.shape[0]} problems")
    alpha = DATA_ALPHAS if alpha is None else np.asarray(alpha, dtype=float)
    scale = dims + 1
    return ProfileTable("data", solvers, alpha, _fractions(t / scale[:, None], alpha), t, scale)


def performance_profile(t_matrix, solvers=None, alpha=None) -> ProfileTable:
    """``rho_s(alpha)``: share of problems with ``t_{p,s} / min_s' t_{p,s'} <= alpha``.

    Problems no solver passes count as unsolved for every solver.
    """
    t, solvers = _as_t_matrix(t_matrix, solvers)
    if t.shape[1] < 2:
        raise ValueError("performance profiles need at least two solvers")
    best = t.min(axis=1)
    # unsolved-by-all rows: inf / inf would be nan, keep them at inf
    scale = np.where(np.isfinite(best), np.maximum(best, 1.0), 1.0)
    ratios = np.where(np.isfinite(best)[:, None], t / scale[:, None], np.inf)
    if alpha is None:
        finite = ratios[np.isfinite(ratios)]
        r_max = max(2.0, float(finite.max())) if finite.size else 2.0
        alpha = 2.0 ** np.linspace(0.0, math.log2(r_max), PERF_POINTS)
        alpha[0], alpha[-1] = 1.0, r_max
    else:
        alpha = np.asarray(alpha, dtype=float)
    # value_at divides t by scale, which reproduces these ratios for solved rows
    t_eff = np.where(np.isfinite(best)[:, None], t, np.inf)
    return ProfileTable("perf", solvers, alpha, _fractions(ratios, alpha), t_eff, scale)


def write_svg(table: ProfileTable, path, width: int = 640, height: int = 400) -> str:
    """Minimal step-plot SVG of a profile for quick inspection."""
    pad = 40
    a = table.alpha
    log_x = table.kind == "perf"
    xs = np.log2(a) if log_x else a
    span = (xs[-1] - xs[0]) or 1.0
    px = pad + (xs - xs[0]) / span * (width - 2 * pad)
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"]
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
             f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" '
             'fill="none" stroke="#888"/>']
    for j, name in enumerate(table.solvers):
        py = height - pad - table.values[:, j] * (height - 2 * pad)
        pts = []
        for i in range(len(px)):
            if i:
                pts.append(f"{px[i]:.1f},{py[i - 1]:.1f}")
            pts.append(f"{px[i]:.1f},{py[i]:.1f}")
        c = colors[j % len(colors)]
        parts.append(f'<polyline fill="none" stroke="{c}" stroke-width="1.5" points="{" ".join(pts)}"/>')
        parts.append(f'<text x="{width - pad - 100}" y="{pad + 16 * (j + 1)}" fill="{c}" '
                     f'font-size="12">{name}</text>')
    xlabel = "log2(ratio)" if log_x else "evaluations / (n+1)"
    parts.append(f'<text x="{width / 2}" y="{height - 8}" font-size="12" text-anchor="middle">{xlabel}</text>')
    parts.append("</svg>")
    text = "\n".join(parts) + "\n"
    with open(path, "w") as fh:
        fh.write(text)
    return text
