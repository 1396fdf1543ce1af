"""Resumable problem x variant x noise x seed grids."""
from __future__ import annotations

import json
import math
import os
import tempfile
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..problems import NoiseSpec, NoisyProblem, ProblemSpec, get_problem
from ..solver import SolverConfig, solve
from .profiles import ConvergenceTest, data_profile, evals_to_convergence, performance_profile

__all__ = ["DEFAULT_SIGMAS", "default_variants", "cell_id", "Cell", "GridResult", "run_grid",
           "load_cells", "profiles_from_cells"]

DEFAULT_SIGMAS = (0.01, 0.03, 0.05)


def default_variants(max_nk: int = 5) -> dict:
    """StoMADS with ``n_k = 1..max_nk`` samples per estimate."""
    return {f"nk{i}": SolverConfig(n_k=i) for i in range(1, max_nk + 1)}


def cell_id(problem: str, variant: str, sigma: float, seed: int) -> str:
    return f"{problem}__{variant}__sigma{sigma:g}__seed{seed}"


@dataclass(frozen=True)
class Cell:
    problem: str
    variant: str
    sigma: float
    seed: int

    @property
    def id(self) -> str:
        return cell_id(self.problem, self.variant, self.sigma, self.seed)


@dataclass
class GridResult:
    out_dir: Path
    ran: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    errors: dict = field(default_factory=dict)
    profile_files: list = field(default_factory=list)


def _atomic_write(path: Path, text: str):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _run_cell(spec: ProblemSpec, cell: Cell, config: SolverConfig, noise_model: str,
              records_dir: str, save_csv: bool) -> tuple:
    records_dir = Path(records_dir)
    base = {"cell": cell.id, "problem": cell.problem, "variant": cell.variant,
            "sigma": cell.sigma, "seed": cell.seed}
    try:
        problem = NoisyProblem(spec, NoiseSpec(cell.sigma, model=noise_model), seed=cell.seed)
        record = solve(problem, replace(config, seed=cell.seed))
        summary = {**base, "status": "ok", **record.summary()}
        if save_csv:
            _atomic_write(records_dir / f"{cell.id}.csv", record.to_csv())
        _atomic_write(records_dir / f"{cell.id}.json", json.dumps(summary, indent=1, sort_keys=True))
        return cell.id, None
    except Exception as exc:  # recorded per cell, the grid goes on
        err = f"{type(exc).__name__}: {exc}"
        payload = {**base, "status": "error", "error": err, "traceback": traceback.format_exc()}
        _atomic_write(records_dir / f"{cell.id}.json", json.dumps(payload, indent=1, sort_keys=True))
        return cell.id, err


def _done(path: Path) -> bool:
    try:
        return json.loads(path.read_text()).get("status") == "ok"
    except (OSError, ValueError):
        return False


def run_grid(problems, variants: dict, sigmas=DEFAULT_SIGMAS, seeds=(0,), out_dir="grid",
             taus=(1e-1,), resume: bool = True, workers: int | None = 1,
             noise_model: str = "component", save_csv: bool = False) -> GridResult:
    """Run every (problem, variant, sigma, seed) cell and write profile CSVs.

    Each cell leaves ``<out_dir>/records/<cell>.json``; with ``resume`` cells
    already recorded as ok are skipped. Failed cells are recorded and
    retried on the next invocation. Profiles go to ``<out_dir>/profiles``.
    """
    out = Path(out_dir)
    records_dir = out / "records"
    records_dir.mkdir(parents=True, exist_ok=True)
    specs = [get_problem(p) if isinstance(p, str) else p for p in problems]
    if not specs:
        raise ValueError("empty problem list")
    if not variants:
        raise ValueError("no solver variants given")
    result = GridResult(out)
    todo = []
    for spec in specs:
        for vname, cfg in variants.items():
            for sigma in sigmas:
                for seed in seeds:
                    cell = Cell(spec.name, vname, float(sigma), int(seed))
                    if resume and _done(records_dir / f"{cell.id}.json"):
                        result.skipped.append(cell.id)
                    else:
                        todo.append((spec, cell, cfg, noise_model, str(records_dir), save_csv))
    if workers == 1 or len(todo) <= 1:
        outcomes = [_run_cell(*args) for args in todo]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_cell, *zip(*todo)))
    for cid, err in outcomes:
        result.ran.append(cid)
        if err is not None:
            result.errors[cid] = err
    cells = load_cells(records_dir)
    result.profile_files = profiles_from_cells(cells, taus, out / "profiles",
                                               variants=list(variants), sigmas=sigmas)
    return result


def load_cells(records_dir) -> list:
    """Successful cell summaries found in ``records_dir``."""
    cells = []
    for path in sorted(Path(records_dir).glob("*.json")):
        data = json.loads(path.read_text())
        if data.get("status") == "ok":
            cells.append(data)
    return cells


def _t_matrix(cells, variants, tau):
    test = ConvergenceTest(tau)
    rows = {}
    dims = {}
    for c in cells:
        if c["variant"] not in variants:
            continue
        key = (c["problem"], c["seed"])
        rows.setdefault(key, {})[c["variant"]] = evals_to_convergence(c, test)
        dims[key] = c["dimension"]
    keys = sorted(k for k, v in rows.items() if len(v) == len(variants))
    t = np.array([[rows[k][v] for v in variants] for k in keys], dtype=float).reshape(len(keys), len(variants))
    return t, np.array([dims[k] for k in keys]), keys


def profiles_from_cells(cells, taus, out_dir, variants=None, sigmas=None, kinds=("data", "perf")) -> list:
    """Write ``{kind}_sigma{s}_tau{t}.csv`` for each noise level and tolerance.

    Only (problem, seed) rows run by every variant enter a profile.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if variants is None:
        variants = sorted({c["variant"] for c in cells})
    if sigmas is None:
        sigmas = sorted({c["sigma"] for c in cells})
    written = []
    for sigma in sigmas:
        group = [c for c in cells if math.isclose(c["sigma"], float(sigma), rel_tol=0, abs_tol=1e-15)]
        for tau in taus:
            t, dims, keys = _t_matrix(group, variants, tau)
            if not keys:
                continue
            for kind in kinds:
                if kind == "perf" and len(variants) < 2:
                    continue
                table = data_profile(t, dims, variants) if kind == "data" else performance_profile(t, variants)
                path = out / f"{kind}_sigma{float(sigma):g}_tau{tau:g}.csv"
                _atomic_write(path, table.to_csv())
                written.append(path)
    return written
