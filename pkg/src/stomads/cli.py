"""Command line entry point: ``stomads solve|bench|profiles|blackbox``.

Setting ``STOMADS_SEED`` overrides every ``--seed`` option.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

from .bench import (
    DEFAULT_SIGMAS,
    ConvergenceTest,
    evals_to_convergence,
    load_cells,
    profiles_from_cells,
    run_grid,
    write_svg,
)
from .estimator import EvaluationError
from .problems import NoiseSpec, NoisyProblem, SubprocessBlackbox, get_problem, load_manifest, suite
from .solver import SolverConfig, solve

SEED_ENV = "STOMADS_SEED"


def _floats(text: str) -> list:
    return [float(v) for v in text.replace(" ", "").split(",") if v]


def _seed(args) -> int:
    env = os.environ.get(SEED_ENV)
    return int(env) if env not in (None, "") else args.seed


def _mode(name: str) -> str:
    return "deterministic_mads" if name in ("mads", "deterministic_mads") else "stochastic"


def _write_record(record, out, tau_conv):
    summary = record.summary()
    if tau_conv is not None and math.isfinite(record.f_x0):
        n = evals_to_convergence(record, ConvergenceTest(tau_conv))
        summary["evals_to_convergence"] = n if math.isfinite(n) else None
    if out:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        record.to_csv(out.with_suffix(".csv"))
        out.with_suffix(".json").write_text(json.dumps(summary, indent=1, sort_keys=True))
    keys = ("problem", "n_evals", "n_iterations", "stop_reason", "true_f_final", "f0_final",
            "x_final", "evals_to_convergence")
    print(json.dumps({k: summary[k] for k in keys if k in summary}, indent=1))


def cmd_solve(args) -> int:
    spec = get_problem(args.problem)
    seed = _seed(args)
    noise = NoiseSpec(args.sigma, model=args.noise_model)
    problem = NoisyProblem(spec, noise, seed=seed)
    config = SolverConfig(n_k=args.nk, seed=seed, budget=args.budget, mode=_mode(args.mode),
                          eps_stop=args.eps_stop)
    try:
        record = solve(problem, config)
    except EvaluationError as exc:
        print(f"evaluation error: {exc}", file=sys.stderr)
        rec = getattr(exc, "record", None)
        if rec is not None and args.out:
            _write_record(rec, args.out, None)
        return 1
    _write_record(record, args.out, args.tau_conv)
    return 0


def _parse_variants(text: str) -> dict:
    out = {}
    for name in text.split(","):
        name = name.strip()
        if not name:
            continue
        if name in ("mads", "deterministic_mads"):
            out[name] = SolverConfig(mode="deterministic_mads", n_k=1)
        elif name.startswith("nk") and name[2:].isdigit():
            out[name] = SolverConfig(n_k=int(name[2:]))
        else:
            raise argparse.ArgumentTypeError(f"unknown variant {name!r} (use nk<int> or mads)")
    return out


def _select_problems(text: str) -> list:
    if text == "all":
        return suite()
    names = [t.strip() for t in text.split(",") if t.strip()]
    known = {e["name"] for e in load_manifest()["instances"]}
    tags = [n for n in names if n not in known and not n.startswith("quadratic")]
    picked = [get_problem(n) for n in names if n in known or n.startswith("quadratic")]
    if tags:
        picked += [s for s in suite(tags) if s.name not in {p.name for p in picked}]
    return picked


def cmd_bench(args) -> int:
    try:
        variants = _parse_variants(args.variants)
        problems = _select_problems(args.suite)
    except (KeyError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.budget is not None:
        variants = {k: replace(v, budget=args.budget) for k, v in variants.items()}
    base = _seed(args)
    seeds = [base + i for i in range(args.seeds)]
    res = run_grid(problems, variants, sigmas=_floats(args.sigmas), seeds=seeds, out_dir=args.out,
                   taus=_floats(args.tau), resume=args.resume, workers=args.workers,
                   noise_model=args.noise_model, save_csv=args.save_csv)
    print(f"cells run: {len(res.ran)}, skipped: {len(res.skipped)}, errors: {len(res.errors)}")
    for cid, err in sorted(res.errors.items()):
        print(f"  {cid}: {err}", file=sys.stderr)
    for p in res.profile_files:
        print(f"wrote {p}")
    return 1 if (args.strict and res.errors) else 0


def cmd_profiles(args) -> int:
    src = Path(args.inp)
    records = src / "records" if (src / "records").is_dir() else src
    cells = load_cells(records)
    if not cells:
        print(f"error: no successful run records in {records}", file=sys.stderr)
        return 1
    kinds = ("data", "perf") if args.kind == "both" else (args.kind,)
    variants = sorted({c["variant"] for c in cells})
    if "perf" in kinds and len(variants) < 2:
        print("error: performance profiles need at least two solver variants", file=sys.stderr)
        return 1
    out = Path(args.out) if args.out else src / "profiles"
    written = profiles_from_cells(cells, _floats(args.tau), out, variants=variants, kinds=kinds)
    for p in written:
        print(f"wrote {p}")
        if args.svg:
            _svg_for(p)
    return 0


def _svg_for(csv_path: Path):
    import csv

    import numpy as np

    from .bench.profiles import ProfileTable

    with open(csv_path) as fh:
        rows = list(csv.reader(fh))
    arr = np.array(rows[1:], dtype=float)
    kind = "perf" if csv_path.name.startswith("perf") else "data"
    table = ProfileTable(kind, tuple(rows[0][1:]), arr[:, 0], arr[:, 1:], np.empty((0, 0)), np.empty(0))
    write_svg(table, csv_path.with_suffix(".svg"))


def cmd_blackbox(args) -> int:
    x0 = _floats(args.x0)
    seed = _seed(args)
    config = SolverConfig(n_k=args.nk, seed=seed, budget=args.budget, mode=_mode(args.mode))
    try:
        with SubprocessBlackbox(args.cmd, timeout=args.timeout, dimension=len(x0)) as bb:
            record = solve(bb, config, x0=x0)
    except EvaluationError as exc:
        print(f"evaluation error: {exc}", file=sys.stderr)
        rec = getattr(exc, "record", None)
        if rec is not None and args.out:
            _write_record(rec, args.out, None)
        return 1
    except OSError as exc:
        print(f"cannot start blackbox: {exc}", file=sys.stderr)
        return 1
    _write_record(record, args.out, None)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stomads", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="single run on a suite problem")
    s.add_argument("--problem", default="rosenbrock")
    s.add_argument("--sigma", type=float, default=0.0)
    s.add_argument("--nk", type=int, default=2)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--budget", type=int, default=None)
    s.add_argument("--mode", choices=["stochastic", "mads"], default="stochastic")
    s.add_argument("--noise-model", choices=["component", "additive"], default="component")
    s.add_argument("--eps-stop", type=float, default=0.0)
    s.add_argument("--tau-conv", type=float, default=0.1)
    s.add_argument("--out", default=None, help="path prefix for <out>.csv and <out>.json")
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="problem x variant x noise x seed grid")
    b.add_argument("--suite", default="all", help="'all', or comma-separated instance names / tags")
    b.add_argument("--variants", default="nk1,nk2,nk3,nk4,nk5")
    b.add_argument("--sigmas", default=",".join(f"{s:g}" for s in DEFAULT_SIGMAS))
    b.add_argument("--seeds", type=int, default=1, help="number of seeds per cell")
    b.add_argument("--seed", type=int, default=0, help="first seed")
    b.add_argument("--tau", default="1e-1,1e-3")
    b.add_argument("--budget", type=int, default=None)
    b.add_argument("--noise-model", choices=["component", "additive"], default="component")
    b.add_argument("--resume", action=argparse.BooleanOptionalAction, default=True)
    b.add_argument("--strict", action="store_true", help="exit nonzero if any cell failed")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--save-csv", action="store_true")
    b.add_argument("--out", default="grid")
    b.set_defaults(func=cmd_bench)

    r = sub.add_parser("profiles", help="data/performance profiles from stored runs")
    r.add_argument("--in", dest="inp", required=True)
    r.add_argument("--tau", default="1e-1,1e-3")
    r.add_argument("--kind", choices=["data", "perf", "both"], default="both")
    r.add_argument("--out", default=None)
    r.add_argument("--svg", action="store_true")
    r.set_defaults(func=cmd_profiles)

    x = sub.add_parser("blackbox", help="optimize an external line-protocol blackbox")
    x.add_argument("--cmd", required=True)
    x.add_argument("--x0", required=True, help="comma-separated starting point")
    x.add_argument("--nk", type=int, default=2)
    x.add_argument("--seed", type=int, default=0)
    x.add_argument("--budget", type=int, default=None)
    x.add_argument("--mode", choices=["stochastic", "mads"], default="stochastic")
    x.add_argument("--timeout", type=float, default=60.0)
    x.add_argument("--out", default=None)
    x.set_defaults(func=cmd_blackbox)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
