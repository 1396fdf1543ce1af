# %% [markdown]
# # Sample size versus noise level
#
# A small grid: six suite instances, StoMADS with n_k = 1, 2, 4 and
# deterministic MADS, three noise levels, two seeds. Results land in
# demo_grid/, and a second call resumes instead of recomputing.

# %%
import tempfile
from pathlib import Path

import numpy as np

from stomads import SolverConfig
from stomads.bench import load_cells, run_grid
from stomads.problems import get_problem

problems = [get_problem(p) for p in ("rosenbrock", "beale", "helical_valley",
                                     "powell_singular", "box_3d", "wood")]
variants = {f"nk{i}": SolverConfig(n_k=i, budget=1500) for i in (1, 2, 4)}
variants["mads"] = SolverConfig(mode="deterministic_mads", n_k=1, budget=1500)

out = Path(tempfile.mkdtemp()) / "demo_grid"
res = run_grid(problems, variants, sigmas=(0.01, 0.03, 0.05), seeds=(0, 1), out_dir=out,
               taus=(1e-1, 1e-3))
print(len(res.ran), "cells run,", len(res.errors), "errors")

# %% running again skips everything already on disk
again = run_grid(problems, variants, sigmas=(0.01, 0.03, 0.05), seeds=(0, 1), out_dir=out,
                 taus=(1e-1, 1e-3))
print(len(again.ran), "run,", len(again.skipped), "skipped")

# %% final true f per variant, averaged over problems and seeds, per noise level
cells = load_cells(out / "records")
for sigma in (0.01, 0.03, 0.05):
    row = {}
    for v in variants:
        vals = [c["true_f_final"] for c in cells if c["variant"] == v and c["sigma"] == sigma]
        row[v] = np.median(vals)
    print(sigma, {k: f"{x:.3g}" for k, x in row.items()})

# %% data profile at tau = 1e-3, sigma = 3%: share solved within alpha (n+1) evaluations
prof = (out / "profiles" / "data_sigma0.03_tau0.001.csv").read_text().splitlines()
print(prof[0])
for line in prof[1::100]:
    print(line)
