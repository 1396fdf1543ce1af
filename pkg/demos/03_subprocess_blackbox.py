# %% [markdown]
# # Optimizing an external program
#
# Any executable that reads one point per line (space-separated floats) on
# stdin and answers one float per line on stdout can be optimized. Here the
# child is a small noisy Python script.

# %%
import sys
import tempfile
import textwrap
from pathlib import Path

from stomads import SolverConfig, solve
from stomads.problems import SubprocessBlackbox

child = Path(tempfile.mkdtemp()) / "noisy_bowl.py"
child.write_text(textwrap.dedent("""
    import random, sys
    rng = random.Random(3)
    for line in sys.stdin:
        x = [float(v) for v in line.split()]
        f = (x[0] - 1) ** 2 + 4 * (x[1] + 0.5) ** 2
        print(f * (1 + rng.uniform(-0.02, 0.02)), flush=True)
"""))

# %%
with SubprocessBlackbox([sys.executable, str(child)], dimension=2, timeout=10) as bb:
    rec = solve(bb, SolverConfig(n_k=3, seed=0, budget=900), x0=[4.0, 3.0])
print(rec.stop_reason, rec.n_evals, "evals, x_final", rec.x_final, "estimate", rec.f0_final)

# %% the same thing from the shell:
#   stomads blackbox --cmd "python3 noisy_bowl.py" --x0 4,3 --nk 3 --budget 900
