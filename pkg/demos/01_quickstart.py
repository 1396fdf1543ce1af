# %% [markdown]
# # StoMADS quickstart
#
# Minimize the 2-D Rosenbrock function under 1% component noise with two
# samples per estimate, then compare with deterministic MADS on the clean
# function.

# %%
import numpy as np

from stomads import SolverConfig, solve
from stomads.bench import ConvergenceTest, evals_to_convergence
from stomads.problems import NoisyProblem, get_problem

spec = get_problem("rosenbrock")
print(spec.name, "n =", spec.n, "x0 =", spec.x0, "f(x0) =", spec.f(spec.x0))

# %%
noisy = NoisyProblem(spec, 0.01, seed=7)
rec = solve(noisy, SolverConfig(n_k=2, seed=7))
print(rec.stop_reason, rec.n_evals, "evals")
print("x_final", rec.x_final, "true f", rec.true_f_final)

# %% outcome counts and the smallest mesh reached
summary = rec.summary()
print(summary["outcomes"], "min delta_m", rec.min_delta_m)

# %% evaluations needed to close 90% and 99.9% of the gap to f*
for tau in (1e-1, 1e-3):
    print(tau, evals_to_convergence(rec, ConvergenceTest(tau)))

# %% deterministic MADS on the noiseless problem
mads = solve(spec, SolverConfig(mode="deterministic_mads", n_k=1, budget=3000))
print("MADS:", mads.true_f_final, "after", mads.n_evals, "evals")

# %% best-so-far true value, every 300 evaluations
trace = rec.best_true_trace()
print(np.round(trace[::300], 4))
