import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stomads.bench import (
    ConvergenceTest,
    data_profile,
    evals_to_convergence,
    load_cells,
    performance_profile,
    run_grid,
    write_svg,
)
from stomads.problems import NoisyProblem, get_problem
from stomads.solver import SolverConfig, solve

DATA = Path(__file__).parent / "data"
INF = math.inf
GOLDEN_T = [[6, 12], [INF, 40], [25, INF]]
GOLDEN_DIMS = [2, 3, 4]


def test_rosenbrock_threshold():
    spec = get_problem("rosenbrock")
    assert ConvergenceTest(0.1).threshold(spec.f_x0, spec.f_star) == pytest.approx(2.42, rel=1e-14)
    with pytest.raises(ValueError):
        ConvergenceTest(1.5)


def _summary(changes, n, f_x0=10.0, f_star=0.0):
    return {"incumbent_true_f": changes, "n_evals": n, "f_x0": f_x0, "f_star": f_star}


def test_evals_to_convergence_cases():
    test = ConvergenceTest(0.1)
    assert evals_to_convergence(_summary([[0, 0.5]], 10), test) == 1
    assert evals_to_convergence(_summary([[0, 10.0], [7, 5.0]], 50), test) == INF
    assert evals_to_convergence(_summary([[0, 10.0], [7, 5.0], [19, 0.9]], 50), test) == 19
    with pytest.raises(ValueError):
        evals_to_convergence(_summary([[0, None]], 5), test)


def test_evals_to_convergence_matches_trace():
    rec = solve(NoisyProblem(get_problem("rosenbrock"), 0.01, seed=2), SolverConfig(seed=2, budget=1500))
    test = ConvergenceTest(0.1)
    trace = rec.best_true_trace()
    n = evals_to_convergence(rec, test)
    thr = test.threshold(rec.f_x0, rec.f_star)
    hits = np.nonzero(trace <= thr)[0]
    assert n == (hits[0] + 1 if hits.size else INF)
    assert evals_to_convergence(rec.summary(), test) == n


def test_data_profile_examples():
    t = data_profile([[30], [INF]], [2, 3])
    assert t.value_at(0, 10) == 0.5 and t.value_at(0, 9) == 0.0
    assert np.all(data_profile([[INF, INF]] * 3, [2, 3, 4]).values == 0)
    ones = data_profile([[1, 1], [1, 1]], [2, 5])
    assert ones.value_at(0, 1 / 3) == 1.0 and ones.value_at(1, 0.2) == 0.5
    with pytest.raises(ValueError):
        data_profile(np.empty((0, 2)), [])


def test_performance_profile_examples():
    t = performance_profile([[10, 20]])
    assert t.value_at(0, 1) == 1 and t.value_at(1, 1) == 0 and t.value_at(1, 2) == 1
    same = performance_profile([[5, 5], [INF, INF], [7, 7]])
    assert np.array_equal(same.values[:, 0], same.values[:, 1])
    assert same.value_at(0, 1) == pytest.approx(2 / 3)
    never = performance_profile([[5, INF], [8, INF]])
    assert np.all(never.values[:, 1] == 0)
    with pytest.raises(ValueError):
        performance_profile([[1], [2]])


t_entries = st.one_of(st.just(INF), st.integers(1, 5000).map(float))


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 6).flatmap(lambda p: st.tuples(
    st.lists(st.lists(t_entries, min_size=3, max_size=3), min_size=p, max_size=p),
    st.lists(st.integers(2, 12), min_size=p, max_size=p))))
def test_profile_range_and_monotonicity(args):
    t, dims = args
    for table in (data_profile(t, dims), performance_profile(t)):
        v = table.values
        assert np.all((v >= 0) & (v <= 1))
        assert np.all(np.diff(v, axis=0) >= 0)
        assert np.all(np.diff(table.alpha) > 0)
    tt = np.array(t)
    d = data_profile(t, dims)
    # below every finite alpha value the profile is zero
    lo = np.min(tt / (np.array(dims)[:, None] + 1))
    assert all(d.value_at(j, min(lo, 1e9) * 0.999) == 0 for j in range(3))
    assert all(d.value_at(j, INF) == np.mean(np.isfinite(tt[:, j])) for j in range(3))
    assert len(d.alpha) == 1001 and d.alpha[-1] == 1000
    assert len(performance_profile(t).alpha) == 512


def test_golden_profiles(tmp_path):
    d = data_profile(GOLDEN_T, GOLDEN_DIMS, solvers=["A", "B"])
    p = performance_profile(GOLDEN_T, solvers=["A", "B"])
    assert d.to_csv(tmp_path / "d.csv") == (DATA / "golden_data_profile.csv").read_text()
    assert p.to_csv(tmp_path / "p.csv") == (DATA / "golden_perf_profile.csv").read_text()


def test_svg(tmp_path):
    text = write_svg(performance_profile(GOLDEN_T, solvers=["A", "B"]), tmp_path / "p.svg")
    assert text.startswith("<svg") and text.count("<polyline") == 2


def test_grid_accounting_and_resume(tmp_path):
    variants = {"nk1": SolverConfig(n_k=1, budget=120), "nk2": SolverConfig(n_k=2, budget=120)}
    probs = ["rosenbrock_s1", "beale_s1"]
    res = run_grid(probs, variants, sigmas=[0.01], seeds=[0], out_dir=tmp_path, workers=1)
    assert len(res.ran) == 4 and not res.errors
    assert len(list((tmp_path / "records").glob("*.json"))) == 4
    assert sorted(p.name for p in res.profile_files) == ["data_sigma0.01_tau0.1.csv",
                                                         "perf_sigma0.01_tau0.1.csv"]
    first = {p.name: p.read_text() for p in (tmp_path / "records").glob("*.json")}
    again = run_grid(probs, variants, sigmas=[0.01], seeds=[0], out_dir=tmp_path, workers=1)
    assert again.ran == [] and len(again.skipped) == 4
    assert {p.name: p.read_text() for p in (tmp_path / "records").glob("*.json")} == first
    for c in load_cells(tmp_path / "records"):
        assert c["n_evals"] <= 120


def test_grid_records_cell_errors_and_continues(tmp_path):
    variants = {"ok": SolverConfig(n_k=1, budget=50),
                "bad": SolverConfig(theoretical_sampling=True, variance_bound=1.0, kappa_F=1e9)}
    res = run_grid(["rosenbrock_s1"], variants, sigmas=[0.01], out_dir=tmp_path, workers=1)
    assert list(res.errors) == ["rosenbrock_s1__bad__sigma0.01__seed0"]
    bad = json.loads((tmp_path / "records" / "rosenbrock_s1__bad__sigma0.01__seed0.json").read_text())
    assert bad["status"] == "error" and "beta" in bad["error"]
    assert len(load_cells(tmp_path / "records")) == 1


def test_grid_process_pool_matches_serial(tmp_path):
    variants = {"nk1": SolverConfig(n_k=1, budget=90), "nk3": SolverConfig(n_k=3, budget=90)}
    a = run_grid(["rosenbrock_s1", "wood_s1"], variants, sigmas=[0.03], out_dir=tmp_path / "a", workers=1)
    b = run_grid(["rosenbrock_s1", "wood_s1"], variants, sigmas=[0.03], out_dir=tmp_path / "b", workers=2)
    for pa in sorted((tmp_path / "a" / "records").glob("*.json")):
        assert pa.read_text() == (tmp_path / "b" / "records" / pa.name).read_text()
    for pa in a.profile_files:
        assert pa.read_text() == (tmp_path / "b" / "profiles" / pa.name).read_text()
