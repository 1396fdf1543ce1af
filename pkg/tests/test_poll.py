import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stomads.mesh import MeshState, is_mesh_point
from stomads.poll import build_poll_set, householder, next_seed_vector, order_opportunistic, round_half_away

R2 = 1 / math.sqrt(2)


@pytest.mark.parametrize("v,H", [
    ((1, 0), [[-1, 0], [0, 1]]),
    ((0, 1), [[1, 0], [0, -1]]),
    ((R2, R2), [[0, -1], [-1, 0]]),
])
def test_householder_examples(v, H):
    assert np.allclose(householder(np.array(v)), H, atol=1e-15)


def test_householder_rejects_non_unit():
    with pytest.raises(ValueError):
        householder([1.0, 1.0])


def unit_vectors(n):
    return st.lists(st.floats(-1, 1), min_size=n, max_size=n).filter(
        lambda v: np.linalg.norm(v) > 1e-3).map(lambda v: np.array(v) / np.linalg.norm(v))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 8).flatmap(unit_vectors))
def test_householder_orthogonal_symmetric(v):
    H = householder(v)
    assert np.allclose(H, H.T)
    assert np.max(np.abs(H.T @ H - np.eye(v.size))) < 1e-10


def test_round_half_away():
    assert round_half_away([0.5, -0.5, 1.5, -2.5, 0.49]).tolist() == [1, -1, 2, -3, 0]


def test_build_examples():
    p = build_poll_set(np.array([1.0, 0.0]), MeshState.from_frame_size(0.5, 2))
    assert p.directions.tolist() == [[-2, 0], [0, 2], [2, 0], [0, -2]]
    p = build_poll_set(np.array([1.0, 0.0]), MeshState(dimension=2))
    assert p.directions[:2].tolist() == [[-1, 0], [0, 1]]
    p = build_poll_set(np.array([R2, R2]), MeshState.from_frame_size(0.25, 2))
    assert p.directions[:2].tolist() == [[0, -4], [-4, 0]]


def test_build_rejects_bad_inputs():
    with pytest.raises(ValueError):
        build_poll_set(np.array([1.0, 0.0, 0.0]), MeshState(dimension=2))


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 7).flatmap(lambda n: st.tuples(unit_vectors(n), st.integers(-10, 12))))
def test_poll_set_invariants(args):
    v, e = args
    n = v.size
    s = MeshState(dimension=n, exponent=e)
    p = build_poll_set(v, s)
    D = p.directions
    assert D.shape == (2 * n, n) and D.dtype.kind == "i"
    assert np.array_equal(D[n:], -D[:n])
    assert np.all(np.any(D != 0, axis=1))
    norms = np.max(np.abs(D), axis=1)
    assert np.all(s.delta_m * norms <= s.delta_p + s.delta_m / 2)
    if s.delta_p <= 1:
        assert np.all(s.delta_p * norms >= 1 - 1e-12)
    # B has full rank, so B and -B positively span R^n
    assert np.linalg.matrix_rank(D[:n].astype(float)) == n
    g = np.random.default_rng(e + 20).normal(size=(200, n))
    assert np.all(np.max(g @ D.T, axis=1) >= 0)
    x = np.linspace(-1, 1, n)
    assert all(is_mesh_point(x + s.delta_m * d, x, s) for d in D)


def test_seed_vector_determinism_and_norm():
    a = next_seed_vector(5, 17, 6)
    assert np.array_equal(a, next_seed_vector(5, 17, 6))
    assert abs(np.linalg.norm(a) - 1) < 1e-12
    assert not np.array_equal(a, next_seed_vector(5, 18, 6))
    assert not np.array_equal(a, next_seed_vector(6, 17, 6))
    for k in range(20):
        assert abs(next_seed_vector(0, k, 1)[0]) == 1.0


def test_seed_vector_angle_coverage():
    ang = np.sort([math.atan2(*next_seed_vector(3, k, 2)[::-1]) % (2 * math.pi) for k in range(100_000)])
    gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * math.pi]]))
    assert np.degrees(gaps.max()) < 1.0


def test_opportunistic_order_examples():
    p = build_poll_set(np.array([1.0, 0.0]), MeshState.from_frame_size(0.5, 2))
    assert list(next(order_opportunistic(p, [1, 0]).ordered())) == [2, 0]
    assert order_opportunistic(p).order == p.order
    assert list(next(order_opportunistic(p, [0, -1]).ordered())) == [0, -2]


def test_opportunistic_ties_keep_index_order():
    p = build_poll_set(np.array([1.0, 0.0]), MeshState.from_frame_size(0.5, 2))
    # (0,2) and (0,-2) are both orthogonal to (1,0): tie, original order 1 before 3
    order = order_opportunistic(p, [1, 0]).order
    assert order == (2, 1, 3, 0)
