"""OrthoMADS 2n poll directions built from a Householder matrix."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import MeshState

__all__ = [
    "PollSet",
    "householder",
    "round_half_away",
    "build_poll_set",
    "next_seed_vector",
    "order_opportunistic",
]

_SEED_STREAM = 0x9011


@dataclass(frozen=True)
class PollSet:
    """``directions`` is a (2n, n) integer array: rows ``b_1..b_n`` then ``-b_1..-b_n``.

    ``order`` is the permutation of row indices used for evaluation.
    """

    directions: np.ndarray
    seed_vector: np.ndarray
    order: tuple

    def __len__(self):
        return len(self.order)

    def ordered(self):
        """Iterate directions in evaluation order."""
        for i in self.order:
            yield self.directions[i]


def householder(v) -> np.ndarray:
    """``I - 2 v v^T`` for a unit vector ``v``."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError(f"v must be a non-empty vector, got shape {v.shape}")
    if abs(np.linalg.norm(v) - 1.0) > 1e-12:
        raise ValueError(f"v must have unit 2-norm, got {np.linalg.norm(v)!r}")
    return np.eye(v.size) - 2.0 * np.outer(v, v)


def round_half_away(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return np.sign(a) * np.floor(np.abs(a) + 0.5)


def build_poll_set(v, state: MeshState) -> PollSet:
    """Poll set ``B ∪ -B`` with ``b_j = round((delta_p/delta_m) h_j / ||h_j||_inf)``."""
    if not state.delta_p >= state.delta_m > 0:
        raise ValueError(f"need delta_p >= delta_m > 0, got {state.delta_p}, {state.delta_m}")
    v = np.asarray(v, dtype=float)
    if v.size != state.dimension:
        raise ValueError(f"seed vector has size {v.size}, expected {state.dimension}")
    H = householder(v)
    col_max = np.max(np.abs(H), axis=0)
    if np.any(col_max == 0):
        raise ValueError("Householder matrix has a zero column")
    B = round_half_away(state.frame_to_mesh_ratio * H / col_max).T.astype(np.int64)
    directions = np.vstack([B, -B])
    return PollSet(directions=directions, seed_vector=v, order=tuple(range(len(directions))))


def next_seed_vector(seed: int, k: int, n: int) -> np.ndarray:
    """Unit vector for iteration ``k``: normalized standard normal draws keyed on ``(seed, k)``."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, _SEED_STREAM, k])))
    while True:
        g = rng.standard_normal(n)
        norm = np.linalg.norm(g)
        if norm > 1e-300:
            return g / norm


def order_opportunistic(poll: PollSet, last_success_dir=None) -> PollSet:
    """Sort directions by decreasing cosine similarity to the last successful direction.

    Ties keep their original index order; without a previous success the
    order is unchanged.
    """
    if last_success_dir is None:
        return poll
    last = np.asarray(last_success_dir, dtype=float)
    norm = np.linalg.norm(last)
    if norm == 0:
        return poll
    D = poll.directions.astype(float)
    cos = D @ last / (np.linalg.norm(D, axis=1) * norm)
    # stable sort on -cos keeps index order among ties
    order = tuple(int(i) for i in np.argsort(-cos, kind="stable"))
    return PollSet(directions=poll.directions, seed_vector=poll.seed_vector, order=order)
