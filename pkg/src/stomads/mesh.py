"""Mesh and frame size bookkeeping.

The frame size is stored as an integer exponent ``e`` with
``delta_p = tau ** e`` so that repeated enlargements and reductions never
drift. Real values are derived on construction.
"""
from __future__ import annotations

import enum
import math
from functools import lru_cache
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

__all__ = [
    "InvalidMeshState",
    "Outcome",
    "MeshState",
    "mesh_size",
    "sync_mesh_size",
    "apply_outcome",
    "apply_mads_outcome",
    "is_mesh_point",
]

MESH_TOL = 1e-9


class InvalidMeshState(ValueError):
    pass


class Outcome(str, enum.Enum):
    SUCCESS = "success"
    CERTAIN_FAILURE = "certain_failure"
    UNCERTAIN_FAILURE = "uncertain_failure"


@lru_cache(maxsize=4096)
def _sizes(tau: Fraction, exponent: int) -> tuple[float, float]:
    dp = tau**exponent
    return float(dp), float(min(dp, dp * dp))


@lru_cache(maxsize=256)
def _as_tau(tau) -> Fraction:
    if isinstance(tau, float):
        tau = Fraction(tau).limit_denominator(10**6)
    tau = Fraction(tau)
    if not 0 < tau < 1:
        raise InvalidMeshState(f"tau must lie in (0, 1), got {tau}")
    return tau


@dataclass(frozen=True)
class MeshState:
    """Frame/mesh size pair for one iteration.

    ``exponent`` is the integer ``e`` in ``delta_p = tau**e``; the initial
    frame size of 1 corresponds to ``e = 0``. ``z_hat`` caps the frame size
    at ``tau**-z_hat``.
    """

    dimension: int
    exponent: int = 0
    tau: Fraction = Fraction(1, 2)
    z_hat: int = 10
    delta_p: float = field(init=False, repr=False, compare=False)
    delta_m: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "tau", _as_tau(self.tau))
        if self.dimension < 1:
            raise InvalidMeshState(f"dimension must be positive, got {self.dimension}")
        if self.z_hat < 1:
            raise InvalidMeshState(f"z_hat must be a positive integer, got {self.z_hat}")
        if self.exponent < -self.z_hat:
            raise InvalidMeshState(
                f"frame size tau**{self.exponent} exceeds the cap tau**{-self.z_hat}"
            )
        dp, dm = _sizes(self.tau, self.exponent)
        object.__setattr__(self, "delta_p", dp)
        object.__setattr__(self, "delta_m", dm)

    @classmethod
    def from_frame_size(cls, delta_p: float, dimension: int, tau=Fraction(1, 2), z_hat: int = 10):
        """Build a state from a frame size that must be an integer power of ``tau``."""
        tau = _as_tau(tau)
        if not (math.isfinite(delta_p) and delta_p > 0):
            raise InvalidMeshState(f"delta_p must be positive and finite, got {delta_p}")
        e = round(math.log(delta_p) / math.log(tau))
        if not math.isclose(float(tau**e), delta_p, rel_tol=1e-12):
            raise InvalidMeshState(f"delta_p={delta_p} is not an integer power of tau={tau}")
        return cls(dimension=dimension, exponent=e, tau=tau, z_hat=z_hat)

    @property
    def frame_size_exact(self) -> Fraction:
        return self.tau**self.exponent

    @property
    def mesh_size_exact(self) -> Fraction:
        dp = self.frame_size_exact
        return min(dp, dp * dp)

    @property
    def frame_to_mesh_ratio(self) -> float:
        """``delta_p / delta_m``, exactly 1 when delta_p >= 1 and 1/delta_p otherwise."""
        return float(self.frame_size_exact / self.mesh_size_exact)

    @property
    def cap(self) -> float:
        return float(self.tau ** (-self.z_hat))


def mesh_size(delta_p: float) -> float:
    """Mesh size coupled to a frame size: ``min(delta_p, delta_p**2)``."""
    if not (math.isfinite(delta_p) and delta_p > 0):
        raise InvalidMeshState(f"delta_p must be positive and finite, got {delta_p}")
    return min(delta_p, delta_p * delta_p)


def sync_mesh_size(state: MeshState) -> MeshState:
    """Return ``state`` with the mesh size recomputed from the frame size.

    The mesh size is always derived from the exponent, so this only
    re-validates; it is idempotent.
    """
    if not (math.isfinite(state.delta_p) and state.delta_p > 0):
        raise InvalidMeshState(f"delta_p must be positive and finite, got {state.delta_p}")
    return replace(state)


def apply_outcome(state: MeshState, outcome: Outcome) -> MeshState:
    """Frame size update of the stochastic algorithm.

    success: ``min(tau**-2 delta_p, tau**-z_hat)``; certain failure:
    ``tau**2 delta_p``; uncertain failure: ``tau delta_p``.
    """
    outcome = Outcome(outcome)
    e = state.exponent
    if outcome is Outcome.SUCCESS:
        e = max(e - 2, -state.z_hat)
    elif outcome is Outcome.CERTAIN_FAILURE:
        e = e + 2
    else:
        e = e + 1
    return MeshState(state.dimension, e, state.tau, state.z_hat)


def apply_mads_outcome(state: MeshState, success: bool) -> MeshState:
    """Classic MADS update: enlarge by ``1/tau`` (capped) on success, shrink by ``tau`` otherwise."""
    e = max(state.exponent - 1, -state.z_hat) if success else state.exponent + 1
    return MeshState(state.dimension, e, state.tau, state.z_hat)


def is_mesh_point(x, center, state: MeshState, tol: float = MESH_TOL) -> bool:
    """True iff ``(x - center) / delta_m`` is an integer vector up to ``tol``."""
    x = np.asarray(x, dtype=float)
    center = np.asarray(center, dtype=float)
    if x.shape != center.shape or x.ndim != 1 or x.size != state.dimension:
        raise ValueError(
            f"dimension mismatch: x{x.shape}, center{center.shape}, n={state.dimension}"
        )
    y = (x - center) / state.delta_m
    return bool(np.all(np.abs(y - np.round(y)) <= tol))
