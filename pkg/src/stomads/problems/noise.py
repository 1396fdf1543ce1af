"""Stochastic blackboxes built from deterministic problems.

Two noise models:

``component`` (the benchmark model)
    every residual is shifted by an independent draw before squaring,
    ``f_theta(x) = sum_i (f_i(x) + theta_i)^2``. This is biased by
    ``m * Var(theta)``, a constant that does not move the minimizer.
``additive``
    ``f_theta(x) = f(x) + theta``, unbiased with ``Var = a^2 / 3``.

Draws use a counter-based generator: call number ``i`` of a blackbox always
sees the same noise for a given seed, however the calls are batched.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from ..estimator import EvaluationError
from .suite import ProblemSpec

__all__ = ["NoiseSpec", "evaluate_noisy", "NoisyProblem"]


@dataclass(frozen=True)
class NoiseSpec:
    """Noise level ``sigma``; the half width is ``a = sigma * |f(x0) - f*|``.

    ``distribution="gaussian"`` uses a normal with the same variance
    ``a^2 / 3`` as the uniform law.
    """

    sigma: float = 0.0
    distribution: str = "uniform"
    model: str = "component"

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be nonnegative, got {self.sigma}")
        if self.distribution not in ("uniform", "gaussian"):
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if self.model not in ("component", "additive"):
            raise ValueError(f"unknown noise model {self.model!r}")

    def half_width(self, spec: ProblemSpec) -> float:
        return self.sigma * abs(spec.f_x0 - spec.f_star)

    def variance(self, spec: ProblemSpec) -> float:
        """Variance of one draw ``theta``."""
        return self.half_width(spec) ** 2 / 3.0

    def bias(self, spec: ProblemSpec) -> float:
        """``E[f_theta(x)] - f(x)``."""
        if self.model == "additive":
            return 0.0
        return spec.m * self.variance(spec)

    def draws_per_call(self, spec: ProblemSpec) -> int:
        return spec.m if self.model == "component" else 1


def _theta_from_uniform(u, a, distribution):
    if distribution == "uniform":
        return a * (2.0 * u - 1.0)
    # same variance as U[-a, a]
    return (a / math.sqrt(3.0)) * ndtri(u)


def _combine(spec, noise, r, theta):
    # overflow gives inf, which callers report as a non-finite value
    with np.errstate(over="ignore"):
        if noise.model == "component":
            return np.sum((r + theta) ** 2, axis=-1)
        return np.sum(r**2) + theta[..., 0]


def evaluate_noisy(spec: ProblemSpec, noise: NoiseSpec, x, rng: np.random.Generator) -> float:
    """One noisy evaluation with fresh draws from ``rng``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.n,):
        raise ValueError(f"{spec.name} expects x of shape ({spec.n},), got {x.shape}")
    with np.errstate(all="ignore"):
        r = spec.residuals(x)
    if not np.all(np.isfinite(r)):
        raise EvaluationError(f"{spec.name}: non-finite residual at x={x.tolist()}")
    if noise.sigma == 0:
        with np.errstate(over="ignore"):
            return float(np.sum(r**2))
    u = rng.random(noise.draws_per_call(spec))
    theta = _theta_from_uniform(u, noise.half_width(spec), noise.distribution)
    value = float(_combine(spec, noise, r, theta))
    if not math.isfinite(value):
        raise EvaluationError(f"{spec.name}: non-finite noisy value at x={x.tolist()}")
    return value


class NoisyProblem:
    """Seeded stochastic blackbox over a :class:`ProblemSpec`.

    Call ``i`` (0-based, counted across ``__call__`` and ``sample``) reads
    its uniforms from Philox counter block ``i``.
    """

    def __init__(self, spec: ProblemSpec, noise: NoiseSpec | float = 0.0, seed: int = 0):
        if not isinstance(noise, NoiseSpec):
            noise = NoiseSpec(sigma=float(noise))
        self.spec = spec
        self.noise = noise
        self.seed = int(seed)
        self.calls = 0
        self._a = noise.half_width(spec)
        self._draws = noise.draws_per_call(spec)
        # Philox yields four 64-bit words per counter increment
        self._block = -(-self._draws // 4)
        self._key = np.random.SeedSequence(self.seed).generate_state(2, dtype=np.uint64)

    @property
    def dimension(self) -> int:
        return self.spec.n

    @property
    def x0(self) -> np.ndarray:
        return self.spec.x0

    @property
    def f_star(self) -> float:
        return self.spec.f_star

    @property
    def name(self) -> str:
        return self.spec.name

    def true_value(self, x) -> float:
        return self.spec.f(x)

    def _uniforms(self, start: int, n: int) -> np.ndarray:
        counter = np.array([start * self._block, 0, 0, 0], dtype=np.uint64)
        rng = np.random.Generator(np.random.Philox(key=self._key, counter=counter))
        u = rng.random((n, 4 * self._block))
        return u[:, : self._draws]

    def sample(self, x, n: int) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.spec.n,):
            raise ValueError(f"{self.spec.name} expects x of shape ({self.spec.n},), got {x.shape}")
        with np.errstate(all="ignore"):
            r = self.spec.residuals(x)
        if not np.all(np.isfinite(r)):
            self.calls += n
            raise EvaluationError(f"{self.spec.name}: non-finite residual at x={x.tolist()}")
        start = self.calls
        self.calls += n
        if self.noise.sigma == 0:
            with np.errstate(over="ignore"):
                return np.full(n, float(np.sum(r**2)))
        theta = _theta_from_uniform(self._uniforms(start, n), self._a, self.noise.distribution)
        return _combine(self.spec, self.noise, r, theta)

    def __call__(self, x) -> float:
        return float(self.sample(x, 1)[0])
