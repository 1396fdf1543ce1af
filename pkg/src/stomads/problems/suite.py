"""Benchmark suite: 25 sum-of-squares functions, 3 starting points each."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import partial
from importlib import resources

import numpy as np

from . import functions as F

__all__ = ["ProblemSpec", "FUNCTIONS", "START_SCALES", "build_manifest", "load_manifest",
           "suite", "get_problem", "quadratic"]

MANIFEST_VERSION = 1
START_SCALES = (1, 10, 100)
# 100x overflows exp() in jennrich-sampson; use 0.1x instead
START_SCALE_OVERRIDES = {"jennrich_sampson": (1, 10, 0.1)}


@dataclass(frozen=True)
class ProblemSpec:
    """A least-squares objective ``f(x) = sum_i r_i(x)^2`` with a start and best known minimum."""

    name: str
    n: int
    m: int
    residuals: object = field(repr=False, compare=False)
    x0: np.ndarray = field(repr=False, compare=False)
    f_star: float = 0.0
    tags: tuple = ()
    provenance: str = "analytic"

    @property
    def dimension(self) -> int:
        return self.n

    def f(self, x) -> float:
        with np.errstate(over="ignore"):
            r = self.residuals(np.asarray(x, dtype=float))
            return float(np.sum(r**2))

    @property
    def f_x0(self) -> float:
        return self.f(self.x0)


# name -> (residual callable, n, m, base start, f_star, provenance)
FUNCTIONS = {
    "linear_full_rank": (partial(F.linear_full_rank, m=45), 9, 45, np.ones(9), 36.0, "analytic"),
    "linear_rank_one": (partial(F.linear_rank_one, m=35), 7, 35, np.ones(7),
                        35 * 34 / (2 * 71), "analytic"),
    "linear_rank_one_zero": (partial(F.linear_rank_one_zero, m=35), 7, 35, np.ones(7),
                             (35**2 + 3 * 35 - 6) / (2 * (2 * 35 - 3)), "analytic"),
    "rosenbrock": (F.rosenbrock, 2, 2, np.array([-1.2, 1.0]), 0.0, "analytic"),
    "helical_valley": (F.helical_valley, 3, 3, np.array([-1.0, 0.0, 0.0]), 0.0, "analytic"),
    "powell_singular": (F.powell_singular, 4, 4, np.array([3.0, -1.0, 0.0, 1.0]), 0.0, "analytic"),
    "freudenstein_roth": (F.freudenstein_roth, 2, 2, np.array([0.5, -2.0]), 0.0, "analytic"),
    "bard": (F.bard, 3, 15, np.ones(3), 8.21487730657897e-3, "literature"),
    "kowalik_osborne": (F.kowalik_osborne, 4, 11, np.array([0.25, 0.39, 0.415, 0.39]),
                        3.07505603849238e-4, "literature"),
    "meyer": (F.meyer, 3, 16, np.array([0.02, 4000.0, 250.0]), 87.9458551704, "literature"),
    "watson": (F.watson, 6, 31, 0.5 * np.ones(6), 2.28767005355e-3, "literature"),
    "box_3d": (partial(F.box_3d, m=10), 3, 10, np.array([0.0, 10.0, 20.0]), 0.0, "analytic"),
    "jennrich_sampson": (partial(F.jennrich_sampson, m=10), 2, 10, np.array([0.3, 0.4]),
                         124.362182355, "literature"),
    "brown_dennis": (partial(F.brown_dennis, m=20), 4, 20, np.array([25.0, 5.0, -5.0, -1.0]),
                     85822.2016263563, "literature"),
    "chebyquad": (partial(F.chebyquad, m=6), 6, 6, np.arange(1, 7) / 7.0, 0.0, "literature"),
    "brown_almost_linear": (F.brown_almost_linear, 10, 10, 0.5 * np.ones(10), 0.0, "analytic"),
    "osborne_1": (F.osborne_1, 5, 33, np.array([0.5, 1.5, 1.0, 0.01, 0.02]),
                  5.46489469748e-5, "literature"),
    "osborne_2": (F.osborne_2, 11, 65,
                  np.array([1.3, 0.65, 0.65, 0.7, 0.6, 3.0, 5.0, 7.0, 2.0, 4.5, 5.5]),
                  4.01377362935e-2, "literature"),
    "bdqrtic": (F.bdqrtic, 8, 8, np.ones(8), 10.2389734213174, "literature"),
    "cube": (F.cube, 5, 5, 0.5 * np.ones(5), 0.0, "analytic"),
    "mancino": (F.mancino, 5, 5, F.mancino_start(5), 0.0, "literature"),
    "heart8": (F.heart8, 8, 8, np.array([-0.3, -0.39, 0.3, -0.344, -1.2, 2.69, 1.59, -1.5]),
               0.0, "literature"),
    # classic extras outside the 22 above
    "wood": (F.wood, 4, 6, np.array([-3.0, -1.0, -3.0, -1.0]), 0.0, "analytic"),
    "trigonometric": (F.trigonometric, 5, 5, np.full(5, 0.2), 0.0, "literature"),
    "beale": (F.beale, 2, 3, np.ones(2), 0.0, "analytic"),
}


def _scale_tag(s) -> str:
    return f"s{s:g}".replace(".", "p")


def build_manifest() -> dict:
    """Manifest of every (function, start scale) instance."""
    instances = []
    for fname, (res, n, m, base, f_star, prov) in FUNCTIONS.items():
        for scale in START_SCALE_OVERRIDES.get(fname, START_SCALES):
            x0 = scale * base
            tag = _scale_tag(scale)
            instances.append({
                "name": f"{fname}_{tag}",
                "function": fname,
                "n": n,
                "m": m,
                "start_scale": scale,
                "x0": [float(v) for v in x0],
                "f_x0": float(np.sum(res(x0) ** 2)),
                "f_star": float(f_star),
                "provenance": prov,
                "tags": [fname, tag, "zero_residual" if f_star == 0 else "nonzero_residual"],
            })
    return {
        "version": MANIFEST_VERSION,
        "description": ("22 More-Wild sum-of-squares functions plus wood, trigonometric (n=5) and "
                        "beale; starts x0 * 10^s, s in {0,1,2}, except jennrich_sampson which uses "
                        "s in {0,1,-1} because 100 x0 overflows; f_star is the global minimum "
                        "(analytic) or the best published value (literature)"),
        "instances": instances,
    }


def load_manifest() -> dict:
    text = resources.files("stomads.problems").joinpath("manifest.json").read_text()
    manifest = json.loads(text)
    if manifest.get("version") != MANIFEST_VERSION:
        raise ValueError(f"unsupported manifest version {manifest.get('version')!r}")
    return manifest


def _spec_from_entry(entry: dict) -> ProblemSpec:
    res = FUNCTIONS[entry["function"]][0]
    spec = ProblemSpec(
        name=entry["name"],
        n=entry["n"],
        m=entry["m"],
        residuals=res,
        x0=np.array(entry["x0"], dtype=float),
        f_star=entry["f_star"],
        tags=tuple(entry["tags"]),
        provenance=entry["provenance"],
    )
    if not spec.f_x0 > spec.f_star:
        raise ValueError(f"{spec.name}: f(x0)={spec.f_x0} does not exceed f*={spec.f_star}")
    return spec


def suite(tags=None) -> list:
    """Suite instances; with ``tags``, those carrying any of the given tags."""
    entries = load_manifest()["instances"]
    if tags is not None:
        tags = {tags} if isinstance(tags, str) else set(tags)
        known = {t for e in entries for t in e["tags"]}
        unknown = tags - known
        if unknown:
            raise KeyError(f"unknown suite tags: {sorted(unknown)}")
        entries = [e for e in entries if tags & set(e["tags"])]
    return [_spec_from_entry(e) for e in entries]


def quadratic(n: int = 2, x0=None, name: str = "quadratic") -> ProblemSpec:
    """``||x||^2`` as a least-squares problem (residuals ``x``), minimum 0 at the origin."""
    x0 = np.ones(n) if x0 is None else np.asarray(x0, dtype=float)
    return ProblemSpec(name=name, n=n, m=n, residuals=F.sphere,
                       x0=x0, f_star=0.0, tags=("quadratic",))


def get_problem(name: str) -> ProblemSpec:
    """Look up an instance by name; a bare function name means its unscaled start."""
    if name.startswith("quadratic"):
        n = int(name[len("quadratic"):] or 2)
        return quadratic(n, name=name)
    entries = load_manifest()["instances"]
    for e in entries:
        if e["name"] == name or (e["function"] == name and e["start_scale"] == 1):
            return _spec_from_entry(e)
    raise KeyError(f"unknown problem {name!r}")
