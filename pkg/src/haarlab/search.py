"""Seeded randomized search: hill climbing on weights and operator entries
to maximize the norm-to-testing ratio, and a greedy maximizer for the
Carleson embedding constant on deepening trees.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analysis import testing_constants
from .io import band_to_json, band_from_json, lattice_from_json, lattice_to_json
from .lattice import Cube, build_lattice
from .measures import MeasureGrid, uniform_measure
from .operators import BandOperator, InducedOperator, random_band
from .paraproduct import CarlesonSequence, carleson_constant, embedding_constant


@dataclass(frozen=True)
class SearchConfig:
    dim: int = 1
    top_level: int = 0
    leaf_level: int = -3
    r: int = 1
    seed: int = 0
    iterations: int = 200
    amplitude: float = 1.0
    root_amplitude: float = 0.0
    weight_sigma: float = 1.0
    step: float = 0.5


@dataclass
class SearchResult:
    config: SearchConfig
    rho: float
    report: object
    band: BandOperator
    mu: MeasureGrid
    nu: MeasureGrid
    history: list = field(default_factory=list)

    def to_artifact(self) -> dict:
        rep = self.report
        return {
            "schema_version": 1,
            "lattice": lattice_to_json(self.band.lattice),
            "r": self.config.r,
            "operator": band_to_json(self.band),
            "mu": [float(m) for m in self.mu.leaf_mass],
            "nu": [float(m) for m in self.nu.leaf_mass],
            "rho": self.rho,
            "constants": {
                "norm": rep.norm,
                "c_direct_local": rep.c_direct_local,
                "c_adjoint_local": rep.c_adjoint_local,
                "c_direct_global": rep.c_direct_global,
                "c_adjoint_global": rep.c_adjoint_global,
                "c_diag": rep.c_diag,
            },
            "search": {"seed": self.config.seed,
                       "iterations": self.config.iterations},
        }


def _evaluate(band: BandOperator, mu: MeasureGrid, nu: MeasureGrid, r: int):
    t_mu = InducedOperator.from_band(band, mu, nu)
    report = testing_constants(t_mu, r)
    return report.rho, report


def extremal_search(config: SearchConfig) -> SearchResult:
    """Hill climbing on leaf masses and operator entries maximizing rho.

    Fully deterministic in the seed; the incumbent never decreases.
    """
    rng = np.random.default_rng(config.seed)
    lattice = build_lattice(config.dim, config.top_level, config.leaf_level)
    band = random_band(lattice, config.r, seed=config.seed,
                       amplitude=config.amplitude,
                       root_amplitude=config.root_amplitude)
    mu = MeasureGrid(lattice, np.exp(
        config.weight_sigma * rng.standard_normal(lattice.n_leaves)))
    nu = MeasureGrid(lattice, np.exp(
        config.weight_sigma * rng.standard_normal(lattice.n_leaves)))

    rho, report = _evaluate(band, mu, nu, config.r)
    history = [rho]
    keys = sorted(band.entries, key=repr)
    for _ in range(config.iterations):
        move = rng.integers(3)
        cand_band, cand_mu, cand_nu = band, mu, nu
        if move == 0 and keys:
            key = keys[rng.integers(len(keys))]
            entries = dict(band.entries)
            entries[key] = entries[key] + config.step * rng.standard_normal()
            cand_band = BandOperator(lattice=lattice,
                                     band_radius=config.r, entries=entries)
        elif move == 1:
            mass = mu.leaf_mass.copy()
            i = rng.integers(mass.size)
            mass[i] = mass[i] * np.exp(config.step * rng.standard_normal())
            cand_mu = MeasureGrid(lattice, mass)
        else:
            mass = nu.leaf_mass.copy()
            i = rng.integers(mass.size)
            mass[i] = mass[i] * np.exp(config.step * rng.standard_normal())
            cand_nu = MeasureGrid(lattice, mass)
        cand_rho, cand_report = _evaluate(cand_band, cand_mu, cand_nu, config.r)
        if cand_rho > rho:
            band, mu, nu = cand_band, cand_mu, cand_nu
            rho, report = cand_rho, cand_report
        history.append(rho)
    return SearchResult(config=config, rho=rho, report=report, band=band,
                        mu=mu, nu=nu, history=history)


def replay_artifact(artifact: dict):
    """Rebuild the instance stored in a search artifact and recompute all
    constants.  Returns (matches, recomputed dict)."""
    lattice = lattice_from_json(artifact["lattice"])
    band = band_from_json(artifact["operator"], lattice)
    mu = MeasureGrid(lattice, np.asarray(artifact["mu"], dtype=float))
    nu = MeasureGrid(lattice, np.asarray(artifact["nu"], dtype=float))
    r = int(artifact["r"])
    rho, report = _evaluate(band, mu, nu, r)
    recomputed = {
        "rho": float(rho),
        "constants": {
            "norm": report.norm,
            "c_direct_local": report.c_direct_local,
            "c_adjoint_local": report.c_adjoint_local,
            "c_direct_global": report.c_direct_global,
            "c_adjoint_global": report.c_adjoint_global,
            "c_diag": report.c_diag,
        },
    }
    tol = 1e-12
    ok = abs(rho - artifact["rho"]) <= tol * max(1.0, abs(rho))
    for name, val in recomputed["constants"].items():
        stored = artifact["constants"][name]
        if abs(val - stored) > tol * max(1.0, abs(val)):
            ok = False
    return bool(ok), recomputed


def greedy_embedding_sequence(depth: int, seed: int = 0, iterations: int = 40,
                              init: CarlesonSequence | None = None):
    """Greedy maximizer of the embedding constant over Carleson-normalized
    sequences on the 1D uniform tree of the given depth.

    Seeding with the optimum of a shallower tree makes the resulting
    constants nondecreasing in depth.  Returns (sequence, constant), with
    the sequence normalized to Carleson constant 1.
    """
    lattice = build_lattice(1, 0, -depth)
    mu = uniform_measure(lattice, total=1.0)
    # chain seed: mass-proportional values along a single branch
    chain = {Cube(1, -j, (0,)): mu.mass(Cube(1, -j, (0,)))
             for j in range(depth + 1)}
    candidates = [_normalized(CarlesonSequence(lattice, chain), mu)]
    if init is not None:
        # the shallower optimum extended by zeros: same form on a finer
        # space, so its constant can only grow with depth
        carried = {q: a for q, a in init.values.items()
                   if lattice.is_active(q) and a > 0}
        if carried:
            candidates.append(_normalized(
                CarlesonSequence(lattice, carried), mu))
    seq, best = None, -1.0
    for cand in candidates:
        val = embedding_constant(cand, mu)
        if val > best:
            seq, best = cand, val
    rng = np.random.default_rng(seed)
    cubes = list(lattice.active_cubes)
    for _ in range(iterations):
        cand_values = dict(seq.values)
        for _ in range(1 + rng.integers(3)):
            q = cubes[rng.integers(len(cubes))]
            old = cand_values.get(q, 0.0)
            if old > 0:
                cand_values[q] = old * np.exp(0.5 * rng.standard_normal())
            else:
                cand_values[q] = mu.mass(q) * rng.uniform(0.1, 1.0)
        cand = _normalized(CarlesonSequence(lattice, cand_values), mu)
        val = embedding_constant(cand, mu)
        if val > best:
            best, seq = val, cand
    return seq, best


def _normalized(seq: CarlesonSequence, mu: MeasureGrid) -> CarlesonSequence:
    c = carleson_constant(seq, mu)
    if c == 0 or not np.isfinite(c):
        return seq
    return CarlesonSequence(seq.lattice,
                            {q: a / c for q, a in seq.values.items()})
