"""Finite-resolution measures, averages, martingale differences, weighted
Haar bases and the orthogonal decomposition of leaf functions.

A measure is a nonnegative mass per leaf cell; a grid function is a real
value per leaf cell.  Averages over zero-mass cubes are defined to be 0 so
every formula stays total.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .lattice import Cube, Lattice


@dataclass(frozen=True)
class GridFunction:
    """A real value per leaf cell: the finite model of a function in L2."""

    lattice: Lattice
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.lattice.n_leaves,):
            raise ValueError(f"expected {self.lattice.n_leaves} leaf values, "
                             f"got shape {v.shape}")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, lattice: Lattice) -> "GridFunction":
        return cls(lattice, np.zeros(lattice.n_leaves))

    @classmethod
    def indicator(cls, lattice: Lattice, q: Cube) -> "GridFunction":
        return cls(lattice, lattice.indicator(q))

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.lattice, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.lattice, self.values - other.values)

    def __mul__(self, scalar: float) -> "GridFunction":
        return GridFunction(self.lattice, self.values * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True)
class WeightedHaarBasis:
    """Orthonormal mean-zero basis of the child-indicator span on a cube.

    Size is (#children with positive mass) - 1, at most 2**dim - 1; empty
    when at most one child carries mass.
    """

    cube: Cube
    functions: tuple[GridFunction, ...]

    def __len__(self) -> int:
        return len(self.functions)

    def __iter__(self):
        return iter(self.functions)


@dataclass(frozen=True)
class MeasureGrid:
    """A nonnegative mass per leaf cell, with cached subtree sums."""

    lattice: Lattice
    leaf_mass: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.leaf_mass, dtype=float)
        if m.shape != (self.lattice.n_leaves,):
            raise ValueError(f"expected {self.lattice.n_leaves} leaf masses, "
                             f"got shape {m.shape}")
        if np.any(m < 0):
            raise ValueError("leaf masses must be nonnegative")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "leaf_mass", m)

    @cached_property
    def _cube_mass(self) -> dict[Cube, float]:
        return {q: float(self.leaf_mass[self.lattice.leaf_indices(q)].sum())
                for q in self.lattice.active_cubes}

    def mass(self, q: Cube) -> float:
        """Exact mass of q; 0 for cubes outside the lattice support."""
        got = self._cube_mass.get(q)
        if got is not None:
            return got
        if q.level > self.lattice.top_level:
            return sum(self._cube_mass[r] for r in self.lattice.roots
                       if q.contains(r))
        return 0.0

    @property
    def total_mass(self) -> float:
        return float(self.leaf_mass.sum())

    def density(self) -> np.ndarray:
        """Leaf density with respect to Lebesgue measure (mass / cell volume)."""
        return self.leaf_mass / self.lattice.leaf_volume

    def inner(self, f: GridFunction, g: GridFunction) -> float:
        if f.lattice is not self.lattice and f.lattice != self.lattice:
            raise ValueError("lattice mismatch")
        if g.lattice is not self.lattice and g.lattice != self.lattice:
            raise ValueError("lattice mismatch")
        return float(np.sum(f.values * g.values * self.leaf_mass))

    def norm(self, f: GridFunction) -> float:
        return float(np.sqrt(max(self.inner(f, f), 0.0)))

    def average(self, f: GridFunction, q: Cube) -> float:
        """mu(q)^-1 * integral of f over q; 0 when mu(q) = 0."""
        idx = self.lattice.leaf_indices(q)
        m = float(self.leaf_mass[idx].sum())
        if m == 0.0:
            return 0.0
        return float(np.sum(f.values[idx] * self.leaf_mass[idx]) / m)

    def expectation(self, f: GridFunction, q: Cube) -> GridFunction:
        """E_Q f: the average of f on q, as a function supported on q."""
        out = np.zeros(self.lattice.n_leaves)
        out[self.lattice.leaf_indices(q)] = self.average(f, q)
        return GridFunction(self.lattice, out)

    def martingale_difference(self, f: GridFunction, q: Cube) -> GridFunction:
        """Delta_Q f: on each child of q, (average on child) - (average on q)."""
        if self.lattice.is_leaf(q):
            raise ValueError(f"cube {q} is a leaf, no martingale difference")
        out = np.zeros(self.lattice.n_leaves)
        base = self.average(f, q)
        for child in q.children():
            out[self.lattice.leaf_indices(child)] = self.average(f, child) - base
        return GridFunction(self.lattice, out)

    def weighted_haar_basis(self, q: Cube) -> WeightedHaarBasis:
        """Deterministic orthonormal basis of the mean-zero child span on q.

        Gram-Schmidt in the mu inner product over child indicators in
        lexicographic order, skipping zero-mass children.  Signs are fixed so
        each vector is negative on earlier children and positive on the
        latest child it involves.
        """
        if self.lattice.is_leaf(q):
            raise ValueError(f"cube {q} is a leaf, no Haar basis")
        children = q.children()
        masses = np.array([self.mass(c) for c in children])
        alive = np.flatnonzero(masses > 0)
        funcs = []
        if alive.size >= 2:
            w = masses[alive]
            # work in the child-value space with weighted inner product
            done: list[np.ndarray] = []
            for k in range(1, alive.size):
                v = np.zeros(alive.size)
                v[k] = 1.0
                v -= np.sum(v * w) / np.sum(w)          # mu-mean zero
                for u in done:
                    v -= np.sum(v * u * w) * u          # orthogonalize
                nrm = np.sqrt(np.sum(v * v * w))
                v /= nrm
                if v[k] < 0:
                    v = -v
                done.append(v)
                leafvals = np.zeros(self.lattice.n_leaves)
                for j, ci in enumerate(alive):
                    leafvals[self.lattice.leaf_indices(children[ci])] = v[j]
                funcs.append(GridFunction(self.lattice, leafvals))
        return WeightedHaarBasis(cube=q, functions=tuple(funcs))

    def martingale_decompose(self, f: GridFunction):
        """All martingale differences plus root averages.

        Returns (deltas, expectations): dicts over non-leaf active cubes and
        over roots.  On positive-mass leaves the pieces sum back to f.
        """
        deltas = {q: self.martingale_difference(f, q)
                  for q in self.lattice.nonleaf_cubes}
        exps = {r: self.expectation(f, r) for r in self.lattice.roots}
        return deltas, exps

    def mean_part(self, f: GridFunction) -> GridFunction:
        """Sum of the root averages E_R f."""
        out = np.zeros(self.lattice.n_leaves)
        for r in self.lattice.roots:
            out[self.lattice.leaf_indices(r)] = self.average(f, r)
        return GridFunction(self.lattice, out)

    def fluctuation_part(self, f: GridFunction) -> GridFunction:
        """f minus root averages; equals the sum of all Delta_Q f."""
        return f - self.mean_part(f)

    def delta_level_within(self, values: np.ndarray, level: int,
                           q: Cube) -> np.ndarray:
        """Sum of Delta_R over the cubes R inside q at the given level.

        Operates on raw leaf vectors; used by the paraproduct assembly.
        """
        mass = self.leaf_mass
        out = np.zeros_like(values)
        cubes = [r for r in self.lattice.cubes_at_level(level) if q.contains(r)]
        for r in cubes:
            ridx = self.lattice.leaf_indices(r)
            mr = float(mass[ridx].sum())
            base = float(np.sum(values[ridx] * mass[ridx]) / mr) if mr > 0 else 0.0
            for child in r.children():
                cidx = self.lattice.leaf_indices(child)
                mc = float(mass[cidx].sum())
                if mc > 0:
                    out[cidx] = float(np.sum(values[cidx] * mass[cidx]) / mc) - base
        return out


def uniform_measure(lattice: Lattice, total: float | None = None) -> MeasureGrid:
    """Lebesgue measure (or uniform with the given total mass)."""
    if total is None:
        mass = np.full(lattice.n_leaves, lattice.leaf_volume)
    else:
        mass = np.full(lattice.n_leaves, total / lattice.n_leaves)
    return MeasureGrid(lattice, mass)


def lognormal_measure(lattice: Lattice, sigma: float, seed: int) -> MeasureGrid:
    rng = np.random.default_rng(seed)
    return MeasureGrid(lattice, np.exp(sigma * rng.standard_normal(lattice.n_leaves)))


def sparse_atoms_measure(lattice: Lattice, count: int, seed: int) -> MeasureGrid:
    """Mass on `count` randomly chosen leaves, zero elsewhere."""
    rng = np.random.default_rng(seed)
    mass = np.zeros(lattice.n_leaves)
    picks = rng.choice(lattice.n_leaves, size=min(count, lattice.n_leaves),
                       replace=False)
    mass[picks] = rng.uniform(0.5, 2.0, size=picks.size)
    return MeasureGrid(lattice, mass)


def zero_blocks_measure(lattice: Lattice, fraction: float, seed: int) -> MeasureGrid:
    """Lognormal masses with a random fraction of leaves zeroed out."""
    rng = np.random.default_rng(seed)
    mass = np.exp(rng.standard_normal(lattice.n_leaves))
    mass[rng.random(lattice.n_leaves) < fraction] = 0.0
    return MeasureGrid(lattice, mass)


def generate_measure(lattice: Lattice, spec) -> MeasureGrid:
    """Build a measure from a config spec (explicit masses or a generator)."""
    if isinstance(spec, (list, tuple, np.ndarray)):
        return MeasureGrid(lattice, np.asarray(spec, dtype=float))
    kind = spec["type"]
    if kind == "explicit":
        return MeasureGrid(lattice, np.asarray(spec["mass"], dtype=float))
    if kind == "uniform":
        return uniform_measure(lattice, total=spec.get("total"))
    if kind == "lognormal":
        return lognormal_measure(lattice, spec.get("sigma", 1.0), spec["seed"])
    if kind == "sparse_atoms":
        return sparse_atoms_measure(lattice, spec["count"], spec["seed"])
    if kind == "zero_blocks":
        return zero_blocks_measure(lattice, spec.get("fraction", 0.25), spec["seed"])
    raise ValueError(f"unknown measure spec type {kind!r}")
