"""Dyadic cubes and finite truncated lattices.

All geometry is integer arithmetic: a cube at level j has side 2**j and
lower corner at coords * 2**j.  Containment and adjacency tests are exact,
no floating point is involved anywhere.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

# Sentinel for "no common ancestor": cubes in separated grid positions.
NO_COMMON_ANCESTOR = math.inf


@dataclass(frozen=True)
class Cube:
    """A dyadic cube: side 2**level, lower corner at coords * 2**level."""

    dim: int
    level: int
    coords: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))
        if self.dim < 1:
            raise ValueError(f"dim must be positive, got {self.dim}")
        if len(self.coords) != self.dim:
            raise ValueError(f"expected {self.dim} coords, got {len(self.coords)}")

    @property
    def side(self) -> float:
        return 2.0 ** self.level

    @property
    def volume(self) -> float:
        return 2.0 ** (self.level * self.dim)

    def children(self) -> list["Cube"]:
        """The 2**dim sub-cubes at level-1, in lexicographic coordinate order."""
        out = []
        for offs in itertools.product((0, 1), repeat=self.dim):
            out.append(Cube(self.dim, self.level - 1,
                            tuple(2 * c + o for c, o in zip(self.coords, offs))))
        return out

    def parent(self) -> "Cube":
        return self.ancestor(1)

    def ancestor(self, k: int) -> "Cube":
        """The k-th grandparent; ancestor(0) is the cube itself."""
        if k < 0:
            raise ValueError("k must be nonnegative")
        return Cube(self.dim, self.level + k,
                    tuple(c >> k for c in self.coords))

    def contains(self, other: "Cube") -> bool:
        if other.dim != self.dim or other.level > self.level:
            return False
        return other.ancestor(self.level - other.level) == self


def tree_distance(q: Cube, r: Cube) -> int | float:
    """Graph distance in the 2**dim-ary dyadic tree.

    Returns NO_COMMON_ANCESTOR (inf) for cubes that never share an ancestor,
    e.g. cubes separated by the origin in the standard grid.
    """
    if q.dim != r.dim:
        raise ValueError("cubes have different dimensions")
    dist = 0
    if q.level < r.level:
        dist = r.level - q.level
        q = q.ancestor(r.level - q.level)
    elif r.level < q.level:
        dist = q.level - r.level
        r = r.ancestor(q.level - r.level)
    while q.coords != r.coords:
        qp, rp = q.parent(), r.parent()
        if qp.coords == q.coords and rp.coords == r.coords:
            # both at a fixed point of the parent map, never meet
            return NO_COMMON_ANCESTOR
        q, r = qp, rp
        dist += 2
    return dist


@dataclass(frozen=True)
class Lattice:
    """The active cubes between top_level and leaf_level under fixed roots.

    Cube arithmetic remains global; only enumeration is bounded by the
    lattice.  Leaves are enumerated root by root, lexicographically by
    coordinates (row-major), and the order is stable across runs.
    """

    dim: int
    top_level: int
    leaf_level: int
    roots: tuple[Cube, ...]

    def __post_init__(self):
        object.__setattr__(self, "roots", tuple(self.roots))
        if self.leaf_level >= self.top_level:
            raise ValueError("leaf_level must be below top_level")
        seen = set()
        for root in self.roots:
            if root.dim != self.dim or root.level != self.top_level:
                raise ValueError(f"root {root} not at top level {self.top_level}")
            if root.coords in seen:
                raise ValueError(f"overlapping roots at coords {root.coords}")
            seen.add(root.coords)
        if not self.roots:
            raise ValueError("at least one root required")

    @property
    def depth(self) -> int:
        return self.top_level - self.leaf_level

    def is_leaf(self, q: Cube) -> bool:
        return q.level == self.leaf_level

    def is_active(self, q: Cube) -> bool:
        if q.level < self.leaf_level or q.level > self.top_level:
            return False
        top = q.ancestor(self.top_level - q.level)
        return any(top == root for root in self.roots)

    def cubes_at_level(self, level: int) -> list[Cube]:
        if level > self.top_level or level < self.leaf_level:
            return []
        k = self.top_level - level
        out = []
        for root in self.roots:
            lo = [c << k for c in root.coords]
            ranges = [range(l, l + (1 << k)) for l in lo]
            for coords in itertools.product(*ranges):
                out.append(Cube(self.dim, level, coords))
        return out

    @cached_property
    def active_cubes(self) -> tuple[Cube, ...]:
        """All active cubes, from top_level down to leaf_level."""
        out = []
        for level in range(self.top_level, self.leaf_level - 1, -1):
            out.extend(self.cubes_at_level(level))
        return tuple(out)

    @cached_property
    def nonleaf_cubes(self) -> tuple[Cube, ...]:
        return tuple(q for q in self.active_cubes if q.level > self.leaf_level)

    @cached_property
    def leaves(self) -> tuple[Cube, ...]:
        return tuple(self.cubes_at_level(self.leaf_level))

    @cached_property
    def leaf_index(self) -> dict[Cube, int]:
        return {q: i for i, q in enumerate(self.leaves)}

    @property
    def n_leaves(self) -> int:
        return len(self.leaves)

    @property
    def leaf_volume(self) -> float:
        return 2.0 ** (self.leaf_level * self.dim)

    @cached_property
    def _subtree_leaves(self) -> dict[Cube, np.ndarray]:
        idx = {}
        for q in self.active_cubes:
            k = q.level - self.leaf_level
            if k == 0:
                idx[q] = np.array([self.leaf_index[q]], dtype=np.intp)
                continue
            ranges = [range(c << k, (c + 1) << k) for c in q.coords]
            idx[q] = np.array(sorted(self.leaf_index[Cube(self.dim, self.leaf_level, cs)]
                                     for cs in itertools.product(*ranges)), dtype=np.intp)
        return idx

    def leaf_indices(self, q: Cube) -> np.ndarray:
        """Indices of the leaves contained in an active cube q."""
        return self._subtree_leaves[q]

    def indicator(self, q: Cube) -> np.ndarray:
        """Leaf-vector indicator of an active cube."""
        x = np.zeros(self.n_leaves)
        x[self.leaf_indices(q)] = 1.0
        return x


def build_lattice(dim: int, top_level: int, leaf_level: int,
                  roots=None) -> Lattice:
    """Construct a lattice; roots default to the single cube at the origin."""
    if roots is None:
        roots = [Cube(dim, top_level, (0,) * dim)]
    return Lattice(dim=dim, top_level=top_level, leaf_level=leaf_level,
                   roots=tuple(roots))
