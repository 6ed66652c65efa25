"""Band operators in the unweighted Haar basis and the induced two-weight
operators T_mu = T M_u, T*_nu = T* M_v acting between L2(mu) and L2(nu).

A band operator is stored as a sparse map from (row index, column index)
to a real entry, where an index is either a Haar index (non-leaf cube plus
component) or a root indicator.  Haar-Haar entries must vanish beyond tree
distance r; root blocks are an explicit extension used to exercise the
mean terms of the bilinear-form decomposition.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .lattice import Cube, Lattice, tree_distance
from .measures import GridFunction, MeasureGrid, uniform_measure

ZERO_TOL = 1e-12


@dataclass(frozen=True)
class HaarIndex:
    """One unweighted Haar function: a non-leaf cube and a component."""

    cube: Cube
    component: int


@dataclass(frozen=True)
class RootIndex:
    """The normalized indicator of a root cube."""

    cube: Cube


@dataclass(frozen=True)
class HaarSystem:
    """The orthonormal Lebesgue Haar system of a lattice, as leaf vectors.

    Rows of `rows` are the Haar functions for every non-leaf active cube
    (components in Gram-Schmidt order) followed by the normalized root
    indicators; together they form an orthonormal basis of the leaf space
    under uniform leaf weights.
    """

    lattice: Lattice
    indices: tuple
    rows: np.ndarray
    position: dict

    @classmethod
    def build(cls, lattice: Lattice) -> "HaarSystem":
        lebesgue = uniform_measure(lattice)
        indices = []
        rows = []
        for q in lattice.nonleaf_cubes:
            basis = lebesgue.weighted_haar_basis(q)
            for k, h in enumerate(basis):
                indices.append(HaarIndex(q, k))
                rows.append(h.values)
        for root in lattice.roots:
            indices.append(RootIndex(root))
            rows.append(lattice.indicator(root) /
                        np.sqrt(2.0 ** (root.level * lattice.dim)))
        rows = np.array(rows)
        return cls(lattice=lattice, indices=tuple(indices), rows=rows,
                   position={ix: i for i, ix in enumerate(indices)})

    @property
    def size(self) -> int:
        return len(self.indices)


@lru_cache(maxsize=32)
def haar_system(lattice: Lattice) -> HaarSystem:
    return HaarSystem.build(lattice)


@dataclass(frozen=True)
class MultiplierSpec:
    """A coefficient per non-leaf cube, acting as alpha_Q times the identity
    on the Haar space of Q."""

    alpha: dict

    @classmethod
    def constant(cls, lattice: Lattice, value: float) -> "MultiplierSpec":
        return cls(alpha={q: float(value) for q in lattice.nonleaf_cubes})


@dataclass(frozen=True)
class BandOperator:
    """A sparse operator matrix over the unweighted Haar system."""

    lattice: Lattice
    band_radius: int
    entries: dict
    meta: dict = field(default_factory=dict, compare=False)

    @cached_property
    def leaf_matrix(self) -> np.ndarray:
        """Dense matrix acting on leaf functions in L2(m)."""
        system = haar_system(self.lattice)
        e = np.zeros((system.size, system.size))
        for (row, col), val in self.entries.items():
            e[system.position[row], system.position[col]] = val
        vol = self.lattice.leaf_volume
        return vol * (system.rows.T @ e @ system.rows)

    def apply(self, f: GridFunction) -> GridFunction:
        return GridFunction(self.lattice, self.leaf_matrix @ f.values)


def check_band(op: BandOperator, r: int, tol: float = ZERO_TOL):
    """Verify the band structure at radius r.

    Returns (passed, witness); witness is the offending (row, col) pair of
    Haar indices, or None.
    """
    for (row, col), val in op.entries.items():
        if not (isinstance(row, HaarIndex) and isinstance(col, HaarIndex)):
            continue
        if abs(val) <= tol:
            continue
        if tree_distance(col.cube, row.cube) > r:
            return False, (row, col)
    return True, None


def haar_multiplier(lattice: Lattice, spec, root_alpha: float = 0.0) -> BandOperator:
    """T f = sum alpha_Q (f, h_Q) h_Q, a band operator with r = 0.

    `spec` is a MultiplierSpec, a {cube: alpha} mapping, or a scalar.
    A nonzero root_alpha adds alpha times the identity on root indicators.
    """
    if isinstance(spec, MultiplierSpec):
        alpha = spec.alpha
    elif isinstance(spec, dict):
        alpha = spec
    else:
        alpha = {q: float(spec) for q in lattice.nonleaf_cubes}
    n_comp = 2 ** lattice.dim - 1
    entries = {}
    for q, a in alpha.items():
        if a == 0.0:
            continue
        for k in range(n_comp):
            ix = HaarIndex(q, k)
            entries[(ix, ix)] = float(a)
    if root_alpha != 0.0:
        for root in lattice.roots:
            ix = RootIndex(root)
            entries[(ix, ix)] = float(root_alpha)
    return BandOperator(lattice=lattice, band_radius=0, entries=entries)


def haar_shift(lattice: Lattice) -> BandOperator:
    """S f = sum (f, h_I) [h_{I+} - h_{I-}], 1D only; band radius 1.

    Terms whose output Haar functions would live below leaf level are
    dropped; the count is recorded in meta["dropped_terms"].
    """
    if lattice.dim != 1:
        raise ValueError("the Haar shift is defined in dimension 1 only")
    entries = {}
    dropped = 0
    for q in lattice.nonleaf_cubes:
        left, right = q.children()
        if left.level > lattice.leaf_level:
            entries[(HaarIndex(right, 0), HaarIndex(q, 0))] = 1.0
            entries[(HaarIndex(left, 0), HaarIndex(q, 0))] = -1.0
        else:
            dropped += 1
    return BandOperator(lattice=lattice, band_radius=1, entries=entries,
                        meta={"dropped_terms": dropped})


def _cubes_within_distance(lattice: Lattice, q: Cube, r: int) -> list[Cube]:
    return [p for p in lattice.nonleaf_cubes if tree_distance(q, p) <= r]


def random_band(lattice: Lattice, r: int, seed: int, amplitude: float = 1.0,
                root_amplitude: float = 0.0) -> BandOperator:
    """Random band operator: i.i.d. uniform entries on all Haar index pairs
    with tree distance at most r, deterministic in the seed.

    With root_amplitude > 0, root blocks are also filled: root-root pairs
    and pairings of a root with Haar cubes within tree distance r of it
    (the pattern that keeps the induced operator well localized).
    """
    if r < 0:
        raise ValueError("band radius must be nonnegative")
    rng = np.random.default_rng(seed)
    n_comp = 2 ** lattice.dim - 1
    entries = {}
    for q in lattice.nonleaf_cubes:
        for p in _cubes_within_distance(lattice, q, r):
            for kq in range(n_comp):
                for kp in range(n_comp):
                    val = rng.uniform(-amplitude, amplitude)
                    if amplitude > 0:
                        entries[(HaarIndex(p, kp), HaarIndex(q, kq))] = val
    if root_amplitude > 0:
        for root in lattice.roots:
            rix = RootIndex(root)
            for other in lattice.roots:
                entries[(RootIndex(other), rix)] = rng.uniform(
                    -root_amplitude, root_amplitude)
            near = [p for p in lattice.nonleaf_cubes
                    if root.contains(p) and root.level - p.level <= r]
            for p in near:
                for k in range(n_comp):
                    entries[(HaarIndex(p, k), rix)] = rng.uniform(
                        -root_amplitude, root_amplitude)
                    entries[(rix, HaarIndex(p, k))] = rng.uniform(
                        -root_amplitude, root_amplitude)
    return BandOperator(lattice=lattice, band_radius=r, entries=entries)


@dataclass(frozen=True)
class InducedOperator:
    """T_mu = T M_u as a leaf matrix, acting L2(mu) -> L2(nu).

    `lebesgue_matrix` is the leaf matrix of the underlying operator T in
    L2(m); `matrix` realizes f -> T(f u) and `adjoint_matrix` realizes
    T*_nu = T* M_v.
    """

    lattice: Lattice
    mu: MeasureGrid
    nu: MeasureGrid
    lebesgue_matrix: np.ndarray
    band_radius: int
    band: BandOperator | None = None

    @classmethod
    def from_band(cls, band: BandOperator, mu: MeasureGrid,
                  nu: MeasureGrid) -> "InducedOperator":
        if mu.lattice != band.lattice or nu.lattice != band.lattice:
            raise ValueError("lattice mismatch between operator and measures")
        return cls(lattice=band.lattice, mu=mu, nu=nu,
                   lebesgue_matrix=band.leaf_matrix,
                   band_radius=band.band_radius, band=band)

    @classmethod
    def from_leaf_matrix(cls, matrix: np.ndarray, mu: MeasureGrid,
                         nu: MeasureGrid, band_radius: int = 0) -> "InducedOperator":
        return cls(lattice=mu.lattice, mu=mu, nu=nu,
                   lebesgue_matrix=np.asarray(matrix, dtype=float),
                   band_radius=band_radius)

    @cached_property
    def matrix(self) -> np.ndarray:
        return self.lebesgue_matrix * self.mu.density()[np.newaxis, :]

    @cached_property
    def adjoint_matrix(self) -> np.ndarray:
        return self.lebesgue_matrix.T * self.nu.density()[np.newaxis, :]

    def apply(self, f: GridFunction) -> GridFunction:
        return GridFunction(self.lattice, self.matrix @ f.values)

    def apply_adjoint(self, g: GridFunction) -> GridFunction:
        return GridFunction(self.lattice, self.adjoint_matrix @ g.values)

    def bilinear(self, q: Cube, r: Cube) -> float:
        """<T_mu chi_Q, chi_R>_nu, exact at leaf resolution."""
        out = self.matrix @ self.lattice.indicator(q)
        ridx = self.lattice.leaf_indices(r)
        return float(np.sum(out[ridx] * self.nu.leaf_mass[ridx]))


def induce(band: BandOperator, mu: MeasureGrid, nu: MeasureGrid) -> InducedOperator:
    return InducedOperator.from_band(band, mu, nu)


def _haar_pairings(op_matrix: np.ndarray, out_measure: MeasureGrid,
                   lattice: Lattice):
    """Matrix of <Op chi_Q, h_R^w>_w over non-leaf R (rows, stacked by basis
    element) and all active Q (columns); also the row cube of each row."""
    row_cubes = []
    rows = []
    for rq in lattice.nonleaf_cubes:
        for h in out_measure.weighted_haar_basis(rq):
            row_cubes.append(rq)
            rows.append(h.values * out_measure.leaf_mass)
    cols = np.array([lattice.indicator(q) for q in lattice.active_cubes]).T
    if not rows:
        return np.zeros((0, cols.shape[1])), []
    pair = np.array(rows) @ (op_matrix @ cols)
    return pair, row_cubes


@dataclass(frozen=True)
class WellLocalizedReport:
    passed: bool
    r: int
    max_violation: float
    scale: float
    witness: tuple | None
    checked_pairs: int


def check_well_localized(t_mu: InducedOperator, r: int,
                         tol: float = ZERO_TOL) -> WellLocalizedReport:
    """Scan the vanishing pattern of a lower triangularly localized operator
    and of its formal adjoint.

    For every active Q and non-leaf R with side(R) <= side(Q), the pairing
    <T_mu chi_Q, h_R^nu>_nu must vanish if R is not inside the r-th
    grandparent of Q, or if side(R) <= 2^-r side(Q) and R is not inside Q;
    symmetrically for T*_nu against mu-Haar functions.  Pairings are
    normalized by the maximal absolute pairing before the zero test.
    """
    lattice = t_mu.lattice
    scans = [
        _haar_pairings(t_mu.matrix, t_mu.nu, lattice),
        _haar_pairings(t_mu.adjoint_matrix, t_mu.mu, lattice),
    ]
    scale = max((float(np.max(np.abs(p))) for p, _ in scans if p.size), default=0.0)
    if scale == 0.0:
        return WellLocalizedReport(True, r, 0.0, 0.0, None, 0)
    worst = 0.0
    witness = None
    checked = 0
    for direction, (pair, row_cubes) in zip(("direct", "adjoint"), scans):
        for i, rc in enumerate(row_cubes):
            for j, q in enumerate(lattice.active_cubes):
                if rc.level > q.level:
                    continue
                grand = q.ancestor(r)
                flagged = (not grand.contains(rc)) or (
                    rc.level <= q.level - r and not q.contains(rc))
                if not flagged:
                    continue
                checked += 1
                v = abs(pair[i, j]) / scale
                if v > worst:
                    worst = v
                    witness = (direction, q, rc)
    return WellLocalizedReport(passed=worst <= tol, r=r, max_violation=worst,
                               scale=scale, witness=witness,
                               checked_pairs=checked)


def comparable_pairing_count(t_mu: InducedOperator, r: int,
                             tol: float = ZERO_TOL) -> int:
    """Max over Q of the number of comparable-scale cubes R whose weighted
    Haar block against Q is nonzero; finite and bounded in terms of the
    dimension and r only."""
    lattice = t_mu.lattice
    mu_rows = []
    mu_cubes = []
    for q in lattice.nonleaf_cubes:
        for h in t_mu.mu.weighted_haar_basis(q):
            mu_cubes.append(q)
            mu_rows.append(h.values)
    nu_rows = []
    nu_cubes = []
    for q in lattice.nonleaf_cubes:
        for h in t_mu.nu.weighted_haar_basis(q):
            nu_cubes.append(q)
            nu_rows.append(h.values * t_mu.nu.leaf_mass)
    if not mu_rows or not nu_rows:
        return 0
    block = np.array(nu_rows) @ t_mu.matrix @ np.array(mu_rows).T
    scale = float(np.max(np.abs(block)))
    if scale == 0.0:
        return 0
    cols_of = {}
    for k, c in enumerate(mu_cubes):
        cols_of.setdefault(c, []).append(k)
    best = 0
    for q, cols in cols_of.items():
        hit = set()
        for i, rc in enumerate(nu_cubes):
            if abs(rc.level - q.level) > r:
                continue
            if any(abs(block[i, k]) / scale > tol for k in cols):
                hit.add(rc)
        best = max(best, len(hit))
    return best
