"""Paraproducts of an induced operator, their entrywise matrix structure,
the remainder's diagonal band, Carleson sequences and the dyadic Carleson
embedding constant.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .lattice import Cube, Lattice
from .measures import GridFunction, MeasureGrid
from .operators import InducedOperator, ZERO_TOL


@dataclass(frozen=True)
class Paraproduct:
    """Pi f = sum_Q E_Q f * sum_{R in Q, side(R) = 2^-r side(Q)} Delta_R T chi_Q.

    side "mu" is the paraproduct of T_mu (output in L2(nu)); side "nu" is
    the paraproduct of the adjoint T*_nu (output in L2(mu)).
    """

    source: InducedOperator
    r: int
    side: str
    matrix: np.ndarray

    @property
    def lattice(self) -> Lattice:
        return self.source.lattice

    def apply(self, f: GridFunction) -> GridFunction:
        return GridFunction(self.lattice, self.matrix @ f.values)


def build_paraproduct(t_mu: InducedOperator, r: int, side: str = "mu",
                      enlarge: int = 0) -> Paraproduct:
    """Assemble the exact paraproduct matrix on leaf functions.

    `enlarge` replaces chi_Q in the inner term by the indicator of the
    k-th active ancestor of Q (used to exercise replacement invariance);
    the result must not depend on it for a well localized operator.
    """
    lattice = t_mu.lattice
    if lattice.depth <= r:
        raise ValueError(f"lattice depth {lattice.depth} must exceed r={r}")
    if side == "mu":
        op, avg_measure, delta_measure = t_mu.matrix, t_mu.mu, t_mu.nu
    elif side == "nu":
        op, avg_measure, delta_measure = t_mu.adjoint_matrix, t_mu.nu, t_mu.mu
    else:
        raise ValueError(f"side must be 'mu' or 'nu', got {side!r}")
    w_rows = []
    a_rows = []
    for q in lattice.active_cubes:
        if q.level - r < lattice.leaf_level + 1:
            continue
        mq = avg_measure.mass(q)
        if mq == 0.0:
            continue
        big = q
        for _ in range(enlarge):
            cand = big.parent()
            if not lattice.is_active(cand):
                break
            big = cand
        t_chi = op @ lattice.indicator(big)
        w_rows.append(delta_measure.delta_level_within(t_chi, q.level - r, q))
        a_rows.append(lattice.indicator(q) * avg_measure.leaf_mass / mq)
    n = lattice.n_leaves
    if not w_rows:
        matrix = np.zeros((n, n))
    else:
        matrix = np.array(w_rows).T @ np.array(a_rows)
    return Paraproduct(source=t_mu, r=r, side=side, matrix=matrix)


def _stacked_basis(measure: MeasureGrid):
    """Weighted Haar basis rows over all non-leaf cubes, plus the cube of
    each row."""
    cubes = []
    rows = []
    for q in measure.lattice.nonleaf_cubes:
        for h in measure.weighted_haar_basis(q):
            cubes.append(q)
            rows.append(h.values)
    if rows:
        return cubes, np.array(rows)
    return cubes, np.zeros((0, measure.lattice.n_leaves))


@dataclass(frozen=True)
class ParaproductStructureReport:
    """Entrywise check of the paraproduct's matrix in the weighted bases."""

    passed: bool
    scale: float
    max_dev_vanish_scale: float      # side(R) >= 2^-r side(Q) entries
    max_dev_vanish_outside: float    # R not inside Q entries
    max_dev_equality: float          # side(R) < 2^-r side(Q): Pi entry vs T entry
    witness: tuple | None


def paraproduct_structure_verify(pi: Paraproduct, t_mu: InducedOperator, r: int,
                   tol: float = 1e-9) -> ParaproductStructureReport:
    if pi.side == "mu":
        op, in_measure, out_measure = t_mu.matrix, t_mu.mu, t_mu.nu
    else:
        op, in_measure, out_measure = t_mu.adjoint_matrix, t_mu.nu, t_mu.mu
    mu_cubes, mu_rows = _stacked_basis(in_measure)
    nu_cubes, nu_rows = _stacked_basis(out_measure)
    if not mu_cubes or not nu_cubes:
        return ParaproductStructureReport(True, 0.0, 0.0, 0.0, 0.0, None)
    weighted = nu_rows * out_measure.leaf_mass
    g_pi = weighted @ pi.matrix @ mu_rows.T
    g_t = weighted @ op @ mu_rows.T
    scale = max(float(np.max(np.abs(g_t))), float(np.max(np.abs(g_pi))))
    if scale == 0.0:
        return ParaproductStructureReport(True, 0.0, 0.0, 0.0, 0.0, None)
    dev1 = dev2 = dev3 = 0.0
    witness = None
    for i, rc in enumerate(nu_cubes):
        for j, qc in enumerate(mu_cubes):
            if rc.level >= qc.level - r:
                d = abs(g_pi[i, j]) / scale
                if d > dev1:
                    dev1, witness = d, ("vanish_scale", qc, rc)
            if not qc.contains(rc):
                d = abs(g_pi[i, j]) / scale
                if d > dev2:
                    dev2, witness = d, ("vanish_outside", qc, rc)
            if rc.level < qc.level - r:
                d = abs(g_pi[i, j] - g_t[i, j]) / scale
                if d > dev3:
                    dev3, witness = d, ("equality", qc, rc)
    passed = max(dev1, dev2, dev3) <= tol
    return ParaproductStructureReport(passed=passed, scale=scale, max_dev_vanish_scale=dev1,
                         max_dev_vanish_outside=dev2, max_dev_equality=dev3,
                         witness=None if passed else witness)


@dataclass(frozen=True)
class RemainderReport:
    """Band structure of T_mu - Pi_mu - (Pi_nu)* in the weighted bases."""

    passed: bool
    scale: float
    off_band_max: float
    in_band_max: float


def remainder_diagonals(t_mu: InducedOperator, pi_mu: Paraproduct,
                        pi_nu: Paraproduct, tol: float = ZERO_TOL) -> RemainderReport:
    r = pi_mu.r
    mu_cubes, mu_rows = _stacked_basis(t_mu.mu)
    nu_cubes, nu_rows = _stacked_basis(t_mu.nu)
    if not mu_cubes or not nu_cubes:
        return RemainderReport(True, 0.0, 0.0, 0.0)
    nu_weighted = nu_rows * t_mu.nu.leaf_mass
    mu_weighted = mu_rows * t_mu.mu.leaf_mass
    g_t = nu_weighted @ t_mu.matrix @ mu_rows.T
    g_pi = nu_weighted @ pi_mu.matrix @ mu_rows.T
    # <(Pi_nu)* h_Q^mu, h_R^nu>_nu = <h_Q^mu, Pi_nu h_R^nu>_mu
    g_pin = (mu_weighted @ pi_nu.matrix @ nu_rows.T).T
    diff = g_t - g_pi - g_pin
    scale = float(np.max(np.abs(g_t)))
    if scale == 0.0:
        scale = max(float(np.max(np.abs(diff))), 1.0)
    off = in_band = 0.0
    for i, rc in enumerate(nu_cubes):
        for j, qc in enumerate(mu_cubes):
            d = abs(diff[i, j])
            if abs(rc.level - qc.level) > r:
                off = max(off, d / scale)
            else:
                in_band = max(in_band, d)
    return RemainderReport(passed=off <= tol, scale=scale,
                           off_band_max=off, in_band_max=in_band)


@dataclass(frozen=True)
class CarlesonSequence:
    """A nonnegative number per active cube."""

    lattice: Lattice
    values: dict

    def __post_init__(self):
        for q, a in self.values.items():
            if a < 0:
                raise ValueError(f"negative Carleson value {a} at {q}")

    def get(self, q: Cube) -> float:
        return self.values.get(q, 0.0)

    def subtree_sums(self) -> dict:
        """sum of a_Q over active Q contained in each active cube."""
        lattice = self.lattice
        sums = {}
        for level in range(lattice.leaf_level, lattice.top_level + 1):
            for q in lattice.cubes_at_level(level):
                s = self.get(q)
                if level > lattice.leaf_level:
                    s += sum(sums[c] for c in q.children())
                sums[q] = s
        return sums


def carleson_sequence(t_mu: InducedOperator, r: int) -> CarlesonSequence:
    """a_Q = sum over R inside Q at scale 2^-r side(Q) of the squared nu-norm
    of Delta_R^nu T_mu chi_Q."""
    lattice = t_mu.lattice
    values = {}
    for q in lattice.active_cubes:
        if q.level - r < lattice.leaf_level + 1:
            values[q] = 0.0
            continue
        t_chi = t_mu.matrix @ lattice.indicator(q)
        d = t_mu.nu.delta_level_within(t_chi, q.level - r, q)
        values[q] = float(np.sum(d * d * t_mu.nu.leaf_mass))
    return CarlesonSequence(lattice=lattice, values=values)


def carleson_constant(seq: CarlesonSequence, mu: MeasureGrid) -> float:
    """Smallest C with sum_{Q inside R} a_Q <= C mu(R) over active R;
    inf when a zero-mass cube carries a positive subtree sum."""
    sums = seq.subtree_sums()
    best = 0.0
    for q in seq.lattice.active_cubes:
        m = mu.mass(q)
        s = sums[q]
        if m == 0.0:
            if s > 0.0:
                return float("inf")
            continue
        best = max(best, s / m)
    return best


def _largest_singular_value(k: np.ndarray, tol: float = 1e-10,
                            max_iter: int = 100_000) -> float:
    if min(k.shape) == 0:
        return 0.0
    if max(k.shape) <= 4096:
        return float(np.linalg.svd(k, compute_uv=False)[0])
    # power iteration on K K^T
    rng = np.random.default_rng(0)
    v = rng.standard_normal(k.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = k @ (k.T @ v)
        new = float(np.linalg.norm(w))
        if new == 0.0:
            return 0.0
        v = w / new
        if abs(new - lam) <= tol * max(new, 1.0):
            lam = new
            break
        lam = new
    return float(np.sqrt(lam))


def embedding_constant(seq: CarlesonSequence, mu: MeasureGrid) -> float:
    """Exact optimal C in sum_R a_R |E_R f|^2 <= C ||f||_mu^2.

    The quadratic form is restricted to the positive-mass leaf subspace;
    the constant is the largest eigenvalue of the induced symmetric form.
    """
    lattice = seq.lattice
    mass = mu.leaf_mass
    pos = np.flatnonzero(mass > 0)
    if pos.size == 0:
        return 0.0
    sqrt_mass = np.sqrt(mass[pos])
    rows = []
    for q in lattice.active_cubes:
        a = seq.get(q)
        if a == 0.0:
            continue
        m = mu.mass(q)
        if m == 0.0:
            continue  # E_Q f = 0 by convention, no contribution
        row = np.zeros(pos.size)
        ind = np.zeros(lattice.n_leaves)
        ind[lattice.leaf_indices(q)] = 1.0
        row = np.sqrt(a) * ind[pos] * sqrt_mass / m
        rows.append(row)
    if not rows:
        return 0.0
    s = _largest_singular_value(np.array(rows))
    return float(s * s)


@dataclass(frozen=True)
class CarlesonPropertyReport:
    """Check sum_{Q inside R} a_Q <= ||chi_R T_mu chi_R||^2 <= C_local mu(R)."""

    passed: bool
    max_excess: float
    local_testing_constant: float


def carleson_property(t_mu: InducedOperator, seq: CarlesonSequence,
                      tol: float = 1e-10) -> CarlesonPropertyReport:
    lattice = t_mu.lattice
    sums = seq.subtree_sums()
    excess = 0.0
    c_local = 0.0
    for q in lattice.active_cubes:
        ind = lattice.indicator(q)
        out = (t_mu.matrix @ ind) * ind
        bound = float(np.sum(out * out * t_mu.nu.leaf_mass))
        scale = max(bound, 1.0)
        excess = max(excess, (sums[q] - bound) / scale)
        m = t_mu.mu.mass(q)
        if m > 0:
            c_local = max(c_local, bound / m)
    return CarlesonPropertyReport(passed=excess <= tol, max_excess=excess,
                                  local_testing_constant=c_local)
