"""Operator norms, indicator testing constants, the bilinear-form
decomposition identity and the norm-to-testing sufficiency ratio.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import Cube
from .measures import GridFunction
from .operators import InducedOperator
from .paraproduct import Paraproduct, _largest_singular_value, build_paraproduct


def operator_norm(t_mu: InducedOperator, tol: float = 1e-10) -> float:
    """Exact norm of T_mu from L2(mu) to L2(nu).

    Largest singular value of D_nu^(1/2) [T_mu] D_mu^(-1/2) on the
    positive-mass leaf coordinates.
    """
    mu_mass = t_mu.mu.leaf_mass
    nu_mass = t_mu.nu.leaf_mass
    cols = np.flatnonzero(mu_mass > 0)
    rows = np.flatnonzero(nu_mass > 0)
    if cols.size == 0 or rows.size == 0:
        return 0.0
    k = (np.sqrt(nu_mass[rows])[:, None] * t_mu.matrix[np.ix_(rows, cols)]
         / np.sqrt(mu_mass[cols])[None, :])
    return _largest_singular_value(k, tol=tol)


@dataclass(frozen=True)
class TestingReport:
    """Testing constants of an induced operator, plus its exact norm.

    Global constants integrate |T_mu chi_Q|^2 over the whole space, local
    ones only over Q.  `c_adjoint_local_nu` is the variant of the adjoint
    local integral taken against d(nu) instead of d(mu); both are reported.
    An unbounded witness (nonzero image over a zero-mass cube) makes the
    corresponding constant infinite.
    """

    c_direct_global: float
    c_adjoint_global: float
    c_direct_local: float
    c_adjoint_local: float
    c_adjoint_local_nu: float
    c_diag: float
    norm: float
    rho: float
    unbounded_witness: tuple | None = None


def testing_constants(t_mu: InducedOperator, r: int) -> TestingReport:
    """Exact suprema over active cubes of the indicator testing quantities."""
    lattice = t_mu.lattice
    cubes = lattice.active_cubes
    x = np.array([lattice.indicator(q) for q in cubes]).T
    mu_mass = t_mu.mu.leaf_mass
    nu_mass = t_mu.nu.leaf_mass
    mu_q = mu_mass @ x
    nu_q = nu_mass @ x
    tx = t_mu.matrix @ x
    ax = t_mu.adjoint_matrix @ x

    direct_global = nu_mass @ (tx * tx)
    direct_local = nu_mass @ (tx * tx * x)
    adjoint_global = mu_mass @ (ax * ax)
    adjoint_local = mu_mass @ (ax * ax * x)
    adjoint_local_nu = nu_mass @ (ax * ax * x)

    witness = None
    c_dg = c_dl = c_ag = c_al = c_aln = 0.0
    for j, q in enumerate(cubes):
        if mu_q[j] > 0:
            c_dg = max(c_dg, direct_global[j] / mu_q[j])
            c_dl = max(c_dl, direct_local[j] / mu_q[j])
        elif direct_global[j] > 0:
            c_dg = c_dl = float("inf")
            witness = ("direct", q)
        if nu_q[j] > 0:
            c_ag = max(c_ag, adjoint_global[j] / nu_q[j])
            c_al = max(c_al, adjoint_local[j] / nu_q[j])
            c_aln = max(c_aln, adjoint_local_nu[j] / nu_q[j])
        elif adjoint_global[j] > 0:
            c_ag = c_al = float("inf")
            witness = ("adjoint", q)

    # comparable-size bilinear pairings
    b = x.T @ (nu_mass[:, None] * tx)
    c_diag = 0.0
    for i, rq in enumerate(cubes):
        for j, q in enumerate(cubes):
            if abs(rq.level - q.level) > r:
                continue
            if mu_q[j] > 0 and nu_q[i] > 0:
                c_diag = max(c_diag, abs(b[i, j]) / np.sqrt(mu_q[j] * nu_q[i]))
            elif abs(b[i, j]) > 0:
                c_diag = float("inf")
                witness = ("diag", q, rq)

    norm = operator_norm(t_mu)
    denom = np.sqrt(c_dl) + np.sqrt(c_al) + c_diag if np.isfinite(
        c_dl + c_al + c_diag) else float("inf")
    rho = 0.0 if norm == 0.0 else (norm / denom if denom > 0 else float("inf"))
    return TestingReport(c_direct_global=c_dg, c_adjoint_global=c_ag,
                         c_direct_local=c_dl, c_adjoint_local=c_al,
                         c_adjoint_local_nu=c_aln, c_diag=c_diag,
                         norm=norm, rho=rho, unbounded_witness=witness)


def sufficiency_ratio(t_mu: InducedOperator, r: int,
                      report: TestingReport | None = None) -> float:
    """rho = norm / (sqrt(C_direct_local) + sqrt(C_adjoint_local) + C_diag)."""
    if report is None:
        report = testing_constants(t_mu, r)
    return report.rho


@dataclass(frozen=True)
class DecompositionReport:
    """Exact splitting of <T_mu f, g>_nu into paraproducts, the
    comparable-scale band and the mean (root-average) cross terms."""

    lhs: float
    paraproduct_mu: float
    paraproduct_nu: float
    comparable: float
    mean_terms: float
    residual: float
    relative: float


def decomposition_identity(t_mu: InducedOperator, r: int, f: GridFunction,
                           g: GridFunction, pi_mu: Paraproduct | None = None,
                           pi_nu: Paraproduct | None = None) -> DecompositionReport:
    """Verify <T_mu f, g>_nu = <Pi^mu f~, g>_nu + <f, Pi^nu g~>_mu
    + sum over comparable scales <T_mu Delta_Q f, Delta_R g>_nu
    + mean terms, where f~, g~ are f, g minus their root averages.
    """
    lattice = t_mu.lattice
    mu, nu = t_mu.mu, t_mu.nu
    if pi_mu is None:
        pi_mu = build_paraproduct(t_mu, r, side="mu")
    if pi_nu is None:
        pi_nu = build_paraproduct(t_mu, r, side="nu")

    f_mean = mu.mean_part(f)
    f_fluct = f - f_mean
    g_mean = nu.mean_part(g)
    g_fluct = g - g_mean

    lhs = nu.inner(t_mu.apply(f), g)
    term_pi_mu = nu.inner(pi_mu.apply(f_fluct), g)
    term_pi_nu = mu.inner(f, pi_nu.apply(g_fluct))

    deltas_f = {q: mu.martingale_difference(f, q).values
                for q in lattice.nonleaf_cubes}
    deltas_g = {q: nu.martingale_difference(g, q).values
                for q in lattice.nonleaf_cubes}
    comparable = 0.0
    for q, df in deltas_f.items():
        tdf = t_mu.matrix @ df
        for rq, dg in deltas_g.items():
            if abs(rq.level - q.level) <= r:
                comparable += float(np.sum(tdf * dg * nu.leaf_mass))

    mean_terms = (nu.inner(t_mu.apply(f_mean), g)
                  + nu.inner(t_mu.apply(f_fluct), g_mean))

    rhs = term_pi_mu + term_pi_nu + comparable + mean_terms
    residual = abs(lhs - rhs)
    scale = mu.norm(f) * nu.norm(g)
    relative = residual / scale if scale > 0 else residual
    return DecompositionReport(lhs=lhs, paraproduct_mu=term_pi_mu,
                               paraproduct_nu=term_pi_nu,
                               comparable=comparable, mean_terms=mean_terms,
                               residual=residual, relative=relative)
