"""Nystrom solve of the double-layer boundary integral equation for the
Dirichlet Laplace problem, with log-source augmentation on multiply
connected domains and near-boundary special quadrature for field evaluation.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from . import _kernels, panelquad
from .errors import NoConvergenceError
from .geometry import _near_panel_targets

_INDICATOR_TOL = 1e-14


@dataclass
class LayerDensity:
    """Dipole density at all quadrature nodes plus one log strength per cavity."""

    mu: np.ndarray
    log_strengths: np.ndarray


class BieSystem:
    """Assembled Nystrom system for one domain discretization.

    The dense kernel block is precomputed; the operator itself is applied
    matrix-free through `apply`. System dimension is n_nodes + n_cavities.
    """

    def __init__(self, domain, panel_sets, gmres_tol=1e-13, gmres_maxiter=200):
        self.domain = domain
        self.panel_sets = list(panel_sets)
        self.gmres_tol = gmres_tol
        self.gmres_maxiter = gmres_maxiter
        if len(self.panel_sets) != len(domain.curves):
            raise ValueError("need one panel set per boundary component")
        nodes = np.concatenate([ps.nodes for ps in self.panel_sets])
        wtp = np.concatenate([ps.weighted_tangents for ps in self.panel_sets])
        d1 = np.concatenate([ps.d1 for ps in self.panel_sets])
        d2 = np.concatenate([ps.d2 for ps in self.panel_sets])
        w = np.concatenate([ps.weights for ps in self.panel_sets])
        self.nodes = nodes
        self.weighted_tangents = wtp
        self.arc_weights = w * np.abs(d1)
        self.n_nodes = nodes.shape[0]
        self.sources = np.asarray(domain.cavity_sources, dtype=np.complex128)
        self.kappa = self.sources.shape[0]
        counts = [ps.nodes.shape[0] for ps in self.panel_sets]
        offsets = np.concatenate([[0], np.cumsum(counts)])
        self.curve_slices = [slice(offsets[i], offsets[i + 1]) for i in range(len(counts))]
        # dense kernel block with the curvature limit on the diagonal
        diff = nodes[None, :] - nodes[:, None]
        np.fill_diagonal(diff, 1.0)
        kmat = (wtp[None, :] / diff).imag / (2 * np.pi)
        np.fill_diagonal(kmat, w * (d2 / (2 * d1)).imag / (2 * np.pi))
        self.kernel_matrix = kmat
        if self.kappa:
            self.log_columns = np.log(np.abs(nodes[:, None] - self.sources[None, :]))
        else:
            self.log_columns = np.zeros((self.n_nodes, 0))

    @property
    def dimension(self):
        return self.n_nodes + self.kappa

    def apply(self, vec):
        """Operator action on stacked (density, log strengths)."""
        vec = np.asarray(vec)
        mu = vec[: self.n_nodes]
        strengths = vec[self.n_nodes:]
        out = np.empty_like(vec)
        out[: self.n_nodes] = 0.5 * mu + self.kernel_matrix @ mu + self.log_columns @ strengths
        for k in range(self.kappa):
            sl = self.curve_slices[k + 1]
            out[self.n_nodes + k] = self.arc_weights[sl] @ mu[sl]
        return out


def apply_operator(system, vec):
    """Matrix-free application of the full augmented Nystrom operator."""
    return system.apply(vec)


def solve_density(system, boundary_data):
    """GMRES solve for the dipole density and cavity log strengths."""
    g = np.asarray(boundary_data, dtype=np.float64)
    if g.shape[0] != system.n_nodes:
        raise ValueError("boundary data must be given at every quadrature node")
    rhs = np.concatenate([g, np.zeros(system.kappa)])
    op = spla.LinearOperator((system.dimension, system.dimension), matvec=system.apply)
    iters = []
    x, info = spla.gmres(
        op,
        rhs,
        rtol=system.gmres_tol,
        atol=0.0,
        restart=system.gmres_maxiter,
        maxiter=1,
        callback=lambda pr: iters.append(pr),
        callback_type="pr_norm",
    )
    residual = np.linalg.norm(system.apply(x) - rhs) / np.linalg.norm(rhs)
    if residual > 10 * system.gmres_tol:
        raise NoConvergenceError(
            f"GMRES stopped at relative residual {residual:.3e}", residual=residual
        )
    density = LayerDensity(mu=x[: system.n_nodes], log_strengths=x[system.n_nodes:])
    density.gmres_iterations = len(iters)
    return density


def eval_field(density, system, points):
    """Harmonic field at interior points, engaging special quadrature near panels."""
    points = np.asarray(points, dtype=np.complex128).ravel()
    vals = _kernels.dlp_sum(system.nodes, system.weighted_tangents, density.mu, points)
    for ci, ps in enumerate(system.panel_sets):
        mu_curve = density.mu[system.curve_slices[ci]]
        near = _near_panel_targets(ps, points)
        for p, idx in enumerate(near):
            if idx.size == 0:
                continue
            ind = panelquad.accuracy_indicator_batch(ps, p, points[idx])
            fix = idx[ind > _INDICATOR_TOL]
            if fix.size == 0:
                continue
            mu_p = mu_curve[16 * p:16 * (p + 1)]
            plain = panelquad.plain_quad_batch(ps, p, mu_p, points[fix])
            special = panelquad.special_quad_batch(ps, p, mu_p, points[fix])
            vals[fix] += special - plain
    vals /= 2 * np.pi
    if system.kappa:
        vals += np.log(np.abs(points[:, None] - system.sources[None, :])) @ density.log_strengths
    return vals


def special_quad_panel(panel_set, p, density, z):
    """Interpolatory panel integral  Im( int mu dtau/(tau - z) )  near one panel."""
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    out = panelquad.special_quad_batch(panel_set, p, density, z)
    return out if out.shape[0] > 1 else float(out[0])


def accuracy_indicator(panel_set, p, z):
    """Plain-rule error on the analytically known zeroth moment at z."""
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    out = panelquad.accuracy_indicator_batch(panel_set, p, z)
    return out if out.shape[0] > 1 else float(out[0])


def constraint_residuals(density, system):
    """Arc-length means of the density over each cavity component."""
    out = np.empty(system.kappa)
    for k in range(system.kappa):
        sl = system.curve_slices[k + 1]
        out[k] = system.arc_weights[sl] @ density.mu[sl]
    return out
