"""Interpolatory quadrature for layer potentials evaluated close to a panel.

The panel is mapped affinely so its endpoints land on -1 and +1. Monomial
moments of the Cauchy kernel along the mapped panel satisfy a two-term
recursion seeded by the zeroth moment, whose imaginary part is obtained
branch-safely as a continuous angle sum along a dense polyline of the panel.
Density values at the 16 panel nodes are converted to target-specific weights
through the transposed Vandermonde system, so one factorization per panel
serves any number of targets.
"""

import numpy as np
import scipy.linalg as sla

from . import _kernels
from .errors import OnPanelError

N_MOMENTS = 16
_NEAR_RADIUS = 1.15  # forward recursion below, inverse-power series above


def panel_transform(panel_set, p, z):
    """Map physical points into the panel frame with endpoints at -1 and +1."""
    a = panel_set.panel_start[p]
    b = panel_set.panel_end[p]
    return (2.0 * np.asarray(z) - (a + b)) / (b - a)


def p0_continuous(panel_set, p, targets):
    """Zeroth moment along the panel: exact log magnitude plus swept angle."""
    a = panel_set.panel_start[p]
    b = panel_set.panel_end[p]
    mag = np.log(np.abs((b - targets) / (a - targets)))
    ang = _kernels.winding_angle(panel_set.polylines[p], targets)
    return mag + 1j * ang


def kernel_moments(zt, p0):
    """All Cauchy-kernel monomial moments for transformed targets zt."""
    zt = np.asarray(zt, dtype=np.complex128)
    out = np.empty((N_MOMENTS, zt.shape[0]), dtype=np.complex128)
    near = np.abs(zt) <= _NEAR_RADIUS
    if near.any():
        out[:, near] = _kernels.moments_near(zt[near], np.asarray(p0)[near], N_MOMENTS)
    if (~near).any():
        out[:, ~near] = _kernels.moments_far(zt[~near], N_MOMENTS)
    return out


def special_weights(panel_set, p, targets):
    """Per-target weights W with panel integral  Im(sum_i mu_i W[i]) for real density mu."""
    targets = np.asarray(targets, dtype=np.complex128).ravel()
    zt = panel_transform(panel_set, p, targets)
    nt = panel_transform(panel_set, p, panel_set.panel_nodes(p))
    # guard: target numerically on the panel
    dmin = np.abs(zt[:, None] - panel_transform(panel_set, p, panel_set.polylines[p])[None, :]).min(axis=1)
    if (dmin < 1e-14).any():
        raise OnPanelError("target coincides with a quadrature panel")
    p0 = p0_continuous(panel_set, p, targets)
    mom = kernel_moments(zt, p0)
    vand_t = np.vander(nt, N_MOMENTS, increasing=True).T
    lu = sla.lu_factor(vand_t)
    w = sla.lu_solve(lu, mom)
    # one refinement step with extended-precision residuals buys back the
    # digits lost to the Vandermonde conditioning
    vt_l = vand_t.astype(np.clongdouble)
    resid = (mom.astype(np.clongdouble) - vt_l @ w.astype(np.clongdouble)).astype(np.complex128)
    return w + sla.lu_solve(lu, resid)


def special_quad_batch(panel_set, p, density, targets):
    """Panel contribution  Im( int mu dtau / (tau - z) )  for each target."""
    w = special_weights(panel_set, p, targets)
    return (np.asarray(density) @ w).imag


def plain_quad_batch(panel_set, p, density, targets):
    """Same contribution with the underlying 16-point Gauss-Legendre rule."""
    sl = panel_set.panel_slice(p)
    return _kernels.dlp_sum(
        panel_set.nodes[sl], panel_set.weighted_tangents[sl], np.asarray(density), targets
    )


def accuracy_indicator_batch(panel_set, p, targets):
    """Deviation of the plain rule on the zeroth moment from its closed form."""
    targets = np.asarray(targets, dtype=np.complex128).ravel()
    sl = panel_set.panel_slice(p)
    glval = np.empty(targets.shape[0], dtype=np.complex128)
    src = panel_set.nodes[sl]
    wt = panel_set.weighted_tangents[sl]
    glval = (wt[None, :] / (src[None, :] - targets[:, None])).sum(axis=1)
    return np.abs(glval - p0_continuous(panel_set, p, targets))
