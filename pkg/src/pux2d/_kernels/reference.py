"""Pure NumPy implementations of the hot kernels.

These are the fallback for the compiled extension module; signatures and
results match `pux2d._kernels._core` (up to rounding).
"""

import numpy as np

BACKEND = "numpy"


def dlp_sum(sources, weighted_tangents, density, targets):
    """Double-layer sums  out[i] = sum_j density[j] * Im(wt[j] / (sources[j] - targets[i])).

    sources, weighted_tangents: complex (n,); density: real (n,); targets: complex (m,).
    """
    sources = np.ascontiguousarray(sources)
    wts = np.ascontiguousarray(weighted_tangents * density)
    targets = np.ascontiguousarray(targets)
    out = np.empty(targets.shape[0])
    # block targets to bound the (block x n) temporary
    block = max(1, (1 << 21) // max(1, sources.shape[0]))
    for i0 in range(0, targets.shape[0], block):
        t = targets[i0:i0 + block]
        out[i0:i0 + block] = (wts[None, :] / (sources[None, :] - t[:, None])).imag.sum(axis=1)
    return out


def winding_angle(poly, targets):
    """Continuous angle swept by (poly[k] - z) along an open polyline, per target."""
    poly = np.ascontiguousarray(poly)
    targets = np.ascontiguousarray(targets)
    out = np.zeros(targets.shape[0])
    block = max(1, (1 << 20) // max(1, poly.shape[0]))
    for i0 in range(0, targets.shape[0], block):
        t = targets[i0:i0 + block]
        d = poly[None, :] - t[:, None]
        out[i0:i0 + block] = np.angle(d[:, 1:] / d[:, :-1]).sum(axis=1)
    return out


def moments_near(zt, p0, n_moments):
    """Cauchy-kernel monomial moments by forward recursion (targets close to the panel).

    zt: complex (m,) transformed targets; p0: complex (m,) zeroth moment.
    Returns complex (n_moments, m).
    """
    m = zt.shape[0]
    p = np.empty((n_moments, m), dtype=np.complex128)
    p[0] = p0
    for k in range(n_moments - 1):
        mu_k = 2.0 / (k + 1) if k % 2 == 0 else 0.0
        p[k + 1] = zt * p[k] + mu_k
    return p


def moments_far(zt, n_moments, tol=1e-18, max_terms=600):
    """Cauchy-kernel monomial moments by the convergent inverse-power series (|zt| > 1)."""
    m = zt.shape[0]
    iz = 1.0 / zt
    iz2 = iz * iz
    p = np.zeros((n_moments, m), dtype=np.complex128)
    for k in range(n_moments):
        parity = k % 2
        term = iz ** (parity + 1)
        acc = np.zeros(m, dtype=np.complex128)
        mprime = parity
        for _ in range(max_terms):
            acc += term * (2.0 / (k + mprime + 1))
            term = term * iz2
            mprime += 2
            if np.max(np.abs(term)) * 2.0 / (k + mprime + 1) < tol:
                break
        p[k] = -acc
    return p


def dd_gaussian_matrix(eps, za, zb):
    """Gaussian matrix entries as (hi, lo) double-double arrays; NumPy fallback."""
    from ..ddlinalg import gaussian_matrix_dd

    block = max(1, (1 << 21) // max(1, zb.shape[0]))
    hi = np.empty((za.shape[0], zb.shape[0]))
    lo = np.empty_like(hi)
    for i0 in range(0, za.shape[0], block):
        h, l = gaussian_matrix_dd(eps, za[i0:i0 + block], zb)
        hi[i0:i0 + block] = h
        lo[i0:i0 + block] = l
    return hi, lo


def dd_tri_solve_lower(lh, ll, bh, bl):
    """Forward substitution L X = B in double-double; NumPy fallback."""
    from ..ddlinalg import dd_add, dd_mul, dd_sum_axis0

    n, m = bh.shape
    xh = np.zeros((n, m))
    xl = np.zeros((n, m))
    for i in range(n):
        ah, al = bh[i].copy(), bl[i].copy()
        if i:
            ph, pl = dd_mul(lh[i, :i][:, None], ll[i, :i][:, None], xh[:i], xl[:i])
            sh, sl = dd_sum_axis0(ph, pl)
            ah, al = dd_add(ah, al, -sh, -sl)
        xh[i], xl[i] = ah, al
    return xh, xl


def dd_tri_solve_upper(uh, ul, bh, bl):
    """Back substitution U X = B in double-double; NumPy fallback."""
    from ..ddlinalg import dd_add, dd_div, dd_mul, dd_sum_axis0

    n, m = bh.shape
    xh = np.zeros((n, m))
    xl = np.zeros((n, m))
    for i in range(n - 1, -1, -1):
        ah, al = bh[i].copy(), bl[i].copy()
        if i < n - 1:
            ph, pl = dd_mul(uh[i, i + 1:][:, None], ul[i, i + 1:][:, None], xh[i + 1:], xl[i + 1:])
            sh, sl = dd_sum_axis0(ph, pl)
            ah, al = dd_add(ah, al, -sh, -sl)
        xh[i], xl[i] = dd_div(ah, al, uh[i, i], ul[i, i])
    return xh, xl
