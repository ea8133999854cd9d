"""Vectorized double-double (compensated) arithmetic for severely ill-conditioned solves.

Numbers are carried as (hi, lo) float64 pairs giving roughly 31 significant
digits. Only the handful of operations needed to form and solve the flat-basis
collocation system is provided; everything is vectorized over NumPy arrays.
"""

import math
from fractions import Fraction

import numpy as np

_SPLIT = 134217729.0  # 2**27 + 1
_LN2_HI = 6.931471805599453e-01
_LN2_LO = 2.3190468138462996e-17

_EXP_TERMS = 26


def _dd_constant(frac):
    hi = float(frac)
    lo = float(frac - Fraction(hi))
    return hi, lo


# inverse factorials as exact double-double pairs
_INVFACT = [_dd_constant(Fraction(1, math.factorial(n))) for n in range(_EXP_TERMS + 1)]


def two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def quick_two_sum(a, b):
    # requires |a| >= |b| componentwise
    s = a + b
    return s, b - (s - a)


def two_prod(a, b):
    p = a * b
    ta = _SPLIT * a
    ah = ta - (ta - a)
    al = a - ah
    tb = _SPLIT * b
    bh = tb - (tb - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def dd_add(xh, xl, yh, yl):
    s, e = two_sum(xh, yh)
    e = e + (xl + yl)
    return quick_two_sum(s, e)


def dd_neg(xh, xl):
    return -xh, -xl


def dd_mul(xh, xl, yh, yl):
    p, e = two_prod(xh, yh)
    e = e + (xh * yl + xl * yh)
    return quick_two_sum(p, e)


def dd_div(xh, xl, yh, yl):
    q1 = xh / yh
    ph, pl = dd_mul(q1, np.zeros_like(q1 * 1.0), yh, yl)
    rh, rl = dd_add(xh, xl, -ph, -pl)
    q2 = rh / yh
    ph, pl = dd_mul(q2, np.zeros_like(q2 * 1.0), yh, yl)
    rh, rl = dd_add(rh, rl, -ph, -pl)
    q3 = rh / yh
    s, e = quick_two_sum(q1, q2)
    return quick_two_sum(s, e + q3)


def dd_exp(xh, xl):
    """exp() of a dd array via range reduction x = k ln2 + r and a dd Taylor sum."""
    k = np.rint(xh / _LN2_HI)
    th, tl = dd_mul(k, np.zeros_like(k), np.full_like(k, _LN2_HI), np.full_like(k, _LN2_LO))
    rh, rl = dd_add(xh, xl, -th, -tl)
    # Horner over enough terms for |r| <= ln2/2 at dd precision
    sh = np.zeros_like(rh)
    sl = np.zeros_like(rh)
    for n in range(_EXP_TERMS, -1, -1):
        ph, pl = dd_mul(sh, sl, rh, rl)
        ch, cl = _INVFACT[n]
        sh, sl = dd_add(ph, pl, np.full_like(ph, ch), np.full_like(ph, cl))
    ki = k.astype(np.int64)
    return np.ldexp(sh, ki), np.ldexp(sl, ki)


def dd_sum_axis0(ph, pl):
    """Pairwise-tree sum along axis 0 of a dd array stack."""
    while ph.shape[0] > 1:
        n = ph.shape[0]
        half = n // 2
        ah, al = dd_add(ph[:half], pl[:half], ph[half:2 * half], pl[half:2 * half])
        if n % 2:
            ph = np.concatenate([ah, ph[2 * half:]], axis=0)
            pl = np.concatenate([al, pl[2 * half:]], axis=0)
        else:
            ph, pl = ah, al
    return ph[0], pl[0]


def gaussian_matrix_dd(eps, za, zb):
    """Entries exp(-(eps*|za_i - zb_j|)**2) to dd accuracy for double inputs."""
    e2h, e2l = two_prod(np.float64(eps), np.float64(eps))
    dxh, dxl = two_sum(za.real[:, None], -zb.real[None, :])
    dyh, dyl = two_sum(za.imag[:, None], -zb.imag[None, :])
    sxh, sxl = dd_mul(dxh, dxl, dxh, dxl)
    syh, syl = dd_mul(dyh, dyl, dyh, dyl)
    r2h, r2l = dd_add(sxh, sxl, syh, syl)
    ah, al = dd_mul(r2h, r2l, np.full_like(r2h, e2h), np.full_like(r2h, e2l))
    return dd_exp(-ah, -al)


def lu_factor_dd(ah, al):
    """LU with partial pivoting of a dd matrix; returns packed factors and pivots."""
    n = ah.shape[0]
    uh = ah.copy()
    ul = al.copy()
    lh = np.eye(n)
    ll = np.zeros((n, n))
    piv = np.arange(n)
    for k in range(n):
        p = k + int(np.argmax(np.abs(uh[k:, k])))
        if p != k:
            uh[[k, p]] = uh[[p, k]]
            ul[[k, p]] = ul[[p, k]]
            lh[[k, p], :k] = lh[[p, k], :k]
            ll[[k, p], :k] = ll[[p, k], :k]
            piv[[k, p]] = piv[[p, k]]
        if k + 1 < n:
            mh, ml = dd_div(uh[k + 1:, k], ul[k + 1:, k], uh[k, k], ul[k, k])
            lh[k + 1:, k] = mh
            ll[k + 1:, k] = ml
            ph, pl = dd_mul(mh[:, None], ml[:, None], uh[k, k + 1:][None, :], ul[k, k + 1:][None, :])
            uh[k + 1:, k + 1:], ul[k + 1:, k + 1:] = dd_add(
                uh[k + 1:, k + 1:], ul[k + 1:, k + 1:], -ph, -pl
            )
            uh[k + 1:, k] = 0.0
            ul[k + 1:, k] = 0.0
    return lh, ll, uh, ul, piv


def _solve_lower_dd(lh, ll, bh, bl):
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


def _solve_upper_dd(uh, ul, bh, bl):
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


def lu_solve_dd(factors, bh, bl=None):
    """Solve A X = B for many right-hand sides using dd LU factors; returns double X."""
    lh, ll, uh, ul, piv = factors
    if bl is None:
        bl = np.zeros_like(bh)
    yh, yl = _solve_lower_dd(lh, ll, bh[piv], bl[piv])
    xh, xl = _solve_upper_dd(uh, ul, yh, yl)
    return xh + xl
