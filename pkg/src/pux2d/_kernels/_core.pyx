# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: layer-potential sums, swept-angle accumulation,
Cauchy-moment recursions, and double-double triangular solves / matrix
construction for the stabilized basis solve."""

import math
from fractions import Fraction

import numpy as np

cimport numpy as cnp
from libc.math cimport atan2, ldexp, log, rint, sqrt

cnp.import_array()

BACKEND = "cython"

# ---------------------------------------------------------------------------
# double-double scalar arithmetic

cdef struct dd:
    double hi
    double lo

DEF SPLITTER = 134217729.0
DEF LN2_HI = 6.931471805599453e-01
DEF LN2_LO = 2.3190468138462996e-17
DEF EXP_TERMS = 26

cdef double INVFACT_HI[EXP_TERMS + 1]
cdef double INVFACT_LO[EXP_TERMS + 1]

def _init_invfact():
    for n in range(EXP_TERMS + 1):
        frac = Fraction(1, math.factorial(n))
        hi = float(frac)
        lo = float(frac - Fraction(hi))
        INVFACT_HI[n] = hi
        INVFACT_LO[n] = lo

_init_invfact()


cdef inline dd dd_two_sum(double a, double b) noexcept nogil:
    cdef dd r
    cdef double bb
    r.hi = a + b
    bb = r.hi - a
    r.lo = (a - (r.hi - bb)) + (b - bb)
    return r


cdef inline dd dd_quick_two_sum(double a, double b) noexcept nogil:
    cdef dd r
    r.hi = a + b
    r.lo = b - (r.hi - a)
    return r


cdef inline dd dd_two_prod(double a, double b) noexcept nogil:
    cdef dd r
    cdef double ta, ah, al, tb, bh, bl
    r.hi = a * b
    ta = SPLITTER * a
    ah = ta - (ta - a)
    al = a - ah
    tb = SPLITTER * b
    bh = tb - (tb - b)
    bl = b - bh
    r.lo = ((ah * bh - r.hi) + ah * bl + al * bh) + al * bl
    return r


cdef inline dd dd_add(dd x, dd y) noexcept nogil:
    cdef dd s = dd_two_sum(x.hi, y.hi)
    s.lo = s.lo + (x.lo + y.lo)
    return dd_quick_two_sum(s.hi, s.lo)


cdef inline dd dd_neg(dd x) noexcept nogil:
    cdef dd r
    r.hi = -x.hi
    r.lo = -x.lo
    return r


cdef inline dd dd_mul(dd x, dd y) noexcept nogil:
    cdef dd p = dd_two_prod(x.hi, y.hi)
    p.lo = p.lo + (x.hi * y.lo + x.lo * y.hi)
    return dd_quick_two_sum(p.hi, p.lo)


cdef inline dd dd_div(dd x, dd y) noexcept nogil:
    cdef dd q, p, r
    cdef double q1, q2, q3
    q1 = x.hi / y.hi
    q.hi = q1
    q.lo = 0.0
    p = dd_mul(q, y)
    r = dd_add(x, dd_neg(p))
    q2 = r.hi / y.hi
    q.hi = q2
    q.lo = 0.0
    p = dd_mul(q, y)
    r = dd_add(r, dd_neg(p))
    q3 = r.hi / y.hi
    q = dd_quick_two_sum(q1, q2)
    return dd_quick_two_sum(q.hi, q.lo + q3)


cdef inline dd dd_exp1(dd x) noexcept nogil:
    cdef double k = rint(x.hi / LN2_HI)
    cdef dd kd, t, r, s, c
    cdef int n
    kd.hi = k
    kd.lo = 0.0
    t.hi = LN2_HI
    t.lo = LN2_LO
    t = dd_mul(kd, t)
    r = dd_add(x, dd_neg(t))
    s.hi = 0.0
    s.lo = 0.0
    for n in range(EXP_TERMS, -1, -1):
        s = dd_mul(s, r)
        c.hi = INVFACT_HI[n]
        c.lo = INVFACT_LO[n]
        s = dd_add(s, c)
    s.hi = ldexp(s.hi, <int> k)
    s.lo = ldexp(s.lo, <int> k)
    return s


# ---------------------------------------------------------------------------
# layer-potential kernels

def dlp_sum(sources, weighted_tangents, density, targets):
    """out[i] = sum_j density[j] * Im(wt[j] / (sources[j] - targets[i]))."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] src = np.ascontiguousarray(sources, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] tgt = np.ascontiguousarray(targets, dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(tgt.shape[0])
    wtd = np.ascontiguousarray(np.asarray(weighted_tangents) * np.asarray(density), dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] wt = wtd
    cdef Py_ssize_t i, j, n = src.shape[0], m = tgt.shape[0]
    cdef double dre, dim, acc, zre, zim, d2
    with nogil:
        for i in range(m):
            zre = tgt[i].real
            zim = tgt[i].imag
            acc = 0.0
            for j in range(n):
                dre = src[j].real - zre
                dim = src[j].imag - zim
                d2 = dre * dre + dim * dim
                acc += (wt[j].imag * dre - wt[j].real * dim) / d2
            out[i] = acc
    return out


def winding_angle(poly, targets):
    """Continuous angle swept by (poly[k] - z) along an open polyline, per target."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] pl = np.ascontiguousarray(poly, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] tgt = np.ascontiguousarray(targets, dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(tgt.shape[0])
    cdef Py_ssize_t i, k, n = pl.shape[0], m = tgt.shape[0]
    cdef double zre, zim, are, aim, bre, bim, cross, dot, acc
    with nogil:
        for i in range(m):
            zre = tgt[i].real
            zim = tgt[i].imag
            acc = 0.0
            are = pl[0].real - zre
            aim = pl[0].imag - zim
            for k in range(1, n):
                bre = pl[k].real - zre
                bim = pl[k].imag - zim
                cross = are * bim - aim * bre
                dot = are * bre + aim * bim
                acc += atan2(cross, dot)
                are = bre
                aim = bim
            out[i] = acc
    return out


def moments_near(zt, p0, int n_moments):
    """Forward moment recursion for targets close to the panel."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] z = np.ascontiguousarray(zt, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] q = np.ascontiguousarray(p0, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = np.empty((n_moments, z.shape[0]), dtype=np.complex128)
    cdef Py_ssize_t i, k, m = z.shape[0]
    cdef double complex acc, zz
    with nogil:
        for i in range(m):
            zz = z[i]
            acc = q[i]
            out[0, i] = acc
            for k in range(n_moments - 1):
                if k % 2 == 0:
                    acc = zz * acc + 2.0 / (k + 1)
                else:
                    acc = zz * acc
                out[k + 1, i] = acc
    return out


def moments_far(zt, int n_moments, double tol=1e-18, int max_terms=600):
    """Inverse-power series for the moments of targets away from the panel."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] z = np.ascontiguousarray(zt, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = np.zeros((n_moments, z.shape[0]), dtype=np.complex128)
    cdef Py_ssize_t i, k, t, m = z.shape[0]
    cdef double complex iz, iz2, term, acc
    cdef double coeff
    cdef int mp
    with nogil:
        for i in range(m):
            iz = 1.0 / z[i]
            iz2 = iz * iz
            for k in range(n_moments):
                mp = k % 2
                term = iz if mp == 0 else iz2
                acc = 0.0
                for t in range(max_terms):
                    coeff = 2.0 / (k + mp + 1)
                    acc = acc + coeff * term
                    term = term * iz2
                    mp = mp + 2
                    if (term.real * term.real + term.imag * term.imag) * coeff * coeff < tol * tol:
                        break
                out[k, i] = -acc
    return out


# ---------------------------------------------------------------------------
# double-double linear-algebra kernels

def dd_tri_solve_lower(lh_arr, ll_arr, bh_arr, bl_arr):
    """Forward substitution L X = B with unit-ish lower dd factor."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] lh = np.ascontiguousarray(lh_arr)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ll = np.ascontiguousarray(ll_arr)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] xh = np.ascontiguousarray(bh_arr).copy()
    cdef cnp.ndarray[cnp.float64_t, ndim=2] xl = np.ascontiguousarray(bl_arr).copy()
    cdef Py_ssize_t n = lh.shape[0], m = xh.shape[1]
    cdef Py_ssize_t i, k, j
    cdef dd a, b, prod
    with nogil:
        for i in range(n):
            for k in range(i):
                a.hi = lh[i, k]
                a.lo = ll[i, k]
                if a.hi == 0.0 and a.lo == 0.0:
                    continue
                for j in range(m):
                    b.hi = xh[k, j]
                    b.lo = xl[k, j]
                    prod = dd_mul(a, b)
                    b.hi = xh[i, j]
                    b.lo = xl[i, j]
                    b = dd_add(b, dd_neg(prod))
                    xh[i, j] = b.hi
                    xl[i, j] = b.lo
    return np.asarray(xh), np.asarray(xl)


def dd_tri_solve_upper(uh_arr, ul_arr, bh_arr, bl_arr):
    """Back substitution U X = B with upper dd factor."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] uh = np.ascontiguousarray(uh_arr)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ul = np.ascontiguousarray(ul_arr)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] xh = np.ascontiguousarray(bh_arr).copy()
    cdef cnp.ndarray[cnp.float64_t, ndim=2] xl = np.ascontiguousarray(bl_arr).copy()
    cdef Py_ssize_t n = uh.shape[0], m = xh.shape[1]
    cdef Py_ssize_t i, k, j
    cdef dd a, b, prod, piv
    with nogil:
        for i in range(n - 1, -1, -1):
            for k in range(i + 1, n):
                a.hi = uh[i, k]
                a.lo = ul[i, k]
                if a.hi == 0.0 and a.lo == 0.0:
                    continue
                for j in range(m):
                    b.hi = xh[k, j]
                    b.lo = xl[k, j]
                    prod = dd_mul(a, b)
                    b.hi = xh[i, j]
                    b.lo = xl[i, j]
                    b = dd_add(b, dd_neg(prod))
                    xh[i, j] = b.hi
                    xl[i, j] = b.lo
            piv.hi = uh[i, i]
            piv.lo = ul[i, i]
            for j in range(m):
                b.hi = xh[i, j]
                b.lo = xl[i, j]
                b = dd_div(b, piv)
                xh[i, j] = b.hi
                xl[i, j] = b.lo
    return np.asarray(xh), np.asarray(xl)


def dd_gaussian_matrix(double eps, za, zb):
    """Entries exp(-(eps*|za_i - zb_j|)**2) as (hi, lo) double-double arrays."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] a = np.ascontiguousarray(za, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] b = np.ascontiguousarray(zb, dtype=np.complex128)
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] oh = np.empty((n, m))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ol = np.empty((n, m))
    cdef Py_ssize_t i, j
    cdef dd e2, dx, dy, sx, sy, r2, arg, val
    e2 = dd_two_prod(eps, eps)
    with nogil:
        for i in range(n):
            for j in range(m):
                dx = dd_two_sum(a[i].real, -b[j].real)
                dy = dd_two_sum(a[i].imag, -b[j].imag)
                sx = dd_mul(dx, dx)
                sy = dd_mul(dy, dy)
                r2 = dd_add(sx, sy)
                arg = dd_mul(r2, e2)
                val = dd_exp1(dd_neg(arg))
                oh[i, j] = val.hi
                ol[i, j] = val.lo
    return np.asarray(oh), np.asarray(ol)
