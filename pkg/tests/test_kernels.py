"""Backend equivalence: the compiled core must match the NumPy reference."""

import numpy as np
import pytest

from pux2d import _kernels
from pux2d._kernels import reference
from pux2d.ddlinalg import dd_exp, gaussian_matrix_dd, lu_factor_dd, lu_solve_dd

core = pytest.importorskip("pux2d._kernels._core")


@pytest.fixture(scope="module")
def sample(rng):
    n, m = 130, 257
    src = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    wt = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    dens = rng.standard_normal(n)
    tgt = 3.0 * (rng.standard_normal(m) + 1j * rng.standard_normal(m))
    return src, wt, dens, tgt


def test_backend_is_compiled_by_default():
    assert _kernels.BACKEND == "cython"


def test_dlp_sum_matches(sample):
    src, wt, dens, tgt = sample
    a = core.dlp_sum(src, wt, dens, tgt)
    b = reference.dlp_sum(src, wt, dens, tgt)
    assert np.abs(a - b).max() < 1e-11 * np.abs(b).max()


def test_winding_angle_matches(sample, rng):
    t = np.linspace(0, 1.3, 65)
    poly = np.exp(1j * t) + 0.05 * rng.standard_normal(65)
    tgt = 0.4 * (rng.standard_normal(300) + 1j * rng.standard_normal(300))
    a = core.winding_angle(poly, tgt)
    b = reference.winding_angle(poly, tgt)
    assert np.abs(a - b).max() < 1e-12


def test_moments_match(rng):
    zt_near = 1.05 * np.exp(1j * rng.uniform(0, 2 * np.pi, 40)) * rng.uniform(0.2, 1.0, 40)
    p0 = np.log((1 - zt_near) / (-1 - zt_near))
    a = core.moments_near(zt_near, p0, 16)
    b = reference.moments_near(zt_near, p0, 16)
    assert np.abs(a - b).max() < 1e-12
    zt_far = zt_near * 4 + 6.0
    a = core.moments_far(zt_far, 16)
    b = reference.moments_far(zt_far, 16)
    assert np.abs(a - b).max() < 1e-13


def test_moments_far_against_near_recursion(rng):
    # both branches valid at moderate |zt|: they must agree
    zt = 1.3 * np.exp(1j * rng.uniform(0, 2 * np.pi, 25))
    p0 = np.log((1 - zt) / (-1 - zt))
    near = reference.moments_near(zt, p0, 16)
    far = reference.moments_far(zt, 16)
    assert np.abs(near - far).max() < 2e-12


def test_dd_gaussian_matrix_matches(rng):
    za = rng.standard_normal(40) + 1j * rng.standard_normal(40)
    zb = rng.standard_normal(23) + 1j * rng.standard_normal(23)
    ah, al = core.dd_gaussian_matrix(1.7, za, zb)
    bh, bl = reference.dd_gaussian_matrix(1.7, za, zb)
    assert (ah == bh).all()
    assert np.abs(al - bl).max() < 1e-30


def test_dd_exp_against_mpmath(rng):
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 45
    x = rng.uniform(-40, 0, 50)
    hi, lo = dd_exp(x, np.zeros_like(x))
    for xi, h, l in zip(x, hi, lo):
        exact = mpmath.exp(mpmath.mpf(xi))
        err = abs((mpmath.mpf(h) + mpmath.mpf(l) - exact) / exact)
        assert err < mpmath.mpf("1e-30")


def test_dd_solve_against_mpmath(rng):
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 45
    n = 12
    # moderately ill-conditioned symmetric system
    nodes = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    ah, al = gaussian_matrix_dd(0.25, nodes, nodes)
    b = rng.standard_normal((n, 3))
    x = lu_solve_dd(lu_factor_dd(ah, al), b)
    amp = mpmath.matrix(n, n)
    for i in range(n):
        for j in range(n):
            amp[i, j] = mpmath.mpf(ah[i, j]) + mpmath.mpf(al[i, j])
    cols = []
    for j in range(3):
        xj = mpmath.lu_solve(amp, mpmath.matrix(b[:, j].tolist()))
        cols.append([float(xj[i]) for i in range(n)])
    xm = np.array(cols).T
    assert np.abs(x - xm).max() < 1e-13 * np.abs(xm).max()


def test_dd_tri_solves_match_reference(rng):
    n, m = 30, 17
    lh = np.tril(rng.standard_normal((n, n)), -1) + np.eye(n)
    ll = 1e-17 * np.tril(rng.standard_normal((n, n)), -1)
    uh = np.triu(rng.standard_normal((n, n))) + 3 * np.eye(n)
    ul = 1e-17 * np.triu(rng.standard_normal((n, n)))
    bh = rng.standard_normal((n, m))
    bl = np.zeros((n, m))
    for impl_a, impl_b in [(core, reference)]:
        ya = impl_a.dd_tri_solve_lower(lh, ll, bh, bl)
        yb = impl_b.dd_tri_solve_lower(lh, ll, bh, bl)
        assert np.abs(ya[0] + ya[1] - yb[0] - yb[1]).max() < 1e-14 * np.abs(yb[0]).max()
        xa = impl_a.dd_tri_solve_upper(uh, ul, *ya)
        xb = impl_b.dd_tri_solve_upper(uh, ul, *yb)
        assert np.abs(xa[0] + xa[1] - xb[0] - xb[1]).max() < 1e-14 * np.abs(xb[0]).max()


def test_pure_mode_env_var():
    import subprocess
    import sys

    code = "import pux2d; print(pux2d.kernel_backend)"
    env_out = subprocess.run(
        [sys.executable, "-c", code],
        capture_output=True,
        text=True,
        env={"PUX2D_PURE": "1", "PATH": "/usr/bin:/bin", "PYTHONPATH": "src"},
        cwd=".",
    )
    assert env_out.stdout.strip() == "numpy"
