"""Free-space Poisson solve on the uniform grid via a truncated Green's function.

The log kernel is zeroed beyond a radius R exceeding every source-target
distance that matters, which leaves the convolution unchanged on the box while
giving the kernel a smooth closed-form Fourier transform. The convolution is
then a zero-padded FFT multiply. Retained central-block Fourier coefficients
support evaluation of the particular solution at arbitrary points.
"""

from dataclasses import dataclass

import numpy as np

from .errors import OutOfBoxError

_SQ2OPI = 7.9788456080286535587989e-1
_PIO4 = 7.85398163397448309616e-1
_THPIO4 = 2.35619449019234492885

_J0_RP = (-4.79443220978201773821e9, 1.95617491946556577543e12,
          -2.49248344360967716204e14, 9.70862251047306323952e15)
_J0_RQ = (4.99563147152651017219e2, 1.73785401676374683123e5,
          4.84409658339962045305e7, 1.11855537045356834862e10,
          2.11277520115489217587e12, 3.10518229857422583814e14,
          3.18121955943204943306e16, 1.71086294081043136091e18)
_J0_PP = (7.96936729297347051624e-4, 8.28352392107440799803e-2,
          1.23953371646414299388e0, 5.44725003058768775090e0,
          8.74716500199817011941e0, 5.30324038235394892183e0,
          9.99999999999999997821e-1)
_J0_PQ = (9.24408810558863637013e-4, 8.56288474354474431428e-2,
          1.25352743901058953537e0, 5.47097740330417105182e0,
          8.76190883237069594232e0, 5.30605288235394617618e0,
          1.00000000000000000218e0)
_J0_QP = (-1.13663838898469149931e-2, -1.28252718670509318512e0,
          -1.95539544257735972385e1, -9.32060152123768231369e1,
          -1.77681167980488050595e2, -1.47077505154951170175e2,
          -5.14105326766599330220e1, -6.05014350600728481186e0)
_J0_QQ = (6.43178256118178023184e1, 8.56430025976980587198e2,
          3.88240183605401609683e3, 7.24046774195652478189e3,
          5.93072701187316984827e3, 2.06209331660327847417e3,
          2.42005740240291393179e2)
_J0_DR1 = 5.78318596294678452118e0
_J0_DR2 = 3.04712623436620863991e1

_J1_RP = (-8.99971225705559398224e8, 4.52228297998194034323e11,
          -7.27494245221818276015e13, 3.68295732863852883286e15)
_J1_RQ = (6.20836478118054335476e2, 2.56987256757748830383e5,
          8.35146791431949253037e7, 2.21511595479792499675e10,
          4.74914122079991414898e12, 7.84369607876235854894e14,
          8.95222336184627338078e16, 5.32278620332680085395e18)
_J1_PP = (7.62125616208173112003e-4, 7.31397056940917570436e-2,
          1.12719608129684925192e0, 5.11207951146807644818e0,
          8.42404590141772420927e0, 5.21451598682361504063e0,
          1.00000000000000000254e0)
_J1_PQ = (5.71323128072548699714e-4, 6.88455908754495404082e-2,
          1.10514232634061696926e0, 5.07386386128601488557e0,
          8.39985554327604159757e0, 5.20982848682361821619e0,
          9.99999999999999997461e-1)
_J1_QP = (5.10862594750176621635e-2, 4.98213872951233449420e0,
          7.58238284132545283818e1, 3.66779609360150777800e2,
          7.10856304998926107277e2, 5.97489612400613639965e2,
          2.11688757100572135698e2, 2.52070205858023719784e1)
_J1_QQ = (7.42373277035675149943e1, 1.05644886038262816351e3,
          4.98641058337653607651e3, 9.56231892404756170795e3,
          7.99704160447350683650e3, 2.82619278517639096600e3,
          3.36093607810698293419e2)
_J1_Z1 = 1.46819706421238932572e1
_J1_Z2 = 4.92184563216946036703e1


def _polevl(x, coef):
    ans = np.full_like(x, coef[0])
    for c in coef[1:]:
        ans = ans * x + c
    return ans


def _p1evl(x, coef):
    ans = x + coef[0]
    for c in coef[1:]:
        ans = ans * x + c
    return ans


def bessel_j01(x):
    """Bessel functions J0 and J1 of the first kind, double precision, x >= 0."""
    x = np.abs(np.asarray(x, dtype=np.float64))
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    j0 = np.empty_like(x)
    j1 = np.empty_like(x)
    lo = x <= 5.0
    if lo.any():
        z = x[lo] * x[lo]
        j0[lo] = (z - _J0_DR1) * (z - _J0_DR2) * _polevl(z, _J0_RP) / _p1evl(z, _J0_RQ)
        tiny = x[lo] < 1e-5
        if tiny.any():
            zt = z[tiny]
            j0[np.flatnonzero(lo)[tiny]] = 1.0 - zt / 4.0
        j1[lo] = _polevl(z, _J1_RP) / _p1evl(z, _J1_RQ) * x[lo] * (z - _J1_Z1) * (z - _J1_Z2)
    hi = ~lo
    if hi.any():
        xx = x[hi]
        w = 5.0 / xx
        q = w * w
        p = _polevl(q, _J0_PP) / _polevl(q, _J0_PQ)
        qq = _polevl(q, _J0_QP) / _p1evl(q, _J0_QQ)
        xn = xx - _PIO4
        j0[hi] = _SQ2OPI * (p * np.cos(xn) - w * qq * np.sin(xn)) / np.sqrt(xx)
        p = _polevl(q, _J1_PP) / _polevl(q, _J1_PQ)
        qq = _polevl(q, _J1_QP) / _p1evl(q, _J1_QQ)
        xn = xx - _THPIO4
        j1[hi] = _SQ2OPI * (p * np.cos(xn) - w * qq * np.sin(xn)) / np.sqrt(xx)
    if scalar:
        return float(j0[0]), float(j1[0])
    return j0, j1


def kernel_hat_radial(k, radius):
    """Closed-form transform of the radius-truncated log kernel at |k| = k."""
    k = np.asarray(k, dtype=np.float64)
    scalar = k.ndim == 0
    k = np.atleast_1d(k)
    out = np.empty_like(k)
    zero = k == 0.0
    out[zero] = radius * radius / 4.0 * (1.0 - 2.0 * np.log(radius))
    nz = ~zero
    if nz.any():
        kk = k[nz]
        j0, j1 = bessel_j01(radius * kk)
        out[nz] = (1.0 - j0) / (kk * kk) - radius * np.log(radius) * j1 / kk
    return float(out[0]) if scalar else out


@dataclass
class SpectralKernel:
    """Sampled kernel transform on the padded FFT lattice."""

    box_half: float
    n_grid: int
    oversampling: int
    radius: float
    kernel_hat: np.ndarray
    precomputed: bool = False

    @property
    def n_padded(self):
        return self.oversampling * self.n_grid


def build_kernel(grid, oversampling=4, truncation_radius=None):
    """Sample the truncated-kernel transform for a grid padded by `oversampling`.

    The default truncation radius is 1.5 times the box side: it exceeds the
    box diameter, so the truncation is exact for any source and target in the
    box, and the padding constraint is oversampling >= 1 + radius/(2 L).
    """
    if oversampling < 3:
        raise ValueError("oversampling factor must be at least 3")
    radius = 3.0 * grid.box_half if truncation_radius is None else float(truncation_radius)
    if oversampling < 1.0 + radius / (2.0 * grid.box_half):
        raise ValueError("padding too small for the kernel truncation radius")
    n_pad = oversampling * grid.n
    k1 = 2.0 * np.pi * np.fft.fftfreq(n_pad, d=grid.spacing)
    kk = np.hypot(k1[:, None], k1[None, :])
    return SpectralKernel(
        box_half=grid.box_half,
        n_grid=grid.n,
        oversampling=oversampling,
        radius=radius,
        kernel_hat=kernel_hat_radial(kk, radius),
    )


def build_kernel_precomputed(grid, truncation_radius=None):
    """Effective kernel for two-times padding via real-space folding.

    The transform is sampled on a four-times lattice, transformed to real
    space, and restricted to the offsets that any source-target pair in the
    box can realize. The folded kernel reproduces the four-times result on
    the box while halving the FFT work per solve.
    """
    big = build_kernel(grid, oversampling=4, truncation_radius=truncation_radius)
    n = grid.n
    spatial = np.fft.ifft2(big.kernel_hat).real
    idx = np.concatenate([np.arange(n), np.arange(3 * n, 4 * n)])
    folded = spatial[np.ix_(idx, idx)]
    kernel_hat = np.fft.fft2(folded).real
    return SpectralKernel(
        box_half=grid.box_half,
        n_grid=n,
        oversampling=2,
        radius=big.radius,
        kernel_hat=kernel_hat,
        precomputed=True,
    )


@dataclass
class ParticularSolution:
    """Particular solution on the grid plus retained Fourier data for point evaluation."""

    values: np.ndarray  # (n, n) real, [ix, iy]
    coeffs: np.ndarray  # (m, m) complex retained block of the padded transform
    modes: np.ndarray  # (m,) integer mode numbers of the block rows/columns
    box_half: float
    n_grid: int
    n_padded: int
    f_hat_block: np.ndarray = None
    imag_residue: float = 0.0


_RETAIN_REL_TOL = 1e-17  # ring-max trim threshold for retained coefficients


def _retained_block(u_hat_shifted, n_pad):
    """Central square block outside of which every coefficient ring is negligible.

    The padded transform samples the full Nyquist band of the grid; modes are
    kept out to the last square ring whose maximum magnitude still matters.
    """
    c = n_pad // 2
    mag = np.abs(u_hat_shifted)
    peak = mag.max()
    jx = np.abs(np.arange(n_pad) - c)
    ring = np.maximum(jx[:, None], jx[None, :])
    order = np.argsort(ring.ravel())
    ringmax = np.maximum.accumulate(mag.ravel()[order[::-1]])[::-1]
    boundaries = np.searchsorted(ring.ravel()[order], np.arange(n_pad // 2 + 1))
    keep = n_pad // 2
    for r in range(n_pad // 2, 0, -1):
        b = boundaries[r] if r < boundaries.shape[0] else mag.size
        if b < mag.size and ringmax[b] > _RETAIN_REL_TOL * peak:
            keep = r
            break
    keep = min(keep, n_pad // 2 - 1)  # drop the unpaired Nyquist ring
    return slice(c - keep, c + keep + 1), np.arange(-keep, keep + 1)


def solve_free_space(fe, kernel, keep_forcing_spectrum=False):
    """Solve the free-space Poisson problem for a compactly supported forcing.

    The forcing must vanish on the outermost grid ring so its support stays
    strictly inside the box.
    """
    values = np.asarray(fe.values if hasattr(fe, "values") else fe, dtype=np.float64)
    n = values.shape[0]
    if n != kernel.n_grid:
        raise ValueError("forcing grid does not match the kernel grid")
    ring = max(np.abs(values[0, :]).max(), np.abs(values[-1, :]).max(),
               np.abs(values[:, 0]).max(), np.abs(values[:, -1]).max())
    if ring != 0.0:
        raise ValueError("forcing is not zero on the boundary ring of the box")
    n_pad = kernel.n_padded
    padded = np.zeros((n_pad, n_pad))
    padded[:n, :n] = values
    f_hat = np.fft.fft2(padded)
    # kernel transform is for the kernel -log(r)/(2 pi); the convention
    # Laplacian(u) = f needs the opposite sign
    u_hat = -kernel.kernel_hat * f_hat
    u_pad = np.fft.ifft2(u_hat)
    u = u_pad.real[:n, :n].copy()
    residue = float(np.abs(u_pad.imag).max() / max(np.abs(u_pad.real).max(), 1e-300))
    shifted = np.fft.fftshift(u_hat)
    sl, modes = _retained_block(shifted, n_pad)
    block = shifted[sl, sl].copy()
    fblock = None
    if keep_forcing_spectrum:
        fblock = np.fft.fftshift(f_hat)[sl, sl].copy()
    return ParticularSolution(
        values=u,
        coeffs=block,
        modes=modes,
        box_half=kernel.box_half,
        n_grid=n,
        n_padded=n_pad,
        f_hat_block=fblock,
        imag_residue=residue,
    )


def _phase_matrix(sol, coords):
    # mode m phase: exp(2 pi i m (x + L) / (2 L s))
    frac = (coords + sol.box_half) / (2.0 * sol.box_half * (sol.n_padded // sol.n_grid))
    return np.exp(2j * np.pi * np.outer(frac, sol.modes))


def eval_at_points(sol, points, tol=1e-14, method="direct"):
    """Evaluate the retained Fourier series of the particular solution at points.

    method "direct" sums the retained modes exactly (up to rounding; `tol` is
    ignored). method "nufft" delegates to finufft with the same contract and
    requested tolerance, when that library is available.
    """
    points = np.asarray(points, dtype=np.complex128).ravel()
    if (np.abs(points.real) > sol.box_half + 1e-12).any() or (
        np.abs(points.imag) > sol.box_half + 1e-12
    ).any():
        raise OutOfBoxError("evaluation point outside the computational box")
    scale = 1.0 / (sol.n_padded * sol.n_padded)
    if method == "nufft":
        import finufft

        period = 2.0 * sol.box_half * (sol.n_padded // sol.n_grid)
        x = 2.0 * np.pi * (points.real + sol.box_half) / period
        y = 2.0 * np.pi * (points.imag + sol.box_half) / period
        vals = finufft.nufft2d2(x, y, sol.coeffs.astype(np.complex128), isign=1, eps=tol)
        return vals.real * scale
    out = np.empty(points.shape[0])
    block = max(1, (1 << 22) // max(1, sol.n_grid))
    for i0 in range(0, points.shape[0], block):
        pts = points[i0:i0 + block]
        ex = _phase_matrix(sol, pts.real)
        ey = _phase_matrix(sol, pts.imag)
        out[i0:i0 + block] = ((ex @ sol.coeffs) * ey).sum(axis=1).real * scale
    return out


def eval_on_subgrid(sol, n_eval):
    """Sample the retained Fourier series on an n_eval x n_eval uniform grid of the box.

    Identical to eval_at_points on the tensor grid with nodes -L + m (2L/n_eval).
    """
    coords = -sol.box_half + 2.0 * sol.box_half * np.arange(n_eval) / n_eval
    e1 = _phase_matrix(sol, coords)
    u = (e1 @ sol.coeffs @ e1.T).real / (sol.n_padded * sol.n_padded)
    return u
