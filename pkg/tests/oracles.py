"""Independent reference computations the tests check the package against.

Everything here deliberately avoids the code paths under test: winding numbers
come from ray crossings of a dense polygon, arc lengths from adaptive
quadrature, and panel integrals from scipy's adaptive rules.
"""

import numpy as np
from scipy.integrate import quad


def polygon_winding(vertices, points, block=4096):
    """Winding number by crossing counts of the ray x -> +inf, vectorized."""
    vx = vertices.real
    vy = vertices.imag
    wx = np.roll(vx, -1)
    wy = np.roll(vy, -1)
    points = np.asarray(points, dtype=np.complex128).ravel()
    out = np.empty(points.shape[0], dtype=int)
    for i0 in range(0, points.shape[0], block):
        px = points[i0:i0 + block].real[:, None]
        py = points[i0:i0 + block].imag[:, None]
        upward = (vy[None, :] <= py) & (wy[None, :] > py)
        downward = (vy[None, :] > py) & (wy[None, :] <= py)
        t = (py - vy[None, :]) / np.where(wy[None, :] == vy[None, :], 1.0, wy[None, :] - vy[None, :])
        xs = vx[None, :] + t * (wx[None, :] - vx[None, :])
        cross = xs > px
        out[i0:i0 + block] = (upward & cross).sum(axis=1) - (downward & cross).sum(axis=1)
    return out


def curve_polygon(curve, n_vertices):
    t = np.linspace(0.0, 2 * np.pi, n_vertices, endpoint=False)
    pos, _, _ = curve.evaluate(t)
    return pos


def domain_winding_inside(domain, points, n_vertices_per_curve):
    """Inside-the-domain decision from polygon winding numbers of every component."""
    points = np.asarray(points, dtype=np.complex128)
    total = np.zeros(points.shape[0], dtype=int)
    for curve, n_vertices in zip(domain.curves, n_vertices_per_curve):
        total += polygon_winding(curve_polygon(curve, n_vertices), points)
    return total == 1


def adaptive_arc_length(curve):
    """Arc length via scipy adaptive quadrature."""
    val, _ = quad(lambda t: abs(curve.evaluate(t)[1]), 0.0, 2 * np.pi, limit=400, epsabs=1e-14, epsrel=1e-14)
    return val


def adaptive_panel_layer_integral(curve, t0, t1, density_fn, z, eps=1e-15):
    """Im( int_panel mu(t) tau'(t) / (tau(t) - z) dt ) by adaptive quadrature."""

    def integrand(t):
        pos, d1, _ = curve.evaluate(t)
        return float((density_fn(t) * d1 / (pos - z)).imag)

    val, _ = quad(integrand, t0, t1, limit=800, epsabs=eps, epsrel=eps)
    return val


def midpoint_rule_layer_potential(curve, density_fn, z, n=1_000_000):
    """Periodic midpoint rule for the layer potential; spectral for analytic data."""
    t = (np.arange(n) + 0.5) * (2 * np.pi / n)
    pos, d1, _ = curve.evaluate(t)
    vals = (density_fn(t) * d1 / (pos - z)).imag
    return vals.sum() * (2 * np.pi / n)


def midpoint_rule_circle_boundary_kernel(density_fn, s, n=1_000_000):
    """Midpoint rule of the unit-circle double-layer integrand with target on the circle.

    The difference of unit-circle points is written 2i sin((t-s)/2) e^{i(t+s)/2}
    to avoid cancellation near the removable singularity at t = s.
    """
    t = (np.arange(n) + 0.5) * (2 * np.pi / n)
    den = 2j * np.sin((t - s) / 2) * np.exp(1j * (t + s) / 2)
    vals = (density_fn(t) * 1j * np.exp(1j * t) / den).imag
    return vals.sum() * (2 * np.pi / n)


def series_bessel_j01(x, terms=50):
    """Plain Taylor series for J0 and J1; accurate for small |x|."""
    import math

    j0 = 0.0
    j1 = 0.0
    for k in range(terms):
        j0 += (-1) ** k * (x / 2) ** (2 * k) / math.factorial(k) ** 2
        j1 += (-1) ** k * (x / 2) ** (2 * k + 1) / (math.factorial(k) * math.factorial(k + 1))
    return j0, j1
