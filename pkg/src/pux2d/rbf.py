"""Radial basis machinery: Gaussian interpolation basis, compactly supported
Wu weight functions, Vogel center layouts, and the precomputed least-squares
mapping template shared by every extension partition.

The mapping matrix A sends function values at the irregular centers to values
at the uniform grid offsets. Its defining system is catastrophically
ill-conditioned for nearly flat Gaussians, so besides the plain solve two
stabilized constructions are provided: a truncated-SVD pseudoinverse and a
compensated double-double solve that retains the full basis.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import _kernels, ddlinalg
from .errors import InsufficientDataError, SingularBasisError, UnderdeterminedError

DIRECT_COND_LIMIT = 1e12
SVD_CUTOFF = 1e-14
MAX_CENTERS = 400


@dataclass(frozen=True)
class GaussianBasis:
    """Gaussian radial function exp(-(eps*r)^2) with shape parameter eps."""

    epsilon: float = 2.0

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("shape parameter must be positive")

    def __call__(self, r):
        return np.exp(-((self.epsilon * np.asarray(r)) ** 2))


def gaussian(basis, r):
    """Evaluate the Gaussian basis at radius r >= 0."""
    return basis(r)


# (edge regularity, origin regularity, power, polynomial coefficients low->high)
_WU_TABLE = {
    1: (0, 2, (2.0, 1.0)),
    2: (0, 3, (8.0, 9.0, 3.0)),
    3: (2, 4, (4.0, 16.0, 12.0, 3.0)),
    4: (2, 5, (8.0, 40.0, 48.0, 25.0, 5.0)),
    5: (4, 6, (6.0, 36.0, 82.0, 72.0, 30.0, 5.0)),
}


@dataclass(frozen=True)
class WuFunction:
    """Compactly supported piecewise-polynomial bump, positive on [0, 1)."""

    edge_regularity: int
    origin_regularity: int
    power: int
    poly: tuple

    def __call__(self, r):
        r = np.asarray(r, dtype=np.float64)
        base = np.clip(1.0 - r, 0.0, None)
        acc = np.zeros_like(r)
        for c in reversed(self.poly):
            acc = acc * r + c
        return base ** self.power * acc


def wu_function(edge_regularity):
    """The tabulated Wu function with the requested support-edge regularity (1..5)."""
    if edge_regularity not in _WU_TABLE:
        raise ValueError(f"no Wu function with edge regularity {edge_regularity}")
    k, power, poly = _WU_TABLE[edge_regularity]
    return WuFunction(edge_regularity=edge_regularity, origin_regularity=k, power=power, poly=poly)


def wu_eval(wu, r):
    """Evaluate a Wu function at radius ratio r >= 0 (zero for r >= 1)."""
    return wu(r)


def vogel_nodes(m_centers, radius):
    """Quasi-uniform spiral of m points on the disc of the given radius."""
    if m_centers < 1:
        raise ValueError("need at least one node")
    j = np.arange(1, m_centers + 1)
    ang = j * np.pi * (3.0 - math.sqrt(5.0))
    return radius * np.sqrt(j / m_centers) * np.exp(1j * ang)


@dataclass
class StencilTemplate:
    """Precomputed least-squares mapping reused by every extension partition."""

    radius: float
    spacing: float
    offsets: np.ndarray  # (n, 2) integer grid offsets
    offset_points: np.ndarray  # (n,) complex physical offsets
    vogel: np.ndarray  # (m,) complex centers
    matrix: np.ndarray  # (n, m) mapping from center values to offset values
    weight_samples: np.ndarray  # (n,) Wu weight at each offset
    basis: GaussianBasis
    wu: WuFunction
    method: str
    effective_rank: int
    condition: float

    @property
    def n_offsets(self):
        return self.offsets.shape[0]

    @property
    def n_centers(self):
        return self.vogel.shape[0]


def _map_matrix_dd(basis, nodes, points):
    """A = Phi_points Phi_nodes^{-1} via double-double entries and LU."""
    eps = basis.epsilon
    ph, pl = _kernels.dd_gaussian_matrix(eps, nodes, nodes)
    lh, ll, uh, ul, piv = ddlinalg.lu_factor_dd(ph, pl)
    bh, bl = _kernels.dd_gaussian_matrix(eps, points, nodes)
    yh, yl = _kernels.dd_tri_solve_lower(lh, ll, bh.T[piv].copy(), bl.T[piv].copy())
    xh, xl = _kernels.dd_tri_solve_upper(uh, ul, yh, yl)
    return (xh + xl).T


def build_stencil(spacing, radius, m_centers, basis, wu, stabilizer="auto"):
    """Build the shared mapping template for a partition radius and grid spacing.

    stabilizer: "auto" (compensated solve when ill-conditioned), "svd"
    (truncated pseudoinverse), or "dd" (force the compensated solve).
    """
    if m_centers > MAX_CENTERS:
        raise ValueError(f"center count {m_centers} exceeds the supported maximum {MAX_CENTERS}")
    k = int(math.floor(radius / spacing))
    ix, iy = np.meshgrid(np.arange(-k, k + 1), np.arange(-k, k + 1), indexing="ij")
    keep = np.hypot(ix, iy) * spacing <= radius
    offsets = np.stack([ix[keep], iy[keep]], axis=1)
    points = offsets[:, 0] * spacing + 1j * offsets[:, 1] * spacing
    n = points.shape[0]
    if n < 2 * m_centers:
        raise InsufficientDataError(
            f"{n} grid offsets inside the partition cannot support {m_centers} centers"
        )
    nodes = vogel_nodes(m_centers, radius)
    phi = basis(np.abs(nodes[:, None] - nodes[None, :]))
    phit = basis(np.abs(points[:, None] - nodes[None, :]))
    svals = np.linalg.svd(phi, compute_uv=False)
    cond = svals[0] / svals[-1]
    if cond <= DIRECT_COND_LIMIT:
        matrix = np.linalg.solve(phi, phit.T).T
        method = "direct"
        rank = m_centers
    elif stabilizer == "svd":
        u, s, vt = np.linalg.svd(phi)
        rank = int((s >= SVD_CUTOFF * s[0]).sum())
        if rank < m_centers / 2:
            raise SingularBasisError(
                f"stabilized basis rank {rank} fell below half the center count {m_centers}"
            )
        matrix = phit @ ((vt[:rank].T / s[:rank]) @ u[:, :rank].T)
        method = "svd"
    else:
        matrix = _map_matrix_dd(basis, nodes, points)
        method = "dd"
        rank = m_centers
    weight_samples = wu(np.abs(points) / radius)
    return StencilTemplate(
        radius=radius,
        spacing=spacing,
        offsets=offsets,
        offset_points=points,
        vogel=nodes,
        matrix=matrix,
        weight_samples=weight_samples,
        basis=basis,
        wu=wu,
        method=method,
        effective_rank=rank,
        condition=float(cond),
    )


def local_least_squares_extend(template, inside_rows, outside_rows, inside_values):
    """Fit center values to the interior data and evaluate the exterior rows.

    Returns (outside_values, relative_residual).
    """
    inside_rows = np.asarray(inside_rows, dtype=np.intp)
    outside_rows = np.asarray(outside_rows, dtype=np.intp)
    inside_values = np.asarray(inside_values, dtype=np.float64)
    m = template.n_centers
    if inside_rows.shape[0] < m:
        raise UnderdeterminedError(
            f"{inside_rows.shape[0]} interior rows cannot determine {m} center values"
        )
    a_in = template.matrix[inside_rows]
    f, _, _, _ = sla.lstsq(a_in, inside_values, lapack_driver="gelsy")
    norm = np.linalg.norm(inside_values)
    residual = float(np.linalg.norm(a_in @ f - inside_values) / norm) if norm > 0 else 0.0
    outside_values = template.matrix[outside_rows] @ f
    return outside_values, residual
