"""Partition placement, Shepard blending weights, parameter heuristics and the
assembly of the global compactly supported extension on the uniform grid.

Extension partitions are discs of one shared radius centered on interior grid
nodes along the boundary; a second layer of zero-valued discs outside the
domain forces the blended extension to decay to zero with the regularity of
the weight function.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import geometry, rbf
from .errors import (
    CoverageGapError,
    NotCoveredError,
    SnapFailureError,
    UnderdeterminedError,
)


@dataclass(frozen=True)
class UniformGrid:
    """FFT-style uniform grid on the box [-L, L]^2; node (0,0) sits at (-L,-L)."""

    box_half: float
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("grid needs at least two points per side")
        if self.box_half <= 0:
            raise ValueError("box half-side must be positive")

    @property
    def spacing(self):
        return 2.0 * self.box_half / self.n

    def axis(self):
        return -self.box_half + self.spacing * np.arange(self.n)

    def nodes(self):
        ax = self.axis()
        return ax[:, None] + 1j * ax[None, :]

    def index_of(self, z):
        """Nearest node index (ix, iy) of a physical point."""
        ix = int(np.clip(round((z.real + self.box_half) / self.spacing), 0, self.n - 1))
        iy = int(np.clip(round((z.imag + self.box_half) / self.spacing), 0, self.n - 1))
        return ix, iy

    def position(self, ix, iy):
        return (-self.box_half + ix * self.spacing) + 1j * (-self.box_half + iy * self.spacing)


def heuristic_k_tilde(points_per_radius):
    """Weight-function edge regularity suited to a given grid resolution per radius."""
    if points_per_radius <= 0:
        raise ValueError("points-per-radius must be positive")
    return max(1, min(int(math.floor(math.sqrt(points_per_radius) - 0.9)), 5))


def heuristic_m_centers(points_per_radius):
    """Center count per partition suited to a given grid resolution per radius."""
    if points_per_radius <= 0:
        raise ValueError("points-per-radius must be positive")
    m = round(min(0.8 * math.pi * points_per_radius**2 / 4.0, 4.0 * points_per_radius))
    return min(int(m), rbf.MAX_CENTERS)


@dataclass
class Covering:
    """Extension and zero partitions over the boundary of one domain."""

    grid: UniformGrid
    radius: float
    extension_centers: np.ndarray  # (n_p, 2) integer node indices
    extension_curve: np.ndarray  # (n_p,) curve index of each partition
    zero_centers: np.ndarray  # (n_p0,) complex
    zero_radii: np.ndarray  # (n_p0,)
    inside: np.ndarray  # (n, n) classification of the grid nodes
    inside_counts: np.ndarray  # (n_p,) interior nodes per partition
    points_per_radius: float
    betas: np.ndarray = None
    beta_min: float = None

    @property
    def n_extension(self):
        return self.extension_centers.shape[0]

    @property
    def n_zero(self):
        return self.zero_centers.shape[0]

    def extension_positions(self):
        ax = self.grid.axis()
        return ax[self.extension_centers[:, 0]] + 1j * ax[self.extension_centers[:, 1]]

    def resolve_betas(self, m_centers):
        self.betas = self.inside_counts / float(m_centers)
        self.beta_min = float(self.betas.min()) if self.betas.size else math.inf
        return self.betas


def _window(grid, center, radius):
    """Index ranges of grid nodes within `radius` of a physical center."""
    ix0 = max(0, int(math.ceil((center.real - radius + grid.box_half) / grid.spacing)))
    ix1 = min(grid.n - 1, int(math.floor((center.real + radius + grid.box_half) / grid.spacing)))
    iy0 = max(0, int(math.ceil((center.imag - radius + grid.box_half) / grid.spacing)))
    iy1 = min(grid.n - 1, int(math.floor((center.imag + radius + grid.box_half) / grid.spacing)))
    return ix0, ix1, iy0, iy1


def _nodes_in_disc(grid, center, radius):
    ix0, ix1, iy0, iy1 = _window(grid, center, radius)
    if ix1 < ix0 or iy1 < iy0:
        return (np.empty(0, np.intp), np.empty(0, np.intp))
    ax = grid.axis()
    xs = ax[ix0:ix1 + 1][:, None] - center.real
    ys = ax[iy0:iy1 + 1][None, :] - center.imag
    keep = xs * xs + ys * ys <= radius * radius
    ii, jj = np.nonzero(keep)
    return ii + ix0, jj + iy0


def _snap_to_interior(grid, inside, center, radius):
    ii, jj = _nodes_in_disc(grid, center, radius)
    if ii.size == 0:
        raise SnapFailureError(f"no grid node within {radius} of {center}")
    ok = inside[ii, jj]
    if not ok.any():
        raise SnapFailureError(f"no interior grid node within {radius} of {center}")
    ii, jj = ii[ok], jj[ok]
    ax = grid.axis()
    d = np.hypot(ax[ii] - center.real, ax[jj] - center.imag)
    k = int(np.argmin(d))
    return ii[k], jj[k]


def _shrink_zero_radius(grid, inside, center, radius):
    """Largest radius <= the requested one whose disc holds no interior node."""

    def clean(r):
        ii, jj = _nodes_in_disc(grid, center, r)
        return ii.size == 0 or not inside[ii, jj].any()

    if clean(radius):
        return radius
    lo, hi = 0.0, radius
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        if clean(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _cavity_interior_nodes(grid, inside, cavity):
    """Grid nodes strictly inside a cavity (outside the domain, enclosed by the curve)."""
    t = np.linspace(0.0, 2 * np.pi, 512, endpoint=False)
    pos, _, _ = cavity.evaluate(t)
    pad = 2 * grid.spacing
    ix0 = max(0, int((pos.real.min() - pad + grid.box_half) / grid.spacing))
    ix1 = min(grid.n - 1, int((pos.real.max() + pad + grid.box_half) / grid.spacing) + 1)
    iy0 = max(0, int((pos.imag.min() - pad + grid.box_half) / grid.spacing))
    iy1 = min(grid.n - 1, int((pos.imag.max() + pad + grid.box_half) / grid.spacing) + 1)
    ax = grid.axis()
    sub = ax[ix0:ix1 + 1][:, None] + 1j * ax[iy0:iy1 + 1][None, :]
    wind = geometry._polygon_winding(cavity, sub.ravel()).reshape(sub.shape)
    ii, jj = np.nonzero((wind != 0) & ~inside[ix0:ix1 + 1, iy0:iy1 + 1])
    return ii + ix0, jj + iy0


def build_covering(domain, grid, radius, n_per_curve, mask, m_centers=None):
    """Place extension partitions on interior grid nodes and zero partitions outside.

    `mask` is the classification of all grid nodes (flattened in [ix, iy]
    order or shaped (n, n)). Zero partitions are placed along the outer
    boundary always, and inside a cavity only when the cavity is not already
    covered by extension partitions.
    """
    inside = np.asarray(mask.inside if hasattr(mask, "inside") else mask, dtype=bool)
    inside = inside.reshape(grid.n, grid.n)
    if radius <= 2 * grid.spacing:
        raise ValueError("partition radius must exceed two grid spacings")
    curves = domain.curves
    if len(n_per_curve) != len(curves):
        raise ValueError("need one partition count per boundary component")
    centers = []
    curve_of = []
    for ci, (curve, n_c) in enumerate(zip(curves, n_per_curve)):
        arclen = geometry.total_arc_length(curve)
        if arclen / n_c >= radius:
            raise ValueError(
                f"{n_c} partitions cannot overlap along component {ci}: "
                f"spacing {arclen / n_c:.4g} >= radius {radius:.4g}"
            )
        for z in geometry.arc_length_centers(curve, n_c):
            centers.append(_snap_to_interior(grid, inside, complex(z), radius))
            curve_of.append(ci)
    ext_centers = np.asarray(centers, dtype=np.intp).reshape(-1, 2)
    ext_curve = np.asarray(curve_of, dtype=np.intp)

    covered = np.zeros((grid.n, grid.n), dtype=bool)
    ax = grid.axis()
    inside_counts = np.empty(ext_centers.shape[0], dtype=np.intp)
    for i, (ix, iy) in enumerate(ext_centers):
        c = grid.position(ix, iy)
        ii, jj = _nodes_in_disc(grid, c, radius)
        covered[ii, jj] = True
        inside_counts[i] = int(inside[ii, jj].sum())

    # zero layer: outer boundary always, cavities only when not fully covered
    zero_centers = []
    zero_radii = []

    def add_zero_layer(curve, n_c):
        t = geometry.arc_length_params(curve, 2 * n_c)
        pos, _, _ = curve.evaluate(t)
        normal = geometry.outward_normal(curve, t)
        for z in pos + radius * normal:
            r = _shrink_zero_radius(grid, inside, complex(z), radius)
            zero_centers.append(complex(z))
            zero_radii.append(r)

    add_zero_layer(curves[0], n_per_curve[0])
    for ci, cavity in enumerate(domain.cavities):
        ii, jj = _cavity_interior_nodes(grid, inside, cavity)
        if ii.size and not covered[ii, jj].all():
            add_zero_layer(cavity, n_per_curve[ci + 1])

    zero_centers = np.asarray(zero_centers, dtype=np.complex128)
    zero_radii = np.asarray(zero_radii, dtype=np.float64)
    for zc, zr in zip(zero_centers, zero_radii):
        ii, jj = _nodes_in_disc(grid, zc, zr)
        covered[ii, jj] = True

    # every exterior node adjacent to an interior one must be covered
    adj = np.zeros_like(inside)
    adj[1:, :] |= inside[:-1, :]
    adj[:-1, :] |= inside[1:, :]
    adj[:, 1:] |= inside[:, :-1]
    adj[:, :-1] |= inside[:, 1:]
    gap = adj & ~inside & ~covered
    if gap.any():
        ix, iy = np.argwhere(gap)[0]
        raise CoverageGapError(
            f"grid node ({ax[ix]:.4g}, {ax[iy]:.4g}) borders the domain but no partition covers it"
        )

    cov = Covering(
        grid=grid,
        radius=radius,
        extension_centers=ext_centers,
        extension_curve=ext_curve,
        zero_centers=zero_centers,
        zero_radii=zero_radii,
        inside=inside,
        inside_counts=inside_counts,
        points_per_radius=radius / grid.spacing,
    )
    if m_centers is not None:
        cov.resolve_betas(m_centers)
    return cov


def shepard_weights(covering, wu, node):
    """Normalized weights of every partition containing the node.

    Returns a list of (partition_index, weight); extension partitions come
    first (0 .. n_extension-1), zero partitions follow.
    """
    node = complex(node)
    idx = []
    psi = []
    for i, pos in enumerate(covering.extension_positions()):
        r = abs(node - pos) / covering.radius
        if r < 1.0:
            v = float(wu(r))
            if v > 0.0:
                idx.append(i)
                psi.append(v)
    for j, (zc, zr) in enumerate(zip(covering.zero_centers, covering.zero_radii)):
        if zr <= 0.0:
            continue
        r = abs(node - zc) / zr
        if r < 1.0:
            v = float(wu(r))
            if v > 0.0:
                idx.append(covering.n_extension + j)
                psi.append(v)
    total = math.fsum(psi)
    if total <= 0.0:
        raise NotCoveredError(f"node {node} carries no partition weight")
    return [(i, p / total) for i, p in zip(idx, psi)]


@dataclass
class ExtendedField:
    """Globally blended, compactly supported extension sampled on the grid."""

    grid: UniformGrid
    values: np.ndarray  # (n, n) float64
    provenance: np.ndarray  # (n, n) int8: 0 zero, 1 original interior, 2 extended
    residuals: np.ndarray = None  # per-partition relative fit residuals
    local_maxima: np.ndarray = None  # per-partition max |local extension|

    PROV_ZERO = 0
    PROV_INSIDE = 1
    PROV_EXTENDED = 2


def build_extension(f, domain, grid, covering, template, beta_target=0.0):
    """Blend per-partition least-squares extensions into the global extension.

    `f` is either a callable f(x, y) sampled on interior nodes or an (n, n)
    array of grid samples. `beta_target` > 0 subsamples interior rows of each
    partition by a deterministic stride aiming at that data-to-center ratio.
    """
    del domain
    n = grid.n
    inside = covering.inside
    if callable(f):
        values = np.zeros((n, n))
        ax = grid.axis()
        ii, jj = np.nonzero(inside)
        values[ii, jj] = f(ax[ii], ax[jj])
    else:
        values = np.asarray(f, dtype=np.float64)
        if values.shape != (n, n):
            raise ValueError("grid samples must be shaped (n, n)")
        values = np.where(inside, values, 0.0)
    if abs(covering.radius - template.radius) > 1e-12 * template.radius:
        raise ValueError("template radius does not match the covering radius")

    m_centers = template.n_centers
    covering.resolve_betas(m_centers)
    num = np.zeros((n, n))
    den = np.zeros((n, n))
    touched = np.zeros((n, n), dtype=bool)
    residuals = np.empty(covering.n_extension)
    local_maxima = np.zeros(covering.n_extension)

    offsets = template.offsets
    for i, (cx, cy) in enumerate(covering.extension_centers):
        gx = offsets[:, 0] + cx
        gy = offsets[:, 1] + cy
        if gx.min() < 0 or gy.min() < 0 or gx.max() >= n or gy.max() >= n:
            raise ValueError(f"extension partition {i} leaves the computational box")
        is_in = inside[gx, gy]
        inside_rows = np.flatnonzero(is_in)
        outside_rows = np.flatnonzero(~is_in)
        if inside_rows.size < m_centers:
            raise UnderdeterminedError(
                f"partition {i}: {inside_rows.size} interior nodes for {m_centers} centers"
            )
        rows = inside_rows
        if beta_target and beta_target > 0:
            stride = int(inside_rows.size / (beta_target * m_centers))
            if stride > 1:
                rows = inside_rows[::stride]
                if rows.size < m_centers:
                    rows = inside_rows
        data = values[gx[rows], gy[rows]]
        ext, res = rbf.local_least_squares_extend(template, rows, outside_rows, data)
        residuals[i] = res
        if ext.size:
            local_maxima[i] = float(np.abs(ext).max())
        ox, oy = gx[outside_rows], gy[outside_rows]
        psi = template.weight_samples[outside_rows]
        np.add.at(num, (ox, oy), psi * ext)
        np.add.at(den, (ox, oy), psi)
        touched[ox, oy] = True

    wu = template.wu
    ax = grid.axis()
    for zc, zr in zip(covering.zero_centers, covering.zero_radii):
        if zr <= 0.0:
            continue
        ii, jj = _nodes_in_disc(grid, zc, zr)
        if ii.size == 0:
            continue
        r = np.hypot(ax[ii] - zc.real, ax[jj] - zc.imag) / zr
        np.add.at(den, (ii, jj), wu(r))

    provenance = np.where(inside, ExtendedField.PROV_INSIDE, ExtendedField.PROV_ZERO).astype(np.int8)
    blend = touched & ~inside & (den > 0.0)
    provenance[blend] = ExtendedField.PROV_EXTENDED
    values[blend] = num[blend] / den[blend]
    return ExtendedField(
        grid=grid,
        values=values,
        provenance=provenance,
        residuals=residuals,
        local_maxima=local_maxima,
    )
