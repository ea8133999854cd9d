"""Boundary curves, panel quadrature, arc-length utilities and point classification.

Curves belong to the trigonometric family

    tau(t) = R * exp(i n t) * (c0 + sum_j (c_j cos(j t) + d_j sin(j t))) + a + i b

on t in [0, 2pi). Orientation n = +1 traverses the outer boundary
counterclockwise, n = -1 traverses a cavity boundary clockwise, so the
solution domain always lies to the left of the traversal direction.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import AmbiguousPointError

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
_POLYLINE_SAMPLES = 64  # chordal error ~ (len/64)^2 * curvature, branch-safe margin
_ARCLEN_TABLE = 4096


@dataclass(frozen=True)
class BoundaryCurve:
    """One closed boundary component in trigonometric form."""

    c0: float
    cos_coeffs: dict = field(default_factory=dict)
    sin_coeffs: dict = field(default_factory=dict)
    scale: float = 1.0
    orientation: int = 1
    offset: complex = 0.0 + 0.0j

    def __post_init__(self):
        if self.orientation not in (-1, 1):
            raise ValueError("orientation must be +1 (outer) or -1 (cavity)")
        t = np.linspace(0.0, 2 * np.pi, _ARCLEN_TABLE, endpoint=False)
        _, d1, _ = self.evaluate(t)
        speed = np.abs(d1)
        if speed.min() <= 1e-12 * max(speed.max(), 1.0):
            raise ValueError("parametrization is singular: |tau'| vanishes")
        p0, _, _ = self.evaluate(0.0)
        p1, _, _ = self.evaluate(2 * np.pi)
        if abs(p0 - p1) > 1e-12 * max(1.0, abs(p0)):
            raise ValueError("curve is not closed")

    def evaluate(self, t):
        """Position and first two parameter derivatives at t (scalar or array)."""
        t = np.asarray(t, dtype=np.float64)
        g = np.full_like(t, self.c0)
        g1 = np.zeros_like(t)
        g2 = np.zeros_like(t)
        for j, c in self.cos_coeffs.items():
            jt = j * t
            g += c * np.cos(jt)
            g1 += -c * j * np.sin(jt)
            g2 += -c * j * j * np.cos(jt)
        for j, d in self.sin_coeffs.items():
            jt = j * t
            g += d * np.sin(jt)
            g1 += d * j * np.cos(jt)
            g2 += -d * j * j * np.sin(jt)
        n = self.orientation
        rot = self.scale * np.exp(1j * n * t)
        pos = rot * g + self.offset
        d1 = rot * (1j * n * g + g1)
        d2 = rot * (-(n * n) * g + 2j * n * g1 + g2)
        return pos, d1, d2


def eval_curve(curve, t):
    """Point and derivatives of a boundary curve at parameter t."""
    return curve.evaluate(t)


def _dense_samples(curve, n=_ARCLEN_TABLE):
    t = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
    pos, d1, _ = curve.evaluate(t)
    return t, pos, d1


def _polygon_winding(curve, points):
    """Winding number of a densely sampled closed curve around each point."""
    _, pos, _ = _dense_samples(curve, 2048)
    poly = np.concatenate([pos, pos[:1]])
    ang = _kernels.winding_angle(poly, np.asarray(points, dtype=np.complex128))
    return np.rint(ang / (2 * np.pi)).astype(int)


def _curve_centroid(curve):
    _, pos, d1 = _dense_samples(curve)
    w = np.abs(d1)
    return complex((pos * w).sum() / w.sum())


@dataclass(frozen=True)
class Domain:
    """Multiply connected domain: outer boundary plus kappa disjoint cavities."""

    outer: BoundaryCurve
    cavities: tuple = ()
    cavity_sources: tuple = ()

    def __post_init__(self):
        if self.outer.orientation != 1:
            raise ValueError("outer curve must have orientation +1")
        for cav in self.cavities:
            if cav.orientation != -1:
                raise ValueError("cavity curves must have orientation -1")
        if not self.cavity_sources:
            object.__setattr__(
                self, "cavity_sources", tuple(_curve_centroid(c) for c in self.cavities)
            )
        if len(self.cavity_sources) != len(self.cavities):
            raise ValueError("need exactly one source point per cavity")
        for k, (cav, z) in enumerate(zip(self.cavities, self.cavity_sources)):
            if _polygon_winding(cav, [z])[0] == 0:
                raise ValueError(f"source point {z} is not inside cavity {k}")
            if _polygon_winding(self.outer, [z])[0] != 1:
                raise ValueError(f"source point {z} is not enclosed by the outer curve")
        curves = (self.outer,) + tuple(self.cavities)
        for a in range(len(curves)):
            for b in range(a + 1, len(curves)):
                _, pa, _ = _dense_samples(curves[a], 2048)
                _, pb, _ = _dense_samples(curves[b], 2048)
                dmin = min(
                    np.abs(pa[i0:i0 + 256, None] - pb[None, :]).min()
                    for i0 in range(0, 2048, 256)
                )
                if dmin <= 1e-12:
                    raise ValueError(f"boundary components {a} and {b} touch")

    @property
    def curves(self):
        return (self.outer,) + tuple(self.cavities)


class PanelSet:
    """Composite 16-point Gauss-Legendre panel discretization of one curve."""

    def __init__(self, curve, n_panels):
        if n_panels < 1:
            raise ValueError("need at least one panel")
        self.curve = curve
        self.n_panels = int(n_panels)
        edges = np.linspace(0.0, 2 * np.pi, self.n_panels + 1)
        half = 0.5 * (edges[1] - edges[0])
        mids = 0.5 * (edges[:-1] + edges[1:])
        t = (mids[:, None] + half * _GL_NODES[None, :]).ravel()
        w = np.tile(half * _GL_WEIGHTS, self.n_panels)
        pos, d1, d2 = curve.evaluate(t)
        self.param_edges = edges
        self.t = t
        self.weights = w
        self.nodes = pos
        self.d1 = d1
        self.d2 = d2
        self.weighted_tangents = w * d1
        self.arc_lengths = (w * np.abs(d1)).reshape(self.n_panels, 16).sum(axis=1)
        ends, _, _ = curve.evaluate(edges)
        self.panel_start = ends[:-1]
        self.panel_end = ends[1:]
        mid_pos, _, _ = curve.evaluate(mids)
        self.midpoints = mid_pos
        # dense per-panel polylines back the branch-safe continuous angle sums
        frac = np.linspace(0.0, 1.0, _POLYLINE_SAMPLES + 1)
        tt = edges[:-1, None] + (edges[1] - edges[0]) * frac[None, :]
        ppos, _, _ = curve.evaluate(tt.ravel())
        self.polylines = ppos.reshape(self.n_panels, _POLYLINE_SAMPLES + 1)

    @property
    def total_arc_length(self):
        return float(self.arc_lengths.sum())

    def panel_nodes(self, i):
        return self.nodes[16 * i:16 * (i + 1)]

    def panel_slice(self, i):
        return slice(16 * i, 16 * (i + 1))


def build_panels(curve, n_panels):
    """Split the parameter interval into equal panels with mapped GL-16 rules."""
    return PanelSet(curve, n_panels)


@dataclass
class MembershipMask:
    """Inside/outside labels plus the raw layer-potential indicator values."""

    inside: np.ndarray
    indicator: np.ndarray


def _near_panel_targets(panel_set, points, factor=1.0):
    """Indices of points within `factor` panel arc lengths of each panel midpoint."""
    hits = []
    block = max(1, (1 << 20) // max(1, panel_set.n_panels))
    idx_all = [[] for _ in range(panel_set.n_panels)]
    for i0 in range(0, points.shape[0], block):
        d = np.abs(points[i0:i0 + block, None] - panel_set.midpoints[None, :])
        near = d < factor * panel_set.arc_lengths[None, :]
        ii, pp = np.nonzero(near)
        for i, p in zip(ii, pp):
            idx_all[p].append(i0 + i)
    for p in range(panel_set.n_panels):
        hits.append(np.asarray(idx_all[p], dtype=np.intp))
    return hits


def classify_points(domain, panel_sets, points, on_boundary="raise"):
    """Classify points as inside/outside the domain via the unit-density layer identity.

    Points within one panel arc length of a panel midpoint are reclassified with
    the branch-safe continuous-angle evaluation of the same integral. Points
    numerically on the boundary raise AmbiguousPointError, or are labelled
    outside when on_boundary="outside".
    """
    points = np.asarray(points, dtype=np.complex128).ravel()
    ind = np.zeros(points.shape[0])
    on_edge = np.zeros(points.shape[0], dtype=bool)
    for ps in panel_sets:
        ones = np.ones(ps.nodes.shape[0])
        ind += _kernels.dlp_sum(ps.nodes, ps.weighted_tangents, ones, points)
    ind /= 2 * np.pi
    for ps in panel_sets:
        near = _near_panel_targets(ps, points)
        for p, idx in enumerate(near):
            if idx.size == 0:
                continue
            sl = ps.panel_slice(p)
            plain = _kernels.dlp_sum(
                ps.nodes[sl], ps.weighted_tangents[sl], np.ones(16), points[idx]
            )
            exact = _kernels.winding_angle(ps.polylines[p], points[idx])
            ind[idx] += (exact - plain) / (2 * np.pi)
            dmin = np.abs(points[idx][:, None] - ps.polylines[p][None, :]).min(axis=1)
            on_edge[idx] |= dmin < 1e-12 * ps.arc_lengths[p]
    bad = ~np.isfinite(ind) | (np.abs(ind - 0.5) <= 1e-6) | on_edge
    if bad.any():
        if on_boundary == "outside":
            ind = np.where(bad, 0.5, ind)
        else:
            z = points[int(np.argmax(bad))]
            raise AmbiguousPointError(f"point {z} is numerically on the boundary")
    return MembershipMask(inside=ind > 0.5, indicator=ind)


def _cumulative_arclength(curve, n=_ARCLEN_TABLE):
    """Cumulative arc length at n+1 equispaced parameters, via per-interval GL-16."""
    edges = np.linspace(0.0, 2 * np.pi, n + 1)
    half = 0.5 * (edges[1] - edges[0])
    mids = 0.5 * (edges[:-1] + edges[1:])
    t = (mids[:, None] + half * _GL_NODES[None, :]).ravel()
    _, d1, _ = curve.evaluate(t)
    seg = (half * _GL_WEIGHTS[None, :] * np.abs(d1).reshape(n, 16)).sum(axis=1)
    return edges, np.concatenate([[0.0], np.cumsum(seg)])


def total_arc_length(curve):
    """Arc length of the full closed curve."""
    return float(_cumulative_arclength(curve)[1][-1])


def arc_length_params(curve, n_points):
    """Parameters of n arc-length-equispaced points starting at t = 0."""
    if n_points < 1:
        raise ValueError("need at least one point")
    edges, cum = _cumulative_arclength(curve)
    total = cum[-1]
    targets = total * np.arange(n_points) / n_points
    # bisection on the table bracket, then one Newton step, clipped to the bracket
    lo = edges[np.clip(np.searchsorted(cum, targets, side="right") - 1, 0, len(edges) - 2)]
    hi = lo + (edges[1] - edges[0])
    for _ in range(30):
        mid = 0.5 * (lo + hi)
        s_mid = _partial_arclength(curve, edges, cum, mid)
        too_far = s_mid > targets
        hi = np.where(too_far, mid, hi)
        lo = np.where(too_far, lo, mid)
    t = 0.5 * (lo + hi)
    _, d1, _ = curve.evaluate(t)
    t = t - (_partial_arclength(curve, edges, cum, t) - targets) / np.abs(d1)
    return np.clip(t, 0.0, 2 * np.pi * (1 - 1e-16))


def _partial_arclength(curve, edges, cum, t):
    """Arc length from 0 to t using the table plus GL-16 on the partial interval."""
    t = np.asarray(t)
    k = np.clip(np.searchsorted(edges, t) - 1, 0, len(edges) - 2)
    t0 = edges[k]
    half = 0.5 * (t - t0)
    mid = t0 + half
    tt = mid[..., None] + half[..., None] * _GL_NODES
    _, d1, _ = curve.evaluate(tt.ravel())
    seg = (half[..., None] * _GL_WEIGHTS * np.abs(d1).reshape(tt.shape)).sum(axis=-1)
    return cum[k] + seg


def arc_length_centers(curve, n_centers):
    """n points on the curve with uniform arc-length spacing."""
    t = arc_length_params(curve, n_centers)
    pos, _, _ = curve.evaluate(t)
    return pos


def outward_normal(curve, t):
    """Unit normal pointing away from the solution domain."""
    _, d1, _ = curve.evaluate(t)
    return -1j * d1 / np.abs(d1)
