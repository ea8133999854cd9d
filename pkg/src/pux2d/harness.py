"""End-to-end orchestration: classification, covering, extension, free-space
solve, boundary correction, and error reporting over an evaluation grid.
"""

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import fpoisson, geometry, lbie, partition, rbf
from .config import manufactured_solution
from .errors import EmptyMaskError, StageError, UnknownIdError


def builtin_rhs(example_id, x, y):
    """Forcing of the builtin benchmark problems."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    example_id = int(example_id)
    if example_id == 1:
        return -np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y)
    if example_id == 2:
        return (
            -200.0 * np.sin(10.0 * (x + y))
            + 2.0 / 9.0
            + 1000.0 * (1000.0 * x**2 - 1.0) * np.exp(-500.0 * x**2)
        )
    if example_id == 3:
        acc = np.zeros(np.broadcast(x, y).shape)
        for i in range(6):
            s = 2.0**i
            acc += s * s * math.exp(-math.sqrt(s)) * (np.cos(s * x) + np.cos(s * y))
        return -acc
    raise UnknownIdError(f"no builtin forcing {example_id}")


def error_metrics(numerical, exact, mask):
    """Relative discrete l2 error and max relative error over masked points."""
    numerical = np.asarray(numerical, dtype=np.float64)
    exact = np.asarray(exact, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if numerical.shape != exact.shape or numerical.shape != mask.shape:
        raise ValueError("shapes of fields and mask must agree")
    if not mask.any():
        raise EmptyMaskError("no evaluation points selected")
    diff = numerical[mask] - exact[mask]
    ref = exact[mask]
    rel_l2 = float(np.linalg.norm(diff) / np.linalg.norm(ref))
    max_rel = float(np.abs(diff).max() / np.abs(ref).max())
    return rel_l2, max_rel


@dataclass
class ErrorReport:
    rel_l2: float
    max_rel: float
    n_grid: int
    k_tilde: int
    m_centers: int
    points_per_radius: float
    beta_min: float
    timings: dict = field(default_factory=dict)
    self_reference: bool = False


@dataclass
class SolveResult:
    config: object
    u_eval: np.ndarray  # (n_eval, n_eval), zero outside the domain
    eval_inside: np.ndarray  # (n_eval, n_eval) bool
    report: object  # ErrorReport or None
    timings: dict
    diagnostics: dict
    extension: object = None
    particular: object = None
    density: object = None


class _StageTimer:
    def __init__(self):
        self.timings = {}
        self._name = None
        self._t0 = None

    def __call__(self, name):
        self._name = name
        return self

    def __enter__(self):
        self._t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.timings[self._name] = self.timings.get(self._name, 0.0) + time.perf_counter() - self._t0
        if exc is not None and not isinstance(exc, StageError):
            raise StageError(self._name, exc) from exc
        return False


def classify_eval_grid(config, panel_sets=None):
    """Inside mask of the n_eval x n_eval evaluation grid (cacheable across runs)."""
    domain = config.domain()
    if panel_sets is None:
        panel_sets = [
            geometry.build_panels(c, p) for c, p in zip(domain.curves, config.panels_per_curve)
        ]
    egrid = partition.UniformGrid(box_half=config.box_half, n=config.n_eval)
    mask = geometry.classify_points(domain, panel_sets, egrid.nodes().ravel(), on_boundary="outside")
    return mask.inside.reshape(config.n_eval, config.n_eval)


def solve_poisson(config, eval_inside=None, keep_fields=False):
    """Run the full split solve; returns the solution on the pruned evaluation grid.

    `eval_inside` optionally reuses a precomputed evaluation-grid mask (the
    classification only depends on the boundary discretization, not on the
    solver grid).
    """
    config.validate()
    timer = _StageTimer()
    domain = config.domain()
    rhs = config.rhs
    if rhs.kind == "manufactured":
        manufactured = manufactured_solution(rhs.ident, domain)
        forcing = manufactured.forcing
        boundary_fn = manufactured.solution
    else:
        example = int(rhs.ident)
        manufactured = None
        forcing = lambda x, y: builtin_rhs(example, x, y)  # noqa: E731
        boundary_fn = lambda x, y: np.zeros(np.broadcast(x, y).shape)  # noqa: E731

    with timer("panels"):
        panel_sets = [
            geometry.build_panels(c, p) for c, p in zip(domain.curves, config.panels_per_curve)
        ]

    with timer("classify-grid"):
        grid = partition.UniformGrid(box_half=config.box_half, n=config.n_grid)
        mask = geometry.classify_points(domain, panel_sets, grid.nodes().ravel(), on_boundary="outside")
        inside_grid = mask.inside.reshape(config.n_grid, config.n_grid)

    with timer("covering"):
        m_centers = config.resolved_m_centers()
        k_tilde = config.resolved_k_tilde()
        covering = partition.build_covering(
            domain,
            grid,
            config.radius,
            config.resolved_partitions(),
            inside_grid,
            m_centers=m_centers,
        )

    with timer("stencil"):
        basis = rbf.GaussianBasis(config.epsilon)
        wu = rbf.wu_function(k_tilde)
        template = rbf.build_stencil(
            grid.spacing, config.radius, m_centers, basis, wu, stabilizer=config.stabilizer
        )

    with timer("extension"):
        fe = partition.build_extension(
            forcing, domain, grid, covering, template, beta_target=config.beta_target
        )

    with timer("fft-solve"):
        kernel = fpoisson.build_kernel(grid, oversampling=config.oversampling)
        particular = fpoisson.solve_free_space(fe, kernel)

    with timer("boundary-eval"):
        bie = lbie.BieSystem(
            domain, panel_sets, gmres_tol=config.gmres_tol, gmres_maxiter=config.gmres_maxiter
        )
        up_boundary = fpoisson.eval_at_points(particular, bie.nodes, tol=1e-14)
        g_boundary = boundary_fn(bie.nodes.real, bie.nodes.imag)
        modified_data = g_boundary - up_boundary

    with timer("density-solve"):
        density = lbie.solve_density(bie, modified_data)

    with timer("field-eval"):
        if eval_inside is None:
            eval_inside = classify_eval_grid(config, panel_sets)
        egrid = partition.UniformGrid(box_half=config.box_half, n=config.n_eval)
        up_eval = fpoisson.eval_on_subgrid(particular, config.n_eval)
        u = np.zeros((config.n_eval, config.n_eval))
        ax = egrid.axis()
        ii, jj = np.nonzero(eval_inside)
        pts = ax[ii] + 1j * ax[jj]
        u[ii, jj] = lbie.eval_field(density, bie, pts) + up_eval[ii, jj]

    report = None
    if manufactured is not None:
        exact = np.zeros_like(u)
        exact[ii, jj] = manufactured.solution(ax[ii], ax[jj])
        rel_l2, max_rel = error_metrics(u, exact, eval_inside)
        report = ErrorReport(
            rel_l2=rel_l2,
            max_rel=max_rel,
            n_grid=config.n_grid,
            k_tilde=k_tilde,
            m_centers=m_centers,
            points_per_radius=config.points_per_radius,
            beta_min=covering.beta_min,
            timings=dict(timer.timings),
        )

    diagnostics = {
        "k_tilde": k_tilde,
        "m_centers": m_centers,
        "points_per_radius": config.points_per_radius,
        "beta_min": covering.beta_min,
        "n_extension": covering.n_extension,
        "n_zero": covering.n_zero,
        "gmres_iterations": getattr(density, "gmres_iterations", None),
        "max_fit_residual": float(fe.residuals.max()) if fe.residuals.size else 0.0,
        "max_local_extension": float(fe.local_maxima.max()) if fe.local_maxima.size else 0.0,
        "log_strengths": density.log_strengths.tolist(),
        "stencil_method": template.method,
        "boundary_data_scale": float(np.abs(modified_data).max()),
    }
    return SolveResult(
        config=config,
        u_eval=u,
        eval_inside=eval_inside,
        report=report,
        timings=dict(timer.timings),
        diagnostics=diagnostics,
        extension=fe if keep_fields else None,
        particular=particular if keep_fields else None,
        density=density if keep_fields else None,
    )


@dataclass
class StudyRow:
    n_grid: int
    points_per_radius: float
    k_tilde: int
    m_centers: int
    beta_min: float
    rel_l2: float
    max_rel: float
    local_order: float


@dataclass
class StudyResult:
    rows: list
    fitted_order: float
    self_reference: bool

    def to_csv(self):
        lines = ["Nu,P,kTilde,M,betaMin,relL2,maxRel,localOrder"]
        for r in self.rows:
            lines.append(
                f"{r.n_grid},{r.points_per_radius!r},{r.k_tilde},{r.m_centers},"
                f"{r.beta_min!r},{r.rel_l2!r},{r.max_rel!r},{r.local_order!r}"
            )
        return "\n".join(lines) + "\n"


def convergence_study(config, n_grid_list):
    """Solve at a list of grid resolutions and report errors and fitted orders.

    Manufactured problems use their analytic reference; builtin problems are
    measured against the finest resolution in the list (self reference).
    """
    n_grid_list = sorted(int(n) for n in n_grid_list)
    eval_inside = classify_eval_grid(config)
    results = []
    for n_u in n_grid_list:
        cfg = replace(config, n_grid=n_u)
        results.append(solve_poisson(cfg, eval_inside=eval_inside))
    mask = eval_inside
    for res in results:
        mask = mask & res.eval_inside
    self_reference = config.rhs.kind != "manufactured"
    rows = []
    errs = []
    for i, res in enumerate(results):
        if self_reference:
            if i == len(results) - 1:
                rel_l2 = max_rel = float("nan")
            else:
                rel_l2, max_rel = error_metrics(res.u_eval, results[-1].u_eval, mask)
        else:
            exact = np.zeros_like(res.u_eval)
            egrid = partition.UniformGrid(box_half=config.box_half, n=config.n_eval)
            ax = egrid.axis()
            ii, jj = np.nonzero(mask)
            exact[ii, jj] = manufactured_solution(config.rhs.ident, config.domain()).solution(
                ax[ii], ax[jj]
            )
            rel_l2, max_rel = error_metrics(res.u_eval, exact, mask)
        errs.append(rel_l2)
        rows.append(
            StudyRow(
                n_grid=res.config.n_grid,
                points_per_radius=res.config.points_per_radius,
                k_tilde=res.diagnostics["k_tilde"],
                m_centers=res.diagnostics["m_centers"],
                beta_min=res.diagnostics["beta_min"],
                rel_l2=rel_l2,
                max_rel=max_rel,
                local_order=float("nan"),
            )
        )
    for i in range(1, len(rows)):
        if math.isfinite(errs[i]) and math.isfinite(errs[i - 1]) and errs[i] > 0 and errs[i - 1] > 0:
            rows[i].local_order = math.log(errs[i] / errs[i - 1]) / math.log(
                rows[i].n_grid / rows[i - 1].n_grid
            )
    fin = [
        (math.log(r.n_grid), math.log(e))
        for r, e in zip(rows, errs)
        if math.isfinite(e) and e > 0
    ]
    fitted = float("nan")
    if len(fin) >= 2:
        xs = np.array([p[0] for p in fin])
        ys = np.array([p[1] for p in fin])
        fitted = float(np.polyfit(xs, ys, 1)[0])
    return StudyResult(rows=rows, fitted_order=fitted, self_reference=self_reference)


def boundary_mode_magnitudes(curve, fn, n_samples=1024):
    """|FFT| of a boundary function sampled uniformly in the curve parameter."""
    t = np.linspace(0.0, 2 * np.pi, n_samples, endpoint=False)
    pos, _, _ = curve.evaluate(t)
    vals = fn(pos)
    return np.abs(np.fft.fft(vals)) / n_samples
