"""Solver configuration, config-file schema and the builtin benchmark problems."""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, UnknownIdError
from .geometry import BoundaryCurve, Domain

SCHEMA_VERSION = 1


@dataclass
class RhsSpec:
    """Right-hand-side / boundary-data selector.

    kind "builtin": paper-style forcing with homogeneous Dirichlet data and no
    closed-form reference. kind "manufactured": an analytic solution fixes
    both the forcing and the boundary data, enabling exact error reports.
    """

    kind: str = "manufactured"
    ident: str = "sinsin"

    def validate(self):
        if self.kind not in ("builtin", "manufactured"):
            raise ConfigError(f"unknown rhs kind {self.kind!r}")
        if self.kind == "builtin" and self.ident not in ("1", "2", "3"):
            raise ConfigError("builtin rhs id must be 1, 2 or 3")
        if self.kind == "manufactured" and self.ident not in ("sinsin", "sinsin-log", "harmonic"):
            raise ConfigError(f"unknown manufactured solution {self.ident!r}")


@dataclass
class SolveConfig:
    """Everything needed for one end-to-end solve."""

    curves: list
    box_half: float
    n_grid: int
    radius: float
    panels_per_curve: list
    cavity_sources: list = field(default_factory=list)
    epsilon: float = 2.0
    overlap_factor: float = 0.95
    m_centers: object = "auto"
    k_tilde: object = "auto"
    partitions_per_curve: object = "auto"
    beta_target: float = 3.0
    oversampling: int = 4
    gmres_tol: float = 1e-13
    gmres_maxiter: int = 200
    stabilizer: str = "auto"
    n_eval: int = 1000
    rhs: RhsSpec = field(default_factory=RhsSpec)

    def domain(self):
        outer = self.curves[0]
        cavities = tuple(self.curves[1:])
        return Domain(outer=outer, cavities=cavities, cavity_sources=tuple(self.cavity_sources))

    @property
    def points_per_radius(self):
        return self.radius * self.n_grid / (2.0 * self.box_half)

    def resolved_k_tilde(self):
        from .partition import heuristic_k_tilde

        return heuristic_k_tilde(self.points_per_radius) if self.k_tilde == "auto" else int(self.k_tilde)

    def resolved_m_centers(self):
        from .partition import heuristic_m_centers

        return (
            heuristic_m_centers(self.points_per_radius)
            if self.m_centers == "auto"
            else int(self.m_centers)
        )

    def resolved_partitions(self):
        if self.partitions_per_curve != "auto":
            counts = [int(c) for c in self.partitions_per_curve]
            if len(counts) != len(self.curves):
                raise ConfigError("need one partition count per boundary component")
            return counts
        from .geometry import total_arc_length

        return [
            max(3, math.ceil(total_arc_length(c) / (self.overlap_factor * self.radius)))
            for c in self.curves
        ]

    def validate(self):
        if self.box_half <= 0 or self.n_grid < 8:
            raise ConfigError("invalid box or grid size")
        if not self.curves:
            raise ConfigError("at least the outer boundary curve is required")
        if len(self.panels_per_curve) != len(self.curves):
            raise ConfigError("need one panel count per boundary component")
        if self.points_per_radius < 2.0:
            raise ConfigError(
                f"grid too coarse: {self.points_per_radius:.3g} points per partition radius"
            )
        if self.overlap_factor <= 0 or self.overlap_factor >= 1.0:
            raise ConfigError("overlap factor must lie in (0, 1)")
        if self.beta_target < 0:
            raise ConfigError("beta target must be nonnegative")
        if self.stabilizer not in ("auto", "svd", "dd"):
            raise ConfigError(f"unknown stabilizer {self.stabilizer!r}")
        self.rhs.validate()
        # every extension partition must stay inside the box
        t = np.linspace(0.0, 2 * np.pi, 1024, endpoint=False)
        for curve in self.curves:
            pos, _, _ = curve.evaluate(t)
            reach = max(np.abs(pos.real).max(), np.abs(pos.imag).max()) + self.radius
            if reach > self.box_half:
                raise ConfigError(
                    f"partitions of radius {self.radius} around the boundary leave the box "
                    f"(reach {reach:.4g} > {self.box_half})"
                )
        return self


def _curve_to_dict(curve):
    return {
        "c0": curve.c0,
        "cos": {str(k): v for k, v in curve.cos_coeffs.items()},
        "sin": {str(k): v for k, v in curve.sin_coeffs.items()},
        "R": curve.scale,
        "n": curve.orientation,
        "offset": [curve.offset.real, curve.offset.imag],
    }


def _curve_from_dict(d):
    try:
        off = d.get("offset", [0.0, 0.0])
        return BoundaryCurve(
            c0=float(d["c0"]),
            cos_coeffs={int(k): float(v) for k, v in d.get("cos", {}).items()},
            sin_coeffs={int(k): float(v) for k, v in d.get("sin", {}).items()},
            scale=float(d.get("R", 1.0)),
            orientation=int(d.get("n", 1)),
            offset=complex(float(off[0]), float(off[1])),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid curve specification: {exc}") from exc


def config_to_dict(cfg):
    return {
        "schemaVersion": SCHEMA_VERSION,
        "domain": {
            "curves": [_curve_to_dict(c) for c in cfg.curves],
            "cavitySources": [[z.real, z.imag] for z in cfg.cavity_sources],
        },
        "L": cfg.box_half,
        "Nu": cfg.n_grid,
        "Rp": cfg.radius,
        "epsilon": cfg.epsilon,
        "overlapFactor": cfg.overlap_factor,
        "M": cfg.m_centers,
        "kTilde": cfg.k_tilde,
        "panelsPerCurve": list(cfg.panels_per_curve),
        "partitionsPerCurve": cfg.partitions_per_curve
        if cfg.partitions_per_curve == "auto"
        else list(cfg.partitions_per_curve),
        "betaTarget": cfg.beta_target,
        "oversampling": cfg.oversampling,
        "gmres": {"tol": cfg.gmres_tol, "maxIter": cfg.gmres_maxiter},
        "stabilizer": cfg.stabilizer,
        "nEval": cfg.n_eval,
        "rhs": {"kind": cfg.rhs.kind, "id": cfg.rhs.ident},
    }


def config_from_dict(d):
    if not isinstance(d, dict):
        raise ConfigError("configuration must be a JSON object")
    version = d.get("schemaVersion")
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schemaVersion {version!r} (expected {SCHEMA_VERSION})")
    try:
        dom = d["domain"]
        curves = [_curve_from_dict(c) for c in dom["curves"]]
        sources = [complex(p[0], p[1]) for p in dom.get("cavitySources", [])]
        rhs_d = d.get("rhs", {})
        rhs = RhsSpec(kind=rhs_d.get("kind", "manufactured"), ident=str(rhs_d.get("id", "sinsin")))
        gmres = d.get("gmres", {})
        cfg = SolveConfig(
            curves=curves,
            cavity_sources=sources,
            box_half=float(d["L"]),
            n_grid=int(d["Nu"]),
            radius=float(d["Rp"]),
            epsilon=float(d.get("epsilon", 2.0)),
            overlap_factor=float(d.get("overlapFactor", 0.95)),
            m_centers=d.get("M", "auto"),
            k_tilde=d.get("kTilde", "auto"),
            panels_per_curve=[int(p) for p in d["panelsPerCurve"]],
            partitions_per_curve=d.get("partitionsPerCurve", "auto"),
            beta_target=float(d.get("betaTarget", 3.0)),
            oversampling=int(d.get("oversampling", 4)),
            gmres_tol=float(gmres.get("tol", 1e-13)),
            gmres_maxiter=int(gmres.get("maxIter", 200)),
            stabilizer=str(d.get("stabilizer", "auto")),
            n_eval=int(d.get("nEval", 1000)),
            rhs=rhs,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc
    return cfg.validate()


def load_config(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
    return config_from_dict(data)


def save_config(cfg, path):
    with open(path, "w") as fh:
        json.dump(config_to_dict(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# builtin benchmark problems

_EX1_CENTER = complex(17.0 / 701.0, 5.0 / 439.0)


def builtin_config(example_id):
    """Benchmark configuration 1 (disc), 2 (multiply connected) or 3 (large cavity).

    The shape parameter keeps epsilon * radius = 0.8 across examples so every
    partition sees the same basis flatness as the radius shrinks.
    """
    example_id = int(example_id)
    if example_id == 1:
        curves = [BoundaryCurve(c0=1.0, offset=_EX1_CENTER)]
        cfg = SolveConfig(
            curves=curves,
            box_half=1.5,
            n_grid=400,
            radius=0.4,
            epsilon=2.0,
            panels_per_curve=[32],
            partitions_per_curve=[21],
            rhs=RhsSpec(kind="builtin", ident="1"),
        )
    elif example_id == 2:
        outer = BoundaryCurve(
            c0=0.25,
            cos_coeffs={6: 0.01, 8: 0.01, 10: 0.01, 5: 0.02},
            sin_coeffs={3: 0.01},
        )
        inner = BoundaryCurve(
            c0=0.05,
            cos_coeffs={2: 0.005, 5: 0.005, 7: 0.005},
            sin_coeffs={3: 0.005},
            orientation=-1,
        )
        cfg = SolveConfig(
            curves=[outer, inner],
            box_half=0.4,
            n_grid=700,
            radius=0.0675,
            epsilon=0.8 / 0.0675,
            panels_per_curve=[64, 44],
            partitions_per_curve=[38, 9],
            rhs=RhsSpec(kind="builtin", ident="2"),
        )
    elif example_id == 3:
        outer = BoundaryCurve(c0=1.0, cos_coeffs={-5: 0.2}, sin_coeffs={-1: 0.2})
        inner = BoundaryCurve(
            c0=1.0,
            cos_coeffs={-6: 0.1},
            sin_coeffs={-3: 0.1},
            scale=0.3,
            orientation=-1,
            offset=0.17j,
        )
        cfg = SolveConfig(
            curves=[outer, inner],
            box_half=1.54,
            n_grid=1000,
            radius=0.12,
            epsilon=0.8 / 0.12,
            panels_per_curve=[84, 40],
            partitions_per_curve=[82, 23],
            rhs=RhsSpec(kind="builtin", ident="3"),
        )
    else:
        raise UnknownIdError(f"no builtin example {example_id}")
    return cfg.validate()


# ---------------------------------------------------------------------------
# manufactured solutions


@dataclass(frozen=True)
class ManufacturedSolution:
    ident: str
    solution: object  # u*(x, y)
    forcing: object  # f = Laplacian(u*)


def _sinsin_u(x, y):
    return np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y) / (8 * np.pi**2)


def _sinsin_f(x, y):
    return -np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y)


def _harmonic_u(x, y):
    z = np.asarray(x) + 1j * np.asarray(y)
    return (z**3 - 0.5 * z).real


def manufactured_solution(ident, domain=None):
    """Analytic reference u* with forcing Laplacian(u*); boundary data is u*."""
    if ident == "sinsin":
        return ManufacturedSolution("sinsin", _sinsin_u, _sinsin_f)
    if ident == "harmonic":
        return ManufacturedSolution(
            "harmonic", _harmonic_u, lambda x, y: np.zeros(np.broadcast(x, y).shape)
        )
    if ident == "sinsin-log":
        if domain is None or not domain.cavities:
            raise ConfigError("manufactured solution 'sinsin-log' needs a cavity")
        zc = domain.cavity_sources[0]

        def u(x, y):
            return _sinsin_u(x, y) + np.log(np.hypot(x - zc.real, y - zc.imag))

        return ManufacturedSolution("sinsin-log", u, _sinsin_f)
    raise UnknownIdError(f"no manufactured solution {ident!r}")
