"""Command-line interface.

Subcommands `classify`, `extend`, `solve` and `convergence` all accept either
--config <json-file> or --example {1,2,3}, plus overrides. Exit codes: 0 on
success, 2 on configuration errors, 3 on numerical-stage failures.
"""

import argparse
import os
import sys
from dataclasses import replace

from . import geometry, gridio, harness, partition, rbf
from .config import RhsSpec, builtin_config, load_config, save_config
from .errors import ConfigError, Pux2dError


def _build_parser():
    parser = argparse.ArgumentParser(prog="pux2d", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("classify", "classify the uniform grid nodes against the domain boundary"),
        ("extend", "build the compactly supported extension of the forcing"),
        ("solve", "solve the Dirichlet Poisson problem end to end"),
        ("convergence", "run a grid-refinement study"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--example", type=int, choices=(1, 2, 3), help="builtin benchmark problem")
        p.add_argument("--nu", type=int, help="override the grid resolution")
        p.add_argument("--rp", type=float, help="override the partition radius")
        p.add_argument("--manufactured", help="use a manufactured reference (sinsin, sinsin-log)")
        p.add_argument("--out", default=".", help="output directory")
        if name == "convergence":
            p.add_argument("--nu-list", required=True, help="comma-separated grid resolutions")
        if name == "solve":
            p.add_argument(
                "--dump-fields",
                action="store_true",
                help="also write the extension and the particular solution grids",
            )
        p.add_argument("--dump-config", action="store_true", help="write the resolved config")
    return parser


def _resolve_config(args):
    if args.config and args.example:
        raise ConfigError("give either --config or --example, not both")
    if args.config:
        cfg = load_config(args.config)
    elif args.example:
        cfg = builtin_config(args.example)
    else:
        raise ConfigError("one of --config or --example is required")
    if args.nu:
        cfg = replace(cfg, n_grid=args.nu)
    if args.rp:
        cfg = replace(cfg, radius=args.rp)
    if getattr(args, "manufactured", None):
        cfg = replace(cfg, rhs=RhsSpec(kind="manufactured", ident=args.manufactured))
    return cfg.validate()


def _cmd_classify(cfg, out):
    domain = cfg.domain()
    panel_sets = [geometry.build_panels(c, p) for c, p in zip(domain.curves, cfg.panels_per_curve)]
    grid = partition.UniformGrid(box_half=cfg.box_half, n=cfg.n_grid)
    mask = geometry.classify_points(
        domain, panel_sets, grid.nodes().ravel(), on_boundary="outside"
    )
    path = os.path.join(out, "classification.csv")
    gridio.write_classification_csv(path, grid, mask)
    inside = int(mask.inside.sum())
    print(f"classified {grid.n * grid.n} nodes: {inside} inside -> {path}")
    return 0


def _cmd_extend(cfg, out):
    domain = cfg.domain()
    panel_sets = [geometry.build_panels(c, p) for c, p in zip(domain.curves, cfg.panels_per_curve)]
    grid = partition.UniformGrid(box_half=cfg.box_half, n=cfg.n_grid)
    mask = geometry.classify_points(
        domain, panel_sets, grid.nodes().ravel(), on_boundary="outside"
    )
    inside = mask.inside.reshape(grid.n, grid.n)
    m_centers = cfg.resolved_m_centers()
    covering = partition.build_covering(
        domain, grid, cfg.radius, cfg.resolved_partitions(), inside, m_centers=m_centers
    )
    template = rbf.build_stencil(
        grid.spacing,
        cfg.radius,
        m_centers,
        rbf.GaussianBasis(cfg.epsilon),
        rbf.wu_function(cfg.resolved_k_tilde()),
        stabilizer=cfg.stabilizer,
    )
    if cfg.rhs.kind == "manufactured":
        from .config import manufactured_solution

        forcing = manufactured_solution(cfg.rhs.ident, domain).forcing
    else:
        forcing = lambda x, y: harness.builtin_rhs(int(cfg.rhs.ident), x, y)  # noqa: E731
    fe = partition.build_extension(
        forcing, domain, grid, covering, template, beta_target=cfg.beta_target
    )
    csv_path = os.path.join(out, "extension.csv")
    bin_path = os.path.join(out, "extension.bin")
    gridio.write_field_csv(csv_path, fe)
    gridio.write_grid_binary(bin_path, fe.values, cfg.box_half)
    print(
        f"extension on {grid.n}x{grid.n} grid: {covering.n_extension} extension + "
        f"{covering.n_zero} zero partitions, beta_min {covering.beta_min:.3g} -> {csv_path}, {bin_path}"
    )
    return 0


def _cmd_solve(cfg, out, dump_fields=False):
    result = harness.solve_poisson(cfg, keep_fields=dump_fields)
    sol_path = os.path.join(out, "solution.csv")
    gridio.write_solution_csv(sol_path, result)
    print(f"solution at {int(result.eval_inside.sum())} evaluation points -> {sol_path}")
    if dump_fields:
        gridio.write_field_csv(os.path.join(out, "extension.csv"), result.extension)
        gridio.write_grid_binary(
            os.path.join(out, "extension.bin"), result.extension.values, cfg.box_half
        )
        gridio.write_grid_binary(
            os.path.join(out, "particular.bin"), result.particular.values, cfg.box_half
        )
        print(f"field grids -> {out}/extension.csv, extension.bin, particular.bin")
    if result.report is not None:
        met_path = os.path.join(out, "metrics.csv")
        gridio.write_metrics_csv(met_path, result.report)
        print(
            f"relative l2 error {result.report.rel_l2:.3e}, max relative "
            f"{result.report.max_rel:.3e} -> {met_path}"
        )
    for stage, seconds in result.timings.items():
        print(f"  {stage}: {seconds:.3f} s")
    return 0


def _cmd_convergence(cfg, out, nu_list):
    study = harness.convergence_study(cfg, nu_list)
    path = os.path.join(out, "study.csv")
    gridio.write_study_csv(path, study)
    label = "self-referenced" if study.self_reference else "manufactured"
    print(f"{label} study over Nu={nu_list}: fitted order {study.fitted_order:.2f} -> {path}")
    return 0


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        cfg = _resolve_config(args)
        os.makedirs(args.out, exist_ok=True)
        if args.dump_config:
            save_config(cfg, os.path.join(args.out, "config.json"))
        if args.command == "classify":
            return _cmd_classify(cfg, args.out)
        if args.command == "extend":
            return _cmd_extend(cfg, args.out)
        if args.command == "solve":
            return _cmd_solve(cfg, args.out, dump_fields=getattr(args, "dump_fields", False))
        if args.command == "convergence":
            nu_list = [int(v) for v in args.nu_list.split(",") if v.strip()]
            if not nu_list:
                raise ConfigError("empty --nu-list")
            return _cmd_convergence(cfg, args.out, nu_list)
        raise ConfigError(f"unknown command {args.command}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except Pux2dError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
