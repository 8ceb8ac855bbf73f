"""Command-line entry point: risk curves, bounds, the oracle suite and the u** / gain-loss tables."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Optional, Sequence

import pandas as pd

from src.bound import BoundResult, s_of_prior
from src.config import (
    DEFAULT_OPTIMIZER,
    DEFAULT_QUAD,
    TABLE1_ROWS,
    TABLE2_ROWS,
    OptimizerConfig,
    ProblemConfig,
    QuadSpec,
    load_problem_config,
    table1_counts,
)
from src.evaluation import default_cases, evaluate, load_cases, run_oracle_suite
from src.optimizer import escalate, optimize_prior, solve_u_star_star
from src.risk import WidthFunction, default_gamma_grid, risk_curve, sd_delta_width, summarize_curve
from .manifest import ResultCache, RunManifest, write_json
from .tables import (
    table1_reference,
    table1_row,
    table2_reference,
    table2_row,
    with_reference,
    write_csv,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _problem_config(args: argparse.Namespace) -> ProblemConfig:
    base = load_problem_config(args.config) if args.config else ProblemConfig()
    quad = QuadSpec(
        panels=args.panels if args.panels is not None else base.quad.panels,
        nodes_per_panel=args.nodes_per_panel if args.nodes_per_panel is not None else base.quad.nodes_per_panel,
    )
    return ProblemConfig(
        alpha=args.alpha if args.alpha is not None else base.alpha,
        alpha_tilde=args.alpha_tilde if args.alpha_tilde is not None else base.alpha_tilde,
        rho=args.rho if args.rho is not None else base.rho,
        c=base.c,
        quad=quad,
    )


def _optimizer_config(args: argparse.Namespace) -> OptimizerConfig:
    return replace(
        DEFAULT_OPTIMIZER,
        seed=args.seed,
        multistarts=args.starts,
        max_iterations=args.max_iterations,
        workers=args.workers,
        trace_path=args.trace,
    )


def _search_settings(opt: OptimizerConfig) -> dict[str, Any]:
    # workers and tracing do not change the result
    return {k: v for k, v in opt.to_dict().items() if k not in ("workers", "trace_path")}


def _bound_key(cfg: ProblemConfig, opt: OptimizerConfig, **run: Any) -> dict[str, Any]:
    return {"problem": cfg.to_dict(), "optimizer": _search_settings(opt), **run}


def _compute_bound(
    cfg: ProblemConfig,
    opt: OptimizerConfig,
    cache: Optional[ResultCache],
    u: Optional[float],
    m1: Optional[int],
    m2: Optional[int],
    u_star_star: bool,
) -> BoundResult:
    """Bound for one cell, served from the cache when the configuration hash matches."""
    cfg = cfg.with_rho(abs(cfg.rho))
    run_config = _bound_key(cfg, opt, u=u, m1=m1, m2=m2, uStarStar=u_star_star)
    manifest = RunManifest(command="bound", config=run_config, seed=opt.seed)
    key = manifest.config_hash
    if cache is not None:
        payload = cache.get(key)
        if payload is not None:
            return BoundResult.from_dict(payload)

    logger.info("[bound] alphaTilde=%g |rho|=%g u=%s m1=%s m2=%s u**=%s", cfg.alpha_tilde, cfg.rho, u, m1, m2, u_star_star)
    if u_star_star:
        result = solve_u_star_star(cfg, opt, m1=m1, m2=m2, u=u)
    elif m1 is not None:
        result = optimize_prior(u, m1, m2, cfg, opt)
    else:
        result = escalate(u, cfg, opt)

    if cache is not None:
        cache.put(key, result.to_dict(), manifest)
    return result


def _cache(args: argparse.Namespace) -> Optional[ResultCache]:
    if args.no_cache:
        return None
    return ResultCache(args.cache_dir)


def _load_width(args: argparse.Namespace, cfg: ProblemConfig) -> WidthFunction:
    if args.width == "sd-delta":
        return sd_delta_width(cfg)
    if args.width == "constant":
        value = cfg.z_alpha if args.width_value is None else args.width_value
        return WidthFunction.constant(value, cfg)
    if not args.width_file:
        raise ValueError("--width file needs --width-file PATH")
    return WidthFunction.load(args.width_file, cfg)


def cmd_risk_curve(args: argparse.Namespace) -> int:
    cfg = _problem_config(args)
    s = _load_width(args, cfg)
    curve = risk_curve(s, default_gamma_grid(args.gamma_max, args.gamma_step), cfg)
    out_dir = Path(args.out)
    manifest = RunManifest(
        command="risk-curve",
        config={
            "problem": cfg.to_dict(),
            "width": args.width,
            "widthValue": args.width_value,
            "widthFile": args.width_file,
            "gammaMax": args.gamma_max,
            "gammaStep": args.gamma_step,
        },
        outputs=["risk_curve.csv", "risk_curve.json"],
    )
    if args.width == "sd-delta":
        manifest.outputs.append("risk_curve_summary.json")

    write_csv(curve.to_frame(), out_dir / "risk_curve.csv", manifest)
    write_json({"curve": curve.to_dict()}, out_dir / "risk_curve.json", manifest)
    summary = summarize_curve(curve)
    if args.width == "sd-delta":
        write_json({"summary": summary}, out_dir / "risk_curve_summary.json", manifest)
    print(
        f"max SEL {summary['max_sel']:.6f} at gamma={summary['gamma_at_max_sel']:g}; "
        f"SEL(0) {summary['sel_at_zero']:.6f}; "
        f"min coverage {summary['min_coverage']:.6f} at gamma={summary['gamma_at_min_coverage']:g}"
    )
    return EXIT_OK


def cmd_bound(args: argparse.Namespace) -> int:
    cfg = _problem_config(args)
    opt = _optimizer_config(args)
    if (args.m1 is None) != (args.m2 is None):
        raise ValueError("give both --m1 and --m2 or neither")
    if not args.u_star_star and args.u is None:
        raise ValueError("--u is required unless --u-star-star is given")

    result = _compute_bound(cfg, opt, _cache(args), args.u, args.m1, args.m2, args.u_star_star)
    cfg_abs = cfg.with_rho(abs(cfg.rho))
    out_dir = Path(args.out)
    manifest = RunManifest(
        command="bound",
        config=_bound_key(cfg_abs, opt, u=args.u, m1=args.m1, m2=args.m2, uStarStar=args.u_star_star),
        seed=opt.seed,
        outputs=["bound.json", "bound.csv"],
    )
    row = table1_row(result, cfg_abs) if args.u_star_star else table2_row(result, cfg_abs)
    write_json({"result": result.to_dict()}, out_dir / "bound.json", manifest)
    write_csv(pd.DataFrame([row]), out_dir / "bound.csv", manifest)
    if args.export_width:
        write_json(s_of_prior(result.prior, cfg_abs).to_dict(), Path(args.export_width), manifest)

    if result.u_star_star is None:
        print(f"LB(u={result.u:g}) = {result.lb:.8f}; u** undefined (sum(nu2) = 0)")
    else:
        print(f"LB(u={result.u:g}) = {result.lb:.8f}; u** = {result.u_star_star:.8f}; m1={result.m1}, m2={result.m2}")
    print(f"gain upper bound {result.gain_upper_bound:.8f}, loss {result.loss:.4f}, ratio {result.ratio:.4f}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    cases = load_cases(args.cases) if args.cases else default_cases(args.seed)
    report = run_oracle_suite(cases, n=args.n, seed=args.seed, n_se=args.n_se, flip_b=args.mutate == "flip-b")
    manifest = RunManifest(
        command="verify",
        config={"n": args.n, "nSe": args.n_se, "cases": [c.to_dict() for c in cases], "mutate": args.mutate},
        seed=args.seed,
        outputs=["verify.csv"],
    )
    write_csv(report, Path(args.out) / "verify.csv", manifest)
    metrics = evaluate(report)
    print(f"{int(metrics['checks'])} checks, {int(metrics['failures'])} failures, max |z| = {metrics['max_abs_z']:.3f}")
    if metrics["failures"]:
        for _, row in report[~report["passed"]].iterrows():
            print(f"  FAIL {row['label']} {row['quantity']}: analytic {row['analytic']:.8f} mc {row['mc']:.8f} (se {row['se']:.2e})")
        return EXIT_FAILURE
    return EXIT_OK


def _selected(rows: Sequence[tuple], args: argparse.Namespace) -> list[tuple]:
    picked = [
        row
        for row in rows
        if (not args.alpha_tilde_values or row[0] in args.alpha_tilde_values)
        and (not args.rho_values or row[1] in args.rho_values)
    ]
    if not picked:
        raise ValueError("no table cells match the --alpha-tilde-values/--rho-values filter")
    return picked


def _table_config(args: argparse.Namespace, alpha_tilde: float, abs_rho: float) -> ProblemConfig:
    quad = QuadSpec(
        panels=args.panels if args.panels is not None else DEFAULT_QUAD.panels,
        nodes_per_panel=args.nodes_per_panel if args.nodes_per_panel is not None else DEFAULT_QUAD.nodes_per_panel,
    )
    return ProblemConfig(alpha=args.alpha if args.alpha is not None else 0.05, alpha_tilde=alpha_tilde, rho=abs_rho, quad=quad)


def cmd_table1(args: argparse.Namespace) -> int:
    opt = _optimizer_config(args)
    cache = _cache(args)
    rows, configs = [], []
    for alpha_tilde, abs_rho, m1, m2, _ in _selected(TABLE1_ROWS, args):
        cfg = _table_config(args, alpha_tilde, abs_rho)
        result = _compute_bound(cfg, opt, cache, None, m1, m2, True)
        rows.append(table1_row(result, cfg))
        configs.append(cfg.to_dict())
    frame = with_reference(pd.DataFrame(rows), table1_reference(), ["alphaTilde", "absRho"], "uStarStar")
    manifest = RunManifest(
        command="table1",
        config={"cells": configs, "optimizer": _search_settings(opt)},
        seed=opt.seed,
        outputs=["table1.csv"],
    )
    write_csv(frame, Path(args.out) / "table1.csv", manifest)
    print(frame.to_string(index=False))
    return EXIT_OK


def cmd_table2(args: argparse.Namespace) -> int:
    opt = _optimizer_config(args)
    cache = _cache(args)
    rows, configs = [], []
    for alpha_tilde, abs_rho, u, *_ in _selected(TABLE2_ROWS, args):
        cfg = _table_config(args, alpha_tilde, abs_rho)
        m1, m2 = table1_counts(alpha_tilde, abs_rho)
        result = _compute_bound(cfg, opt, cache, u, m1, m2, False)
        rows.append(table2_row(result, cfg))
        configs.append({**cfg.to_dict(), "u": u})
    frame = with_reference(pd.DataFrame(rows), table2_reference(), ["alphaTilde", "absRho", "u"], "gainUpperBound")
    manifest = RunManifest(
        command="table2",
        config={"cells": configs, "optimizer": _search_settings(opt)},
        seed=opt.seed,
        outputs=["table2.csv"],
    )
    write_csv(frame, Path(args.out) / "table2.csv", manifest)
    print(frame.to_string(index=False))
    return EXIT_OK


def _problem_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", help="JSON problem config (alpha, alphaTilde, rho, c, quad)")
    parent.add_argument("--alpha", type=float, default=None, help="nominal non-coverage (default 0.05)")
    parent.add_argument("--alpha-tilde", type=float, default=None, help="preliminary-test size (default 0.05)")
    parent.add_argument("--rho", type=float, default=None, help="correlation of the two estimators (default 0)")
    parent.add_argument("--panels", type=int, default=None, help="quadrature panels on [0, c]")
    parent.add_argument("--nodes-per-panel", type=int, default=None, help="Gauss-Legendre nodes per panel")
    parent.add_argument("--out", default="results", help="output directory")
    return parent


def _search_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--seed", type=int, default=DEFAULT_OPTIMIZER.seed)
    parent.add_argument("--starts", type=int, default=DEFAULT_OPTIMIZER.multistarts, help="Nelder-Mead multistarts")
    parent.add_argument("--max-iterations", type=int, default=DEFAULT_OPTIMIZER.max_iterations)
    parent.add_argument("--workers", type=int, default=1, help="processes for the multistarts")
    parent.add_argument("--trace", default=None, help="append optimizer trace as JSON lines to this file")
    parent.add_argument("--cache-dir", default=None, help="result cache directory (default $SMOOTHCI_CACHE_DIR)")
    parent.add_argument("--no-cache", action="store_true")
    return parent


def _table_filters(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha-tilde-values", type=float, nargs="+", default=None)
    parser.add_argument("--rho-values", type=float, nargs="+", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smoothci",
        description="Coverage, scaled expected length and lower bounds for CIs centred on bootstrap smoothed estimators",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    subparsers = parser.add_subparsers(dest="command", required=True)
    problem, search = _problem_options(), _search_options()

    rc = subparsers.add_parser("risk-curve", parents=[problem], help="coverage and SEL over a gamma grid")
    rc.add_argument("--width", choices=["sd-delta", "constant", "file"], default="sd-delta")
    rc.add_argument("--width-value", type=float, default=None, help="constant half-width (default z(alpha))")
    rc.add_argument("--width-file", default=None, help="width JSON (nodes, values, tail)")
    rc.add_argument("--gamma-max", type=float, default=12.0)
    rc.add_argument("--gamma-step", type=float, default=0.05)
    rc.set_defaults(func=cmd_risk_curve)

    bd = subparsers.add_parser("bound", parents=[problem, search], help="optimised lower bound on e(0; s)")
    bd.add_argument("--u", type=float, default=None, help="maximum SEL excess allowed")
    bd.add_argument("--m1", type=int, default=None, help="coverage masses (escalates when omitted)")
    bd.add_argument("--m2", type=int, default=None, help="SEL masses (escalates when omitted)")
    bd.add_argument("--u-star-star", action="store_true", help="solve for u**")
    bd.add_argument("--export-width", default=None, help="write the minimising width s(gamma, nu) as JSON")
    bd.set_defaults(func=cmd_bound)

    vf = subparsers.add_parser("verify", help="Monte-Carlo cross-check of the analytic risks")
    vf.add_argument("--n", type=int, default=1_000_000, help="draws per estimate")
    vf.add_argument("--seed", type=int, default=DEFAULT_OPTIMIZER.seed)
    vf.add_argument("--cases", default=None, help="JSON list of cases (default: built-in suite)")
    vf.add_argument("--n-se", type=float, default=3.0, help="tolerance in standard errors")
    vf.add_argument("--out", default="results")
    vf.add_argument("--mutate", choices=["flip-b"], default=None, help=argparse.SUPPRESS)
    vf.set_defaults(func=cmd_verify)

    t1 = subparsers.add_parser("table1", parents=[problem, search], help="u** over the tabulated grid")
    _table_filters(t1)
    t1.set_defaults(func=cmd_table1)

    t2 = subparsers.add_parser("table2", parents=[problem, search], help="gain/loss over the tabulated grid")
    _table_filters(t2)
    t2.set_defaults(func=cmd_table2)
    return parser


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING, format="%(message)s", force=True)
    if not verbose:
        logging.getLogger("src.cli").setLevel(logging.INFO)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    _configure_logging(args.verbose)
    try:
        return args.func(args)
    except (FileNotFoundError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
