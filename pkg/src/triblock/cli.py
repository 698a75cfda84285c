"""Command-line interface.

Subcommands: generate, solve, bench, bounds, spectrum, validate.
Exit codes: 0 success, 1 solver non-convergence, 2 usage or hypothesis errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys as _sys

from .backend import backend_name
from .errors import (HypothesisViolatedError, MatrixMarketError,
                     NotSupportedError, TriblockError)
from .factorization import DENSE_THRESHOLD
from .krylov import SolveConfig, gmres
from .mmio import load_system, load_system_from_blocks, save_system
from .precond import ALL_KIND_TAGS, BlockPreconditioner, build_blocks
from .problems import FAMILIES, ProblemSpec
from .reporting import (BenchReport, write_box_json, write_plotdata)
from .spectral import estimate_constants, kind_box, spectrum_and_check
from .system import (BlockSystem, HatBlockSystem, assemble_monolithic,
                     hat_to_standard, validate)

USAGE_ERROR = 2
NO_CONVERGENCE = 1


def _add_problem_args(sp):
    sp.add_argument("--problem", choices=FAMILIES, help="generator family")
    sp.add_argument("--p", type=int, help="grid parameter for stokes-modified / image-restoration")
    sp.add_argument("--grid-pow", type=int, help="power-of-two grid exponent for poisson-control")
    sp.add_argument("--cells", type=int, help="cells per side for fd-stokes-substitute")
    sp.add_argument("--beta", type=float, default=1e-2, help="regularization for poisson-control")
    sp.add_argument("--n", type=int, help="first block size (random family)")
    sp.add_argument("--m", type=int, help="second block size (random family)")
    sp.add_argument("--l", type=int, help="third block size (random family)")
    sp.add_argument("--seed", type=int, default=0, help="seed (random family)")
    sp.add_argument("--system", help="JSON sidecar of a saved system (overrides --problem)")
    sp.add_argument("--blocks", nargs=4, metavar=("A", "B", "C", "D"),
                    help="four MatrixMarket files (overrides --problem)")
    sp.add_argument("--hat", action="store_true",
                    help="treat --blocks input as the hat arrangement")


def _add_solver_args(sp):
    sp.add_argument("--recipe", default="exact",
                    choices=["ex61", "ex62", "ex63", "ex64", "ex65", "exact"],
                    help="approximation-block recipe")
    sp.add_argument("--kinds", default="all",
                    help="comma-separated preconditioner kinds or 'all'")
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--maxit", type=int, default=1000)
    sp.add_argument("--restart", type=int, default=None)
    sp.add_argument("--side", choices=["left", "right"], default="left",
                    help="preconditioning side / stopping rule")
    sp.add_argument("--droptol", type=float, default=1e-8,
                    help="incomplete-Cholesky drop tolerance for ichol recipes")
    sp.add_argument("--dense-threshold", type=int, default=DENSE_THRESHOLD)


def _load_problem(args) -> BlockSystem:
    if args.system:
        sys_obj = load_system(args.system)
    elif args.blocks:
        sys_obj = load_system_from_blocks(*args.blocks,
                                          arrangement="hat" if args.hat else "standard")
    elif args.problem:
        spec = ProblemSpec(family=args.problem, p=args.p, grid_pow=args.grid_pow,
                           cells=args.cells, beta=args.beta, n=args.n, m=args.m,
                           l=args.l, seed=args.seed)
        sys_obj = spec.generate()
    else:
        raise NotSupportedError("one of --problem, --system, --blocks is required")
    if isinstance(sys_obj, HatBlockSystem):
        sys_obj = hat_to_standard(sys_obj)
    return sys_obj


def _problem_label(args) -> str:
    if args.system:
        return os.path.basename(args.system)
    if args.blocks:
        return "files:" + os.path.basename(args.blocks[0])
    parts = [args.problem]
    for key in ("p", "grid_pow", "cells", "n", "m", "l"):
        val = getattr(args, key, None)
        if val is not None:
            parts.append(f"{key}={val}")
    if args.problem == "random":
        parts.append(f"seed={args.seed}")
    return " ".join(parts)


def _kind_list(spec: str):
    if spec.strip().lower() == "all":
        return list(ALL_KIND_TAGS)
    kinds = [k.strip() for k in spec.split(",") if k.strip()]
    for k in kinds:
        if k not in ALL_KIND_TAGS:
            raise NotSupportedError(f"unknown kind {k!r}; choose from {ALL_KIND_TAGS}")
    if not kinds:
        raise NotSupportedError("at least one preconditioner kind is required")
    return kinds


def _validate_or_die(sys_obj, dense_threshold):
    rep = validate(sys_obj, dense_threshold)
    if not rep.ok:
        print(rep.summary())
        raise NotSupportedError("system failed validation")
    return rep


def _config_echo(args, keys):
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def cmd_generate(args):
    sys_obj = _load_problem(args)
    os.makedirs(args.out, exist_ok=True)
    meta = save_system(sys_obj, args.out, name=args.name)
    print(f"wrote {meta}")
    return 0


def cmd_validate(args):
    sys_obj = _load_problem(args)
    rep = validate(sys_obj, args.dense_threshold)
    print(rep.summary())
    return 0 if rep.ok else USAGE_ERROR


def cmd_solve(args):
    sys_obj = _load_problem(args)
    _validate_or_die(sys_obj, args.dense_threshold)
    kinds = _kind_list(args.kinds)
    blocks = build_blocks(sys_obj, args.recipe, args.dense_threshold, args.droptol)
    K = assemble_monolithic(sys_obj)
    b = sys_obj.rhs
    cfg = SolveConfig(tol=args.tol, maxit=args.maxit, restart=args.restart,
                      precond_side=args.side)
    print(f"# problem: {_problem_label(args)}  recipe={args.recipe} "
          f"side={args.side} tol={args.tol:g} backend={backend_name()}")
    print(f"{'kind':>5s} {'IT':>5s} {'RES':>10s} {'trueRES':>10s} "
          f"{'time[s]':>9s}  status")
    report = BenchReport(config=_config_echo(
        args, ["problem", "p", "grid_pow", "cells", "beta", "n", "m", "l",
               "seed", "recipe", "kinds", "tol", "maxit", "restart", "side",
               "droptol"]))
    all_ok = True
    for tag in kinds:
        precond = BlockPreconditioner(tag, blocks, sys_obj)
        x, rep = gmres(K, precond, b, cfg)
        final = rep.relative_residuals[-1] if rep.relative_residuals else 1.0
        status = rep.termination
        print(f"{tag:>5s} {rep.iterations:5d} {final:10.2e} "
              f"{rep.true_relative_residual:10.2e} {rep.wall_time:9.3f}  {status}")
        report.add(problem=_problem_label(args), kind=tag,
                   iterations=rep.iterations, converged=rep.converged,
                   final_residual=float(final),
                   true_residual=rep.true_relative_residual,
                   wall_time=rep.wall_time)
        all_ok = all_ok and rep.converged
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        report.write_json(os.path.join(args.out, "solve_report.json"))
        report.write_csv(os.path.join(args.out, "solve_report.csv"))
    return 0 if all_ok else NO_CONVERGENCE


def cmd_bench(args):
    kinds = _kind_list(args.kinds)
    sizes = [int(tok) for tok in args.sizes.split(",")] if args.sizes else [None]
    cfg = SolveConfig(tol=args.tol, maxit=args.maxit, restart=args.restart,
                      precond_side=args.side)
    report = BenchReport(config=_config_echo(
        args, ["problem", "sizes", "beta", "seed", "recipe", "kinds", "tol",
               "maxit", "restart", "side", "droptol"]))
    all_ok = True
    for size in sizes:
        if size is not None:
            if args.problem in ("stokes-modified", "image-restoration"):
                args.p = size
            elif args.problem == "poisson-control":
                args.grid_pow = size
            elif args.problem == "fd-stokes-substitute":
                args.cells = size
            else:
                raise NotSupportedError("--sizes needs a sweepable --problem")
        sys_obj = _load_problem(args)
        _validate_or_die(sys_obj, args.dense_threshold)
        K = assemble_monolithic(sys_obj)
        b = sys_obj.rhs
        label = _problem_label(args)
        blocks = build_blocks(sys_obj, args.recipe, args.dense_threshold,
                              args.droptol)
        for tag in kinds:
            precond = BlockPreconditioner(tag, blocks, sys_obj)
            x, rep = gmres(K, precond, b, cfg)
            final = rep.relative_residuals[-1] if rep.relative_residuals else 1.0
            print(f"{label:40s} {tag:>4s} IT={rep.iterations:4d} "
                  f"RES={final:9.2e} t={rep.wall_time:7.3f}s")
            report.add(problem=label, kind=tag, iterations=rep.iterations,
                       converged=rep.converged, final_residual=float(final),
                       true_residual=rep.true_relative_residual,
                       wall_time=rep.wall_time)
            all_ok = all_ok and rep.converged
    os.makedirs(args.out, exist_ok=True)
    report.write_json(os.path.join(args.out, "bench_report.json"))
    report.write_csv(os.path.join(args.out, "bench_report.csv"))
    print(f"wrote {os.path.join(args.out, 'bench_report.json')}")
    return 0 if all_ok else NO_CONVERGENCE


def cmd_bounds(args):
    sys_obj = _load_problem(args)
    _validate_or_die(sys_obj, args.dense_threshold)
    kinds = _kind_list(args.kinds)
    blocks = build_blocks(sys_obj, args.recipe, args.dense_threshold, args.droptol)
    est = estimate_constants(sys_obj, blocks, args.dense_threshold)
    print(f"# constants ({est.method}): mu=[{est.mu_lo:.6g},{est.mu_hi:.6g}] "
          f"nu=[{est.nu_lo:.6g},{est.nu_hi:.6g}] omega=[{est.omega_lo:.6g},"
          f"{est.omega_hi:.6g}] tau=[{est.tau_lo:.6g},{est.tau_hi:.6g}] "
          f"theta=[{est.theta_lo:.6g},{est.theta_hi:.6g}]")
    boxes = {}
    print(f"{'kind':>5s} {'re_lo':>12s} {'re_hi':>12s} {'im_abs':>12s}")
    for tag in kinds:
        box = kind_box(tag, est)
        boxes[tag] = box
        print(f"{tag:>5s} {box.re_lo:12.6g} {box.re_hi:12.6g} {box.im_abs:12.6g}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_box_json(boxes, os.path.join(args.out, "bounds.json"),
                       _config_echo(args, ["problem", "p", "grid_pow", "cells",
                                           "beta", "n", "m", "l", "seed",
                                           "recipe", "kinds"]))
    return 0


def cmd_spectrum(args):
    sys_obj = _load_problem(args)
    _validate_or_die(sys_obj, args.dense_threshold)
    kinds = _kind_list(args.kinds)
    blocks = build_blocks(sys_obj, args.recipe, args.dense_threshold, args.droptol)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
    ok = True
    for tag in kinds:
        check = spectrum_and_check(sys_obj, blocks, tag, slack=args.slack,
                                   dense_threshold=args.dense_threshold)
        frac = check.contained_fraction
        print(f"{tag:>5s}: {check.eigenvalues.size} eigenvalues, "
              f"{100 * frac:.1f}% inside box "
              f"[{check.box.re_lo:.4g},{check.box.re_hi:.4g}] x "
              f"+-{check.box.im_abs:.4g}i")
        ok = ok and check.all_contained
        if args.out:
            write_plotdata(check, os.path.join(args.out, f"spectrum_{tag}.csv"))
    return 0 if ok else USAGE_ERROR


def build_parser():
    ap = argparse.ArgumentParser(
        prog="triblock",
        description="Three-by-three block saddle-point solvers with "
                    "factorization preconditioners and eigenvalue-bound "
                    "certification.")
    ap.add_argument("--config", help="JSON file with default option values "
                                     "(explicit flags win)")
    sub = ap.add_subparsers(dest="command")
    subparsers = {}

    sp = subparsers["generate"] = sub.add_parser(
        "generate", help="emit a problem as .mtx files + JSON sidecar")
    _add_problem_args(sp)
    sp.add_argument("--out", required=True)
    sp.add_argument("--name", default="system")
    sp.set_defaults(func=cmd_generate)

    sp = subparsers["validate"] = sub.add_parser(
        "validate", help="check the block assumptions")
    _add_problem_args(sp)
    sp.add_argument("--dense-threshold", type=int, default=DENSE_THRESHOLD)
    sp.set_defaults(func=cmd_validate)

    sp = subparsers["solve"] = sub.add_parser(
        "solve", help="solve one problem with chosen kinds")
    _add_problem_args(sp)
    _add_solver_args(sp)
    sp.add_argument("--out", help="directory for JSON/CSV reports")
    sp.set_defaults(func=cmd_solve)

    sp = subparsers["bench"] = sub.add_parser(
        "bench", help="sweep problem sizes, write a report")
    _add_problem_args(sp)
    _add_solver_args(sp)
    sp.add_argument("--sizes", help="comma-separated size sweep (p / pow / cells)")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_bench)

    sp = subparsers["bounds"] = sub.add_parser(
        "bounds", help="print the eigenvalue bound box per kind")
    _add_problem_args(sp)
    _add_solver_args(sp)
    sp.add_argument("--out", help="directory for bounds.json")
    sp.set_defaults(func=cmd_bounds)

    sp = subparsers["spectrum"] = sub.add_parser(
        "spectrum", help="dense spectrum + containment check")
    _add_problem_args(sp)
    _add_solver_args(sp)
    sp.add_argument("--slack", type=float, default=1e-8)
    sp.add_argument("--out", help="directory for spectrum_<kind>.csv plot data")
    sp.set_defaults(func=cmd_spectrum)
    ap._triblock_subparsers = subparsers
    return ap


def main(argv=None) -> int:
    argv = list(_sys.argv[1:]) if argv is None else list(argv)
    ap = build_parser()
    try:
        args, _ = ap.parse_known_args(argv)
    except SystemExit:
        return USAGE_ERROR
    if args.command is None:
        ap.print_usage()
        return USAGE_ERROR
    if args.config:
        try:
            with open(args.config, "r", encoding="ascii") as fh:
                defaults = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config: {exc}", file=_sys.stderr)
            return USAGE_ERROR
        # defaults must land on the subparser: it parses into a fresh
        # namespace that would otherwise shadow top-level defaults
        ap._triblock_subparsers[args.command].set_defaults(**defaults)
    try:
        args = ap.parse_args(argv)
    except SystemExit:
        return USAGE_ERROR
    try:
        return args.func(args)
    except HypothesisViolatedError as exc:
        print(f"hypothesis violated: {exc}", file=_sys.stderr)
        return USAGE_ERROR
    except (NotSupportedError, MatrixMarketError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return USAGE_ERROR
    except TriblockError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return USAGE_ERROR
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
