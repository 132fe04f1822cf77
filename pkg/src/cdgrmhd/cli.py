"""Command-line entry point: run / convergence / reference / audit.

Exit codes: 0 success, 2 configuration error, 3 physics failure (recovery
breakdown or inadmissible cell average), 4 audit failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .audit import run_audit
from .driver import PhysicsFailure, Run2D, make_run
from .io_config import (ConfigError, DivergenceSeries, RunConfig, emit_config,
                        parse_config, write_snapshot_1d)
from .limiters import AverageInadmissible
from .problems import make_problem
from .reference import run_reference
from .state import RecoveryFailure

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS, EXIT_AUDIT = 0, 2, 3, 4


def _set_threads(n: int):
    if n > 0:
        import numba

        numba.set_num_threads(n)


def _apply_config_args(args) -> RunConfig:
    overrides = list(args.overrides)
    if getattr(args, "out", None):
        overrides.append(f"out={args.out}")
    if getattr(args, "threads", None) is not None:
        overrides.append(f"threads={args.threads}")
    return parse_config(args.config, overrides)


def cmd_run(args) -> int:
    cfg = _apply_config_args(args)
    _set_threads(cfg.threads)
    os.makedirs(cfg.out, exist_ok=True)
    with open(os.path.join(cfg.out, "run_config.ini"), "w") as fh:
        fh.write(emit_config(cfg))
    run = make_run(cfg)
    is2d = isinstance(run, Run2D)
    div = DivergenceSeries(cfg.out) if (is2d and cfg.divergence_report) else None
    counter = {"n": 0}

    def hook(r):
        counter["n"] += 1
        r.write_snapshot(cfg.out, tag=f"{counter['n']:04d}")

    try:
        if is2d:
            stats = run.run(div_series=div, snapshot_hook=hook if cfg.output_every > 0 else None)
        else:
            stats = run.run(snapshot_hook=hook if cfg.output_every > 0 else None)
        run.write_snapshot(cfg.out, tag="final")
    except (RecoveryFailure, AverageInadmissible, PhysicsFailure) as exc:
        print(f"physics failure: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    msg = (f"{cfg.problem}: t={run.sol.t:.6g} steps={stats.steps} "
           f"dt_min={stats.dt_min:.3e} bp_limited={stats.bp_limited_cells} "
           f"tvb_flagged={stats.tvb_flagged_cells} wall={stats.wall_time:.1f}s")
    if is2d:
        msg += (f" beta_max=({stats.beta_max[0]:.3e},{stats.beta_max[1]:.3e})"
                f" eps_div_max={stats.eps_div_max:.3e}")
    print(msg)
    if run.problem.exact is not None:
        comp = 2 if run.problem.dim == 1 else 5
        l1, l2, li = run.error_norms(comp)
        name = "v2" if run.problem.dim == 1 else "B2"
        print(f"errors[{name}]: l1={l1:.4e} l2={l2:.4e} linf={li:.4e}")
    return EXIT_OK


def convergence_study(problem_id: str, meshes, cfg: RunConfig):
    """Errors and observed orders on a mesh sequence; returns result rows."""
    rows = []
    for n in meshes:
        c = RunConfig(**{**cfg.__dict__})
        c.problem = problem_id
        c.nx = n
        c.ny = n
        c.validate()
        run = make_run(c)
        run.run()
        comp = 2 if run.problem.dim == 1 else 5
        l1, l2, li = run.error_norms(comp)
        rows.append({"n": n, "l1": l1, "l2": l2, "linf": li})
    for i, row in enumerate(rows):
        for norm in ("l1", "l2", "linf"):
            row[f"order_{norm}"] = (
                float("nan") if i == 0 else
                float(np.log2(rows[i - 1][norm] / row[norm])))
    return rows


def format_convergence_table(problem_id: str, rows) -> str:
    var = "v2" if problem_id == "alfven1d" else "B2"
    lines = [f"errors in {var} at t=1 ({problem_id})",
             f"{'N':>6s} {'l1':>12s} {'ord':>6s} {'l2':>12s} {'ord':>6s} "
             f"{'linf':>12s} {'ord':>6s}"]
    for row in rows:
        lines.append(
            f"{row['n']:>6d} {row['l1']:>12.4e} {row['order_l1']:>6.2f} "
            f"{row['l2']:>12.4e} {row['order_l2']:>6.2f} "
            f"{row['linf']:>12.4e} {row['order_linf']:>6.2f}")
    return "\n".join(lines)


def cmd_convergence(args) -> int:
    cfg = _apply_config_args(args)
    _set_threads(cfg.threads)
    if args.problem not in ("alfven1d", "alfven2d"):
        print("convergence study supports alfven1d / alfven2d", file=sys.stderr)
        return EXIT_CONFIG
    meshes = [int(m) for m in args.meshes.split(",")]
    try:
        rows = convergence_study(args.problem, meshes, cfg)
    except (RecoveryFailure, AverageInadmissible, PhysicsFailure) as exc:
        print(f"physics failure: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    os.makedirs(cfg.out, exist_ok=True)
    csv = os.path.join(cfg.out, f"convergence_{args.problem}.csv")
    with open(csv, "w") as fh:
        fh.write("n,l1,order_l1,l2,order_l2,linf,order_linf\n")
        for row in rows:
            fh.write(f"{row['n']},{row['l1']:.12e},{row['order_l1']:.6g},"
                     f"{row['l2']:.12e},{row['order_l2']:.6g},"
                     f"{row['linf']:.12e},{row['order_linf']:.6g}\n")
    print(format_convergence_table(args.problem, rows))
    print(f"written: {csv}")
    return EXIT_OK


def cmd_reference(args) -> int:
    cfg = _apply_config_args(args)
    _set_threads(cfg.threads)
    if args.problem not in ("rp1", "rp2", "rp3"):
        print("reference solver supports rp1 / rp2 / rp3", file=sys.stderr)
        return EXIT_CONFIG
    problem = make_problem(args.problem)
    t_end = cfg.t_end if cfg.t_end >= 0 else None
    try:
        state = run_reference(problem, args.cells, t_end=t_end)
        from .state import cons_to_prim_batch

        W, ok, _ = cons_to_prim_batch(state.U[1:-1], problem.eos)
        if not ok.all():
            raise RecoveryFailure("reference profile recovery failed")
    except RecoveryFailure as exc:
        print(f"physics failure: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    lor = 1.0 / np.sqrt(1.0 - np.einsum("pc,pc->p", W[:, 1:4], W[:, 1:4]))
    os.makedirs(cfg.out, exist_ok=True)
    path = os.path.join(cfg.out, f"{args.problem}_reference.csv")
    write_snapshot_1d(path, state.centers(), W, lor)
    print(f"reference profile ({args.cells} cells, t={state.t:.6g}): {path}")
    return EXIT_OK


def cmd_audit(args) -> int:
    cfg = _apply_config_args(args)
    _set_threads(cfg.threads)
    checks = run_audit(seed=cfg.seed, quick=args.quick, corrupt_df=args.corrupt_df)
    for c in checks:
        print(c.line())
    if all(c.passed for c in checks):
        print("audit: all properties hold")
        return EXIT_OK
    print("audit: FAILURES detected", file=sys.stderr)
    return EXIT_AUDIT


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cdgrmhd",
        description="Bound-preserving central DG solver for relativistic MHD")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="INI-style config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--threads", type=int, default=None, help="worker count")
        p.add_argument("overrides", nargs="*", help="key=value overrides")

    p = sub.add_parser("run", help="integrate a problem and emit snapshots")
    common(p)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("convergence", help="mesh-refinement error study")
    p.add_argument("--problem", default="alfven1d")
    p.add_argument("--meshes", default="20,40,80,160")
    common(p)
    p.set_defaults(fn=cmd_convergence)

    p = sub.add_parser("reference", help="first-order reference profile")
    p.add_argument("--problem", default="rp1")
    p.add_argument("--cells", type=int, default=40_000)
    common(p)
    p.set_defaults(fn=cmd_reference)

    p = sub.add_parser("audit", help="randomized property suites")
    p.add_argument("--quick", action="store_true", help="reduced sample counts")
    p.add_argument("--corrupt-df", action="store_true",
                   help="test hook: corrupt a DF basis vector to force failure")
    common(p)
    p.set_defaults(fn=cmd_audit)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
