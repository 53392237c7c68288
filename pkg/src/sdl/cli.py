"""Command-line harness: instance generation, solves, recovery, sweeps.

Subcommands:

* ``gen``      write a synthetic instance (A0, X0, Y) to matrix files
* ``solve``    run one trust-region solve on a data matrix
* ``recover``  run the full precondition/solve/round/deflate pipeline
* ``round``    LP-round a direction against a data matrix
* ``phase``    run a phase-transition sweep, emitting CSV + figure + text grid

The environment variable SDL_SEED, when set, overrides any seed passed on
the command line. Exit codes: 0 success, 2 configuration error, 3 I/O or
file-format error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import matio, pipeline
from .errors import InvalidInput, ParseError, SdlError
from .geometry import Objective, normalize_sphere
from .model import (make_instance, sample_bg, sample_conditioned_dictionary,
                    sample_fixed_k, sample_orthogonal_dictionary)
from .phase import (ExperimentConfig, run_phase_sweep, write_grid_csv,
                    write_sweep_csv)
from .rng import make_rng
from .rounding import lp_round
from .trm import (SubproblemKind, TrmMode, TrmOptions, re_metric, trm_solve)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3


def _seed_from_env(seed: int) -> int:
    env = os.environ.get("SDL_SEED")
    return int(env) if env else seed


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mode", choices=["adaptive", "fixed"],
                        default="adaptive", help="radius update mode")
    parser.add_argument("--subproblem", choices=["tcg", "exact"],
                        default="tcg", help="trust-region subproblem solver")
    parser.add_argument("--delta0", type=float, default=0.1)
    parser.add_argument("--delta-max", type=float, default=float(np.pi / 4))
    parser.add_argument("--grad-tol", type=float, default=1e-10)
    parser.add_argument("--max-iters", type=int, default=500)


def _solver_opts(args, seed: int) -> TrmOptions:
    return TrmOptions(
        mode=TrmMode.ADAPTIVE if args.mode == "adaptive" else TrmMode.FIXED_STEP,
        subproblem=SubproblemKind.TCG if args.subproblem == "tcg"
        else SubproblemKind.EXACT,
        delta0=args.delta0, delta_max=args.delta_max,
        grad_tol=args.grad_tol, max_iters=args.max_iters, seed=seed,
    )


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise InvalidInput(f"expected a comma-separated integer list, got {text!r}")


def cmd_gen(args) -> int:
    seed = _seed_from_env(args.seed)
    rng = make_rng(seed)
    if args.dict == "identity":
        a0 = np.eye(args.n)
    elif args.dict == "orthogonal":
        a0 = sample_orthogonal_dictionary(args.n, rng)
    else:
        a0 = sample_conditioned_dictionary(args.n, args.kappa, rng)
    if args.k is not None:
        x0 = sample_fixed_k(args.n, args.p, args.k, rng)
        spec = ("k", float(args.k))
    else:
        x0 = sample_bg(args.n, args.p, args.theta, rng)
        spec = ("theta", float(args.theta))
    inst = make_instance(a0, x0, spec, seed)
    ext = "sdlm" if args.format == "bin" else "csv"
    for name, m in (("A0", inst.a0), ("X0", inst.x0), ("Y", inst.y)):
        path = f"{args.out}_{name}.{ext}"
        matio.write_matrix(path, m, args.format)
        print(f"wrote {path}")
    return EXIT_OK


def cmd_solve(args) -> int:
    y = matio.read_matrix(args.y)
    seed = _seed_from_env(args.seed)
    opts = _solver_opts(args, seed)
    q0 = None
    if args.q0:
        q0 = normalize_sphere(matio.read_matrix(args.q0).reshape(-1))
    report = trm_solve(Objective(y, args.mu), opts, q0=q0)
    print(f"status={report.status.value}")
    print(f"iterations={report.num_iters}")
    print(f"f_final={report.f_final:.12e}")
    print(f"grad_final={report.grad_final:.6e}")
    print(f"RE={re_metric(report.q_final):.6e}")
    if args.trace:
        with open(args.trace, "w") as fh:
            fh.write("iter,f,grad_norm,step_norm,region,on_boundary,rho,accepted\n")
            for i, rec in enumerate(report.iterates):
                rho = "" if rec.rho is None else f"{rec.rho:.6e}"
                fh.write(f"{i},{rec.f_value:.12e},{rec.grad_norm:.6e},"
                         f"{rec.step_norm:.6e},{rec.region.value},"
                         f"{int(rec.on_boundary)},{rho},{int(rec.accepted)}\n")
        print(f"wrote {args.trace}")
    if args.figure:
        from .plotting import save_solve_trace
        save_solve_trace(report, args.figure)
        print(f"wrote {args.figure}")
    return EXIT_OK


def cmd_recover(args) -> int:
    y = matio.read_matrix(args.y)
    seed = _seed_from_env(args.seed)
    opts = _solver_opts(args, seed)
    y_hat = y
    if args.theta is not None:
        y_hat = pipeline.precondition(y, args.theta)
    elif args.precondition:
        y_hat = pipeline.precondition(y)
    x_true = matio.read_matrix(args.x0) if args.x0 else None
    result = pipeline.recover_all(y_hat, args.mu, opts, x_true=x_true)
    for line in pipeline.run_report_lines(result):
        print(line)
    if args.a0:
        a_true = matio.read_matrix(args.a0)
        # Score dictionary columns as rows of the transposes.
        amatch = pipeline.match_signed_permutation(result.a_hat.T, a_true.T)
        print(f"dict.max_rel_err={amatch.max_rel_err:.6e}")
    if args.out:
        ext = "sdlm" if args.format == "bin" else "csv"
        for name, m in (("Qstars", result.q_stars), ("Xhat", result.x_hat),
                        ("Ahat", result.a_hat)):
            path = f"{args.out}_{name}.{ext}"
            matio.write_matrix(path, m, args.format)
            print(f"wrote {path}")
    return EXIT_OK


def cmd_round(args) -> int:
    y = matio.read_matrix(args.y)
    r = matio.read_matrix(args.r).reshape(-1)
    res = lp_round(y, r)
    print(f"objective={res.objective:.12e}")
    print(f"confidence={res.confidence:.9f}")
    print(f"flagged={int(res.below_threshold)}")
    print(f"pivots={res.pivots}")
    print("q=" + ",".join(f"{v:.12e}" for v in res.q))
    if args.out:
        matio.write_matrix(args.out, res.q.reshape(1, -1), args.format)
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_phase(args) -> int:
    base_seed = _seed_from_env(args.base_seed)
    n_values = _parse_int_list(args.n)
    if args.setting == 1:
        if not args.k:
            raise InvalidInput("setting 1 needs --k")
        col_values, col_kind = _parse_int_list(args.k), "k"
    else:
        if not args.p:
            raise InvalidInput("setting 2 needs --p")
        col_values, col_kind = _parse_int_list(args.p), "p"
    cfg = ExperimentConfig(
        n_values=n_values, col_values=col_values, col_kind=col_kind,
        p_rule=args.p_rule, p_fixed=args.p_fixed,
        coefficient_model=args.coefficient_model, mu=args.mu,
        trials=args.trials, base_seed=base_seed, jobs=args.jobs,
        include_timestamp=not args.no_timestamp,
        solver=_solver_opts(args, base_seed),
    )
    grid, results = run_phase_sweep(cfg)
    write_sweep_csv(args.out, results, include_timestamp=not args.no_timestamp)
    print(f"wrote {args.out}")
    grid_path = Path(args.out).with_name(Path(args.out).stem + "_grid.csv")
    write_grid_csv(grid_path, grid)
    print(f"wrote {grid_path}")
    if not args.no_figure:
        from .plotting import save_phase_heatmap
        fig_path = args.figure or str(Path(args.out).with_suffix(".png"))
        save_phase_heatmap(grid, fig_path)
        print(f"wrote {fig_path}")
    print(grid.text_heatmap())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdl",
        description="Sparse dictionary recovery over the sphere: solvers and experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--p", type=int, required=True)
    group = g.add_mutually_exclusive_group(required=True)
    group.add_argument("--k", type=int, help="exact nonzeros per column")
    group.add_argument("--theta", type=float, help="Bernoulli-Gaussian rate")
    g.add_argument("--dict", choices=["identity", "orthogonal", "conditioned"],
                   default="identity")
    g.add_argument("--kappa", type=float, default=3.0,
                   help="condition number for --dict conditioned")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output path prefix")
    g.add_argument("--format", choices=["bin", "csv"], default="bin")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="run one trust-region solve")
    s.add_argument("--y", required=True, help="data matrix file")
    s.add_argument("--mu", type=float, default=1e-2)
    s.add_argument("--q0", help="optional starting point file")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--trace", help="write per-iteration telemetry CSV here")
    s.add_argument("--figure", help="write a convergence figure here")
    _add_solver_flags(s)
    s.set_defaults(func=cmd_solve)

    r = sub.add_parser("recover", help="run the full recovery pipeline")
    r.add_argument("--y", required=True)
    r.add_argument("--mu", type=float, default=1e-2)
    r.add_argument("--theta", type=float,
                   help="precondition with sqrt(p*theta) (YY^T)^{-1/2} Y")
    r.add_argument("--precondition", action="store_true",
                   help="precondition without the theta scale")
    r.add_argument("--x0", help="ground-truth coefficients for scoring")
    r.add_argument("--a0", help="ground-truth dictionary for scoring")
    r.add_argument("--out", help="output path prefix for Qstars/Xhat/Ahat")
    r.add_argument("--format", choices=["bin", "csv"], default="bin")
    r.add_argument("--seed", type=int, default=0)
    _add_solver_flags(r)
    r.set_defaults(func=cmd_recover)

    d = sub.add_parser("round", help="LP-round a direction")
    d.add_argument("--y", required=True)
    d.add_argument("--r", required=True, help="direction vector file")
    d.add_argument("--out", help="write the rounded unit vector here")
    d.add_argument("--format", choices=["bin", "csv"], default="bin")
    d.set_defaults(func=cmd_round)

    ph = sub.add_parser("phase", help="phase-transition sweep")
    ph.add_argument("--setting", type=int, choices=[1, 2], required=True,
                    help="1: vary (n, k) with p = ceil(5 n^2 log n); "
                         "2: vary (n, p) with k = ceil(0.2 n)")
    ph.add_argument("--n", required=True, help="comma-separated n values")
    ph.add_argument("--k", help="comma-separated k values (setting 1)")
    ph.add_argument("--p", help="comma-separated p values (setting 2)")
    ph.add_argument("--p-rule", choices=["5n2logn", "fixed"], default="5n2logn")
    ph.add_argument("--p-fixed", type=int, help="p for --p-rule fixed")
    ph.add_argument("--coefficient-model", choices=["fixed-k", "bg"],
                    default="fixed-k")
    ph.add_argument("--mu", type=float, default=1e-2)
    ph.add_argument("--trials", type=int, default=5)
    ph.add_argument("--base-seed", type=int, default=0)
    ph.add_argument("--jobs", type=int, default=1)
    ph.add_argument("--out", required=True, help="trials CSV path")
    ph.add_argument("--figure", help="heatmap PNG path (default: CSV stem .png)")
    ph.add_argument("--no-figure", action="store_true")
    ph.add_argument("--no-timestamp", action="store_true",
                    help="suppress the timestamp header line in the CSV")
    _add_solver_flags(ph)
    ph.set_defaults(func=cmd_phase)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except InvalidInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SdlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
