"""Command-line interface.

Subcommands: steps (evaluate a steplength policy on one secant pair),
quad (solve one random quadratic instance), rosenbrock (the iteration
table), bench (sweep a grid of quadratic instances), profile (performance
profile from a cost matrix or a sweep).  Exit codes: 0 on success, 1 for
usage or input-file problems, 2 when a computation fails or a --verify
check disagrees.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__, harness, oracle, quadratic, solver
from .errors import InvalidParameterError, StlsbbError
from .harness import fmt17
from .steps import StepPair, parse_policy


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _vector(text):
    try:
        return np.array([float(v) for v in text.split(",")], dtype=float)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated vector: {text!r}")


def _float_list(text):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}")


def _int_list(text):
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {text!r}")


def _parse_seeds(text):
    """'10' means seeds 0..9; '0,3,7' means exactly those."""
    try:
        if "," in text:
            return [int(v) for v in text.split(",")]
        return list(range(int(text)))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a seed count or list: {text!r}")


def _policy_list(text):
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("empty policy list")
    for p in parts:
        try:
            parse_policy(p)
        except InvalidParameterError as exc:
            raise argparse.ArgumentTypeError(str(exc))
    return parts


def _read_text(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        print(f"stlsbb: cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(1)


def _write_text(path, text):
    try:
        Path(path).write_text(text)
    except OSError as exc:
        print(f"stlsbb: cannot write {path}: {exc}", file=sys.stderr)
        raise SystemExit(1)


def _cmd_steps(args):
    pair = StepPair(args.s, args.y)
    policy = parse_policy(args.policy)
    from .steps import next_steplength

    alpha, _ = next_steplength(policy, pair)
    print(fmt17(alpha))
    if args.verify:
        ref = oracle.oracle_steplength(policy, pair)
        err = abs(alpha - ref)
        scale = max(1.0, abs(ref))
        print(f"oracle {fmt17(ref)} |diff| {err:.3e}")
        if err > args.tol * scale:
            print(
                f"stlsbb: closed form and oracle disagree beyond {args.tol:g}",
                file=sys.stderr,
            )
            return 2
    return 0


def _cmd_quad(args):
    if args.instance:
        inst = quadratic.QuadraticInstance.from_json(_read_text(args.instance))
    else:
        setting = quadratic.SpectrumSetting(args.setting, args.kappa)
        inst = quadratic.generate_instance(args.n, setting, args.seed)
    if args.save_instance:
        _write_text(args.save_instance, inst.to_json(indent=2))
    if args.generate_only:
        print(f"instance n={inst.dim} setting={inst.setting_id} "
              f"kappa={inst.kappa:g} seed={inst.seed}")
        return 0
    policy = parse_policy(args.policy)
    tr = quadratic.solve_bb(
        inst, policy, args.epsilon, args.max_iter,
        x0=None, alpha0=args.alpha0,
    )
    print(
        f"policy={args.policy} n={inst.dim} iterations={tr.iterations} "
        f"termination={tr.termination} grad_norm={tr.rows[-1].grad_norm:.6e}"
    )
    if args.trace:
        _write_text(args.trace, tr.to_json(indent=2))
    return 0 if tr.solved else 2


def _cmd_rosenbrock(args):
    table = harness.run_rosenbrock_table(
        epsilons=tuple(args.epsilons),
        policies=tuple(args.policies),
        max_iter=args.max_iter,
    )
    print(table.render())
    if args.out:
        _write_text(args.out, table.to_csv())
    return 0


def _cmd_bench(args):
    grid = harness.ExperimentGrid(
        n=args.n,
        setting_ids=tuple(args.settings),
        kappas=tuple(args.kappas),
        epsilons=tuple(args.epsilons),
        seeds=tuple(args.seeds),
        policies=tuple(args.policies),
        max_iter=args.max_iter,
    )
    progress = None
    if not args.quiet:
        done = [0]
        total = grid.cell_count()

        def progress(cell):
            done[0] += 1
            print(f"\r{done[0]}/{total} cells", end="", file=sys.stderr, flush=True)

    cells = harness.run_quadratic_sweep(grid, progress=progress)
    if not args.quiet:
        print(file=sys.stderr)
    if args.out:
        text = harness.sweep_to_json(cells) if args.json else harness.sweep_to_csv(cells)
        _write_text(args.out, text)
    avg = harness.average_table(cells)
    print(harness.averages_to_csv(avg), end="")
    if args.averages:
        _write_text(args.averages, harness.averages_to_csv(avg))
    if args.profile:
        prof = harness.profile_from_cells(cells)
        _write_text(args.profile, prof.to_csv())
    n_err = sum(1 for c in cells if c.status.startswith("error"))
    return 2 if n_err else 0


def _cmd_profile(args):
    if args.cells:
        prof = harness.profile_from_cells(harness.sweep_from_csv(_read_text(args.cells)))
    else:
        prof = harness.profile_from_matrix_csv(_read_text(args.costs))
    text = prof.to_csv()
    if args.out:
        _write_text(args.out, text)
        for j, name in enumerate(prof.solvers):
            print(f"{name}: solves {prof.solve_fraction(j):.3f}, "
                  f"rho(1)={prof.rho(j, 1.0):.3f}, rho(2)={prof.rho(j, 2.0):.3f}")
    else:
        print(text, end="")
    return 0


def build_parser():
    p = _Parser(prog="stlsbb", description=__doc__.split("\n\n")[1])
    p.add_argument("--version", action="version", version=f"stlsbb {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("steps", parents=[], help="evaluate a steplength policy on a secant pair")
    ps.add_argument("--s", type=_vector, required=True, help="iterate difference, comma-separated")
    ps.add_argument("--y", type=_vector, required=True, help="gradient difference, comma-separated")
    ps.add_argument("--policy", default="gamma:1",
                    help="bb1 | bb2 | gamma:G | gammaPrime:G | tau:T | atc:C")
    ps.add_argument("--verify", action="store_true",
                    help="cross-check against the brute-force oracle")
    ps.add_argument("--tol", type=float, default=1e-6, help="verify tolerance (relative)")
    ps.set_defaults(func=_cmd_steps)

    pq = sub.add_parser("quad", help="solve one random quadratic instance with the raw BB method")
    pq.add_argument("--n", type=int, default=100)
    pq.add_argument("--setting", type=int, default=1, help="spectrum recipe 1..7")
    pq.add_argument("--kappa", type=float, default=1e4, help="condition number")
    pq.add_argument("--seed", type=int, default=0)
    pq.add_argument("--policy", default="gamma:1")
    pq.add_argument("--epsilon", type=float, default=1e-6, help="relative gradient tolerance")
    pq.add_argument("--max-iter", type=int, default=20000)
    pq.add_argument("--alpha0", type=float, default=None,
                    help="opening steplength (default: 1/||g0||_inf)")
    pq.add_argument("--trace", metavar="PATH", help="write the full run trace as JSON")
    pq.add_argument("--instance", metavar="PATH", help="load an instance instead of generating")
    pq.add_argument("--save-instance", metavar="PATH", help="serialize the instance as JSON")
    pq.add_argument("--generate-only", action="store_true", help="build/save the instance, no solve")
    pq.set_defaults(func=_cmd_quad)

    pr = sub.add_parser("rosenbrock", help="iteration table on the planar Rosenbrock valley")
    pr.add_argument("--epsilons", type=_float_list, default=[1e-1, 1e-2, 1e-4, 1e-8])
    pr.add_argument("--policies", type=_policy_list,
                    default=["bb1", "bb2", "gamma:1", "gamma:1.5"])
    pr.add_argument("--max-iter", type=int, default=5000)
    pr.add_argument("--out", metavar="PATH", help="also write the table as CSV")
    pr.set_defaults(func=_cmd_rosenbrock)

    pb = sub.add_parser("bench", help="sweep a grid of quadratic instances")
    pb.add_argument("--n", type=int, default=100)
    pb.add_argument("--settings", type=_int_list, default=[1], help="spectrum recipes")
    pb.add_argument("--kappas", type=_float_list, default=[1e4])
    pb.add_argument("--epsilons", type=_float_list, default=[1e-6])
    pb.add_argument("--seeds", type=_parse_seeds, default=list(range(10)),
                    help="a count N (seeds 0..N-1) or an explicit list")
    pb.add_argument("--policies", type=_policy_list,
                    default=["bb1", "bb2", "gamma:1", "gamma:20"])
    pb.add_argument("--max-iter", type=int, default=20000)
    pb.add_argument("--out", metavar="PATH", help="write per-cell results")
    pb.add_argument("--json", action="store_true", help="write cells as JSON instead of CSV")
    pb.add_argument("--averages", metavar="PATH", help="write the averages table as CSV")
    pb.add_argument("--profile", metavar="PATH", help="write a performance profile CSV")
    pb.add_argument("--quiet", action="store_true", help="no progress output")
    pb.set_defaults(func=_cmd_bench)

    pp = sub.add_parser("profile", help="performance profile from costs")
    src = pp.add_mutually_exclusive_group(required=True)
    src.add_argument("--costs", metavar="PATH",
                     help="cost-matrix CSV: header row, then one row per problem")
    src.add_argument("--cells", metavar="PATH", help="sweep CSV from 'bench --out'")
    pp.add_argument("--out", metavar="PATH", help="write the profile curve CSV")
    pp.set_defaults(func=_cmd_profile)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StlsbbError as exc:
        print(f"stlsbb: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
