"""``opkit`` command line: dot tests, forward-timing benchmark, interpolation demo.

Exit codes: 0 success, 1 dot test failed, 2 usage or configuration error.
"""

import argparse
import json
import sys

from opkit.bench import BENCH_IMPLS, BENCH_OPS, DEFAULT_BENCH_CAP, DEFAULT_SIZES, run_bench, write_csv
from opkit.exceptions import OpkitError
from opkit.interp import InterpConfig, run_interp, write_interp
from opkit.opspec import BuildContext, OpSpecError, build_opspec
from opkit.validate import dottest

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_list(cast):
    def parse(text):
        try:
            return [cast(v) for v in text.split(",") if v.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid list {text!r}") from None

    return parse


def _fail(message):
    print(f"opkit: error: {message}", file=sys.stderr)
    return EXIT_USAGE


def cmd_dottest(args):
    ctx = BuildContext(
        n=args.n, fraction=args.fraction, indices_seed=args.indices_seed, seed=args.seed, dx=args.dx
    )
    try:
        op = build_opspec(args.op, ctx)
    except (OpSpecError, OpkitError) as exc:
        return _fail(str(exc))
    result = dottest(op, trials=args.trials, tol=args.tol, seed=args.seed)
    out = {"op": args.op, "shape": list(op.shape), **result.to_dict()}
    print(json.dumps(out, indent=2))
    return EXIT_OK if result.passed else EXIT_FAILED


def cmd_bench(args):
    for name in args.ops:
        if name not in BENCH_OPS:
            return _fail(f"unknown benchmark operator {name!r}; choose from {', '.join(BENCH_OPS)}")
    for impl in args.impls:
        if impl not in BENCH_IMPLS:
            return _fail(f"unknown implementation {impl!r}; choose from {', '.join(BENCH_IMPLS)}")
    if args.sizes != sorted(args.sizes) or any(s < 2 for s in args.sizes):
        return _fail("sizes must be ascending integers >= 2")
    if args.repeats < 1:
        return _fail("repeats must be >= 1")
    try:
        open(args.out, "a", encoding="utf-8").close()
    except OSError as exc:
        return _fail(f"cannot write {args.out}: {exc}")
    print("note: sparse-matrix baseline omitted; comparing operator vs dense only", file=sys.stderr)

    def progress(rec):
        if not args.quiet:
            print(f"{rec.op_name:12s} {rec.impl:9s} {rec.size:7d} {rec.mean_seconds:.3e}s",
                  file=sys.stderr)

    try:
        records = run_bench(args.ops, args.impls, args.sizes, args.repeats,
                            cap=args.cap, seed=args.seed, progress=progress)
    except (ValueError, OpkitError) as exc:
        return _fail(str(exc))
    try:
        write_csv(records, args.out)
    except OSError as exc:
        return _fail(f"cannot write {args.out}: {exc}")
    return EXIT_OK


def cmd_interp(args):
    cfg = InterpConfig(
        n=args.n,
        sample_fraction=args.sample_fraction,
        freqs=args.freqs,
        amps=args.amps,
        seed=args.seed,
        eps=args.eps,
        tau=args.tau,
        tau_factor=args.tau_factor,
        max_iters=args.max_iters,
        tol=args.tol,
    )
    try:
        result = run_interp(cfg)
    except OpkitError as exc:
        return _fail(str(exc))
    try:
        report = write_interp(cfg, result, args.out)
    except OSError as exc:
        return _fail(f"cannot write to {args.out}: {exc}")
    summary = {k: report[k]["rel_l2_error"] for k in ("naive", "regularized", "fista")}
    summary["support_match"] = report["fista"]["support_match"]
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="opkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("dottest", help="run the adjoint dot test on an operator expression")
    p.add_argument("--op", default="identity",
                   help="operator expression, e.g. 'chain(restriction, adjoint(dft))'")
    p.add_argument("--n", type=int, default=64, help="model length of the expression")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--indices-seed", type=int, default=0, help="seed for restriction indices")
    p.add_argument("--fraction", type=float, default=0.25, help="restriction sampling fraction")
    p.add_argument("--dx", type=float, default=1.0, help="derivative step")
    p.set_defaults(func=cmd_dottest)

    p = sub.add_parser("bench", help="time forward applications, operator vs dense")
    p.add_argument("--ops", type=_csv_list(str), default=list(BENCH_OPS))
    p.add_argument("--impls", type=_csv_list(str), default=list(BENCH_IMPLS))
    p.add_argument("--sizes", type=_csv_list(int), default=list(DEFAULT_SIZES))
    p.add_argument("--repeats", type=int, default=200)
    p.add_argument("--cap", type=int, default=DEFAULT_BENCH_CAP,
                   help="largest dense matrix (entries) to build")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="bench.csv")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_bench)

    d = InterpConfig()
    p = sub.add_parser("interp", help="irregular-sampling interpolation experiment")
    p.add_argument("--n", type=int, default=d.n)
    p.add_argument("--sample-fraction", type=float, default=d.sample_fraction)
    p.add_argument("--freqs", type=_csv_list(int), default=d.freqs)
    p.add_argument("--amps", type=_csv_list(float), default=d.amps)
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--eps", type=float, default=d.eps, help="second-derivative weight")
    p.add_argument("--tau", type=float, default=None, help="l1 weight (overrides --tau-factor)")
    p.add_argument("--tau-factor", type=float, default=d.tau_factor,
                   help="tau = factor * max|A^H y| when --tau is not given")
    p.add_argument("--max-iters", type=int, default=d.max_iters)
    p.add_argument("--tol", type=float, default=d.tol)
    p.add_argument("--out", default="interp_out", help="output directory")
    p.set_defaults(func=cmd_interp)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
