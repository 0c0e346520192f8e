"""Command line interface: batch evaluation, curve sweeps, gradient checks
and benchmarks.

Subcommands
-----------
eval      newline-delimited JSON records in, one JSON result per line out.
curve     CSV sweep of the hard vs. relaxed top-k mask along the segment
          theta(s) = (3, 1, -1 + s, s).
gradcheck closed-form Jacobian products vs. central finite differences.
bench     runtime comparison of the solvers, CSV out.

Exit codes: 0 success, 1 internal error, 2 all eval records failed,
3 gradient check failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time

import numpy as np

from . import hard
from .autodiff import jvp
from .oracles import fd_jacobian
from .regularization import PhiKind, Regularizer
from .relaxed import (OperatorSpec, f_value, relaxed_apply, soft_rank,
                      soft_signed_topkmask, soft_sort, soft_topkmag,
                      soft_topkmask)


def _fmt(value) -> str:
    """JSON fragment with floats at 17 significant digits."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    if isinstance(value, dict):
        items = (f"{json.dumps(k)}: {_fmt(v)}" for k, v in value.items())
        return "{" + ", ".join(items) + "}"
    return json.dumps(value)


def _record_reg(rec: dict) -> Regularizer:
    return Regularizer(p=float(rec.get("p", 2.0)), lam=float(rec.get("lambda", 1.0)))


def _eval_record(rec: dict) -> dict:
    op = rec.get("op")
    if not isinstance(op, str):
        raise ValueError("record is missing the 'op' field")
    x = np.asarray(rec["x"], dtype=float)
    solver = rec.get("solver", "pav")
    if op == "topkmask":
        return {"y": hard.topkmask(x, rec["k"])}
    if op == "topk":
        return {"y": hard.topk(x, rec["k"])}
    if op == "topkmag":
        return {"y": hard.topkmag(x, rec["k"])}
    if op == "lmo":
        value, argmax = hard.lmo(x, np.asarray(rec["w"], dtype=float))
        return {"y": argmax, "value": value}
    reg = _record_reg(rec)
    if op == "soft_topkmask":
        return {"y": soft_topkmask(x, rec["k"], reg, solver)}
    if op == "soft_topkmag":
        return {"y": soft_topkmag(x, rec["k"], reg, solver)}
    if op == "soft_signed_topkmask":
        return {"y": soft_signed_topkmask(x, rec["k"], reg, solver)}
    if op == "soft_sort":
        return {"y": soft_sort(x, reg, solver)}
    if op == "soft_rank":
        return {"y": soft_rank(x, reg, solver)}
    if op == "f_value":
        phi = PhiKind(rec.get("phi", "identity"))
        if "k" in rec:
            spec = OperatorSpec.top_k(phi, reg, rec["k"])
        else:
            spec = OperatorSpec.with_weights(phi, reg, np.asarray(rec["w"], dtype=float))
        out = relaxed_apply(x, spec, solver)
        return {"y": out.y, "value": f_value(x, spec, solver)}
    raise ValueError(f"unknown op {op!r}")


def cmd_eval(args, out_stream) -> int:
    stream = open(args.input) if args.input else sys.stdin
    successes = failures = 0
    try:
        for line in stream:
            line = line.strip()
            if not line:
                continue
            try:
                result = _eval_record(json.loads(line))
                successes += 1
            except Exception as exc:  # per-record isolation
                result = {"error": str(exc)}
                failures += 1
            out_stream.write(_fmt(result) + "\n")
    finally:
        if args.input:
            stream.close()
    if failures and not successes:
        return 2
    return 0


def _theta(s: float) -> np.ndarray:
    return np.array([3.0, 1.0, -1.0 + s, s])


def cmd_curve(args, out_stream) -> int:
    if args.grid_steps < 1:
        raise ValueError("--grid-steps must be positive")
    reg = Regularizer(p=args.p, lam=args.lam)
    phi = PhiKind(args.phi)
    spec = OperatorSpec.top_k(phi, reg, args.k)
    writer = csv.writer(out_stream)
    writer.writerow(["s", "hard", "relaxed"])
    # Coordinates 2 and 3 (0-based) are the moving entries -1+s and s.
    for s in np.linspace(args.grid_start, args.grid_end, args.grid_steps):
        theta = _theta(float(s))
        mask = hard.topkmask(theta, args.k)
        y = relaxed_apply(theta, spec).y
        writer.writerow([f"{s:.17g}", f"{mask[2] + mask[3]:.17g}",
                         f"{y[2] + y[3]:.17g}"])
    return 0


_GRADCHECK_OPS = {
    "soft_topkmask": PhiKind.IDENTITY,
    "soft_topkmag": PhiKind.HALF_SQUARE,
    "soft_signed_topkmask": PhiKind.ABSOLUTE,
}


def sample_gapped(rng, n: int, min_gap: float = 1e-2, magnitude_gaps: bool = False) -> np.ndarray:
    """Random vector whose sorted (or sorted-magnitude) gaps exceed min_gap."""
    for _ in range(1000):
        x = rng.standard_normal(n) * 2.0
        vals = np.abs(x) if magnitude_gaps else x
        if np.min(np.abs(np.diff(np.sort(vals)))) >= min_gap:
            return x
    raise RuntimeError("failed to sample a well-separated input")


def cmd_gradcheck(args, out_stream) -> int:
    rng = np.random.default_rng(args.seed)
    k = max(1, args.n // 4)
    if args.op == "topkmask":
        out_stream.write("topkmask is piecewise constant: Jacobian is "
                         "identically zero (informational)\n")
        return 0
    phi = _GRADCHECK_OPS.get(args.op)
    if phi is None:
        raise ValueError(f"unsupported op {args.op!r}")
    reg = Regularizer(p=args.p, lam=args.lam)
    spec = OperatorSpec.top_k(phi, reg, k)
    worst = 0.0
    for _ in range(args.trials):
        x = sample_gapped(rng, args.n, magnitude_gaps=phi.is_even)
        out = relaxed_apply(x, spec)
        analytic = np.stack(
            [jvp(x, spec, out, np.eye(args.n)[i]) for i in range(args.n)], axis=1)
        numeric = fd_jacobian(lambda z: relaxed_apply(z, spec).y, x, h=1e-6)
        err = np.max(np.abs(analytic - numeric)) / max(1.0, np.max(np.abs(numeric)))
        worst = max(worst, err)
    passed = worst <= 1e-4
    out_stream.write(f"op={args.op} n={args.n} trials={args.trials} "
                     f"p={args.p} lambda={args.lam} "
                     f"max_rel_error={worst:.3e} "
                     f"{'PASS' if passed else 'FAIL'}\n")
    return 0 if passed else 3


def cmd_bench(args, out_stream) -> int:
    rng = np.random.default_rng(args.seed)
    reg = Regularizer(p=args.p, lam=args.lam)
    solvers = args.solvers.split(",")
    writer = csv.writer(out_stream)
    writer.writerow(["n", "k", "solver", "median_seconds", "max_abs_diff_vs_pav"])
    for n in (int(v) for v in args.n_list.split(",")):
        k = max(1, int(np.ceil(n * args.k_ratio)))
        x = rng.standard_normal(n)
        spec = OperatorSpec.top_k(PhiKind.HALF_SQUARE, reg, k)
        reference = relaxed_apply(x, spec, "pav").y  # also warms the JIT
        for solver in solvers:
            times = []
            diff = 0.0
            for _ in range(args.repeats):
                t0 = time.perf_counter()
                if solver == "hard":
                    y = hard.topkmag(x, k)
                else:
                    y = relaxed_apply(x, spec, solver).y
                times.append(time.perf_counter() - t0)
                diff = float(np.max(np.abs(y - reference)))
            writer.writerow([n, k, solver, f"{float(np.median(times)):.17g}",
                             f"{diff:.17g}"])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="softtopk",
                                     description="Differentiable sparse top-k toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate newline-delimited JSON records")
    p_eval.add_argument("--input", default=None)
    p_eval.add_argument("--output", default=None)

    p_curve = sub.add_parser("curve", help="hard vs relaxed top-k mask sweep (CSV)")
    p_curve.add_argument("--k", type=int, default=2)
    p_curve.add_argument("--p", type=float, default=4.0 / 3.0)
    p_curve.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p_curve.add_argument("--phi", default="identity",
                         choices=[k.value for k in PhiKind])
    p_curve.add_argument("--grid-start", type=float, default=0.0)
    p_curve.add_argument("--grid-end", type=float, default=6.0)
    p_curve.add_argument("--grid-steps", type=int, default=601)
    p_curve.add_argument("--output", default=None)

    p_grad = sub.add_parser("gradcheck", help="Jacobian products vs finite differences")
    p_grad.add_argument("--op", default="soft_topkmag")
    p_grad.add_argument("--n", type=int, default=16)
    p_grad.add_argument("--trials", type=int, default=50)
    p_grad.add_argument("--p", type=float, default=2.0)
    p_grad.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p_grad.add_argument("--seed", type=int, default=0)
    p_grad.add_argument("--output", default=None)

    p_bench = sub.add_parser("bench", help="solver runtime comparison (CSV)")
    p_bench.add_argument("--n-list", default="1000,10000,100000")
    p_bench.add_argument("--k-ratio", type=float, default=0.1)
    p_bench.add_argument("--solvers", default="pav,dykstra,hard")
    p_bench.add_argument("--repeats", type=int, default=5)
    p_bench.add_argument("--p", type=float, default=2.0)
    p_bench.add_argument("--lambda", dest="lam", type=float, default=1e-2)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--output", default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"eval": cmd_eval, "curve": cmd_curve,
                "gradcheck": cmd_gradcheck, "bench": cmd_bench}
    out_stream = open(args.output, "w") if args.output else sys.stdout
    try:
        return handlers[args.command](args, out_stream)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        if args.output:
            out_stream.close()


def entry() -> None:  # console-script wrapper
    sys.exit(main())


if __name__ == "__main__":
    entry()
