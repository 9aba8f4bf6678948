"""Command-line front end.

Every subcommand builds a report (schema_version, command, config, rows) and
prints it as JSON (canonical), CSV (flat projection of the rows) or a human
table.  Exit codes: 0 success, 1 computation error or failed check, 2 usage.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence

import numpy as np

from . import bounds, canonical, dilated, gcdcore, poisson, selftest, spectral
from .gcdcore import IndexSet, IntegerSequence
from .multiindex import PrimeTable, default_table, factorize
from .weights import WeightSequence, kappa, load_weights, power_law

SCHEMA_VERSION = 1
WORKERS_ENV = "GCDLAB_WORKERS"
REPLAY_RTOL = 1e-12


def int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def count_list(text: str) -> list[int]:
    """Comma-separated integers, allowing forms like 1e6."""
    out = []
    for x in float_list(text):
        if not x.is_integer():
            raise argparse.ArgumentTypeError(f"expected whole numbers, got {x}")
        out.append(int(x))
    return out


def index_set_arg(text: str) -> IndexSet:
    """JSON list of {position: exponent} maps, e.g. '[{}, {"1": 1}]'."""
    try:
        return IndexSet.from_json(json.loads(text))
    except (ValueError, TypeError, AttributeError) as exc:
        raise argparse.ArgumentTypeError(f"bad index set: {exc}") from None


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def ordered_map(fn: Callable, items: Iterable, workers: int) -> list:
    """map() on a thread pool; results come back in input order."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(fn, items))


def table_for(values: Sequence[int]) -> PrimeTable:
    """A prime table large enough to index every prime factor of ``values``."""
    top = max(values)
    table = default_table()
    return table if top <= table.largest else PrimeTable.up_to(top)


def read_sequence(args) -> IntegerSequence:
    if args.seq_file:
        return gcdcore.load_sequence(args.seq_file)
    if args.seq is None:
        raise argparse.ArgumentTypeError("give --seq or --seq-file")
    return IntegerSequence.of(args.seq)


def read_weights(args) -> WeightSequence:
    if getattr(args, "weights_file", None):
        return load_weights(args.weights_file)
    return power_law(args.alpha)


def read_system(args) -> dilated.DilatedSystem:
    if args.system_file:
        return dilated.load_system(args.system_file)
    if args.seq is None:
        raise argparse.ArgumentTypeError("give --seq (and --coeffs) or --system-file")
    coeffs = args.coeffs if args.coeffs is not None else [1.0] * len(args.seq)
    return dilated.DilatedSystem.of(args.seq, coeffs)


def row_rng(seed: int, index: int) -> np.random.Generator:
    return selftest.stream(seed, index)


# subcommands: each returns a list of row dicts


def cmd_factorize(args) -> list[dict]:
    rows = []
    for n in args.n:
        beta = factorize(n, table_for([n]))
        rows.append({"n": n, "multi_index": repr(beta),
                     "exponents": {str(j): e for j, e in beta.items}})
    return rows


def cmd_gcdsum(args) -> list[dict]:
    seq = read_sequence(args)
    value = gcdcore.gcd_sum(seq, args.alpha, normalized=args.normalized)
    row = {"N": len(seq), "alpha": args.alpha, "normalized": args.normalized, "value": value}
    if args.check:
        table = table_for(seq.values)
        B = IndexSet.from_integers(seq.values, table)
        other = gcdcore.s_form(power_law(args.alpha, table), B, normalized=args.normalized)
        rel = abs(value - other) / abs(value)
        row.update({"s_form": other, "rel_err": rel, "tolerance": 1e-12, "check_passed": rel <= 1e-12})
    return [row]


def cmd_extremal(args) -> list[dict]:
    if args.kind == "squarefree":
        if args.r is None:
            raise argparse.ArgumentTypeError("--kind squarefree needs --r")
        seq = gcdcore.extremal_squarefree(args.r)
        closed = gcdcore.squarefree_closed_form(args.r, args.alpha)
    elif args.kind == "primes":
        if args.N is None:
            raise argparse.ArgumentTypeError("--kind primes needs --N")
        seq = gcdcore.extremal_primes(args.N)
        closed = None
    else:
        if args.N is None:
            raise argparse.ArgumentTypeError("--kind first needs --N")
        seq = gcdcore.first_integers(args.N)
        closed = None
    brute = gcdcore.gcd_sum(seq, args.alpha, normalized=False)
    N = len(seq)
    row = {"kind": args.kind, "N": N, "alpha": args.alpha, "brute": brute, "normalized": brute / N}
    if N <= 64:
        row["seq"] = list(seq.values)
    if closed is not None:
        rel = abs(brute - closed) / closed
        row.update({"closed_form": closed, "rel_err": rel, "tolerance": 1e-10,
                    "check_passed": rel <= 1e-10})
    if N >= 3 and 0 < args.alpha < 1:
        row["lower_shape"] = (bounds.primes_lower_shape(args.alpha, N) if args.kind == "primes"
                              else bounds.squarefree_lower_shape(args.alpha, N))
    return [row]


def cmd_reduce(args) -> list[dict]:
    if args.index_set is not None:
        B = args.index_set
    else:
        seq = read_sequence(args)
        B = IndexSet.from_integers(seq.values, table_for(seq.values))
    t = read_weights(args)
    out, t2 = canonical.canonical_reduce(B, t)
    k = kappa(t)
    before, after = gcdcore.s_form(t, B), gcdcore.s_form(t2, out)
    return [{
        "N": len(B), "kappa": k, "input": B.to_json(), "output": out.to_json(),
        "support_before": len(B.support()), "support_after": len(out.support()),
        "s_before": before, "s_after_eta": after,
        "kappa_canonical": canonical.is_kappa_canonical(out, k),
        "tolerance": 1e-12, "check_passed": after >= before - 1e-12,
    }]


def _spectral_row(M: spectral.GcdMatrix, t: WeightSequence | None, tol: float, method: str) -> dict:
    res = spectral.eig_extremes(M, tol, method)
    row = {"N": M.order, "lambda_min": res.lambda_min, "lambda_max": res.lambda_max,
           "iterations": res.iterations, "residual": res.residual, "method": res.method,
           "rayleigh_all_ones": spectral.rayleigh_all_ones(M)}
    if t is not None:
        lo, hi = spectral.sandwich_bounds(t, M.order)
        row.update({"sandwich_lo": lo, "sandwich_hi": hi,
                    "check_passed": lo - 1e-8 <= res.lambda_min and res.lambda_max <= hi + 1e-8,
                    "tolerance": 1e-8})
    return row


def cmd_spectral(args) -> list[dict]:
    if args.random:
        def one(i: int) -> dict:
            rng = row_rng(args.seed, i)
            N = int(rng.integers(1, args.max_n + 1))
            B = selftest.random_index_set(rng, N, args.dims, args.max_exp)
            t = selftest.random_weights(rng, max(N, args.dims), top=args.max_weight)
            return {"row": i, **_spectral_row(spectral.build_matrix(B, t), t, args.tol, args.method)}
        return ordered_map(one, range(args.random), args.workers)
    if args.index_set is not None:
        t = read_weights(args)
        return [_spectral_row(spectral.build_matrix(args.index_set, t), t, args.tol, args.method)]
    seq = read_sequence(args)
    M = spectral.build_gcd_matrix(seq, args.alpha)
    return [_spectral_row(M, None, args.tol, args.method)]


def cmd_verify_poisson(args) -> list[dict]:
    B = args.index_set
    t = read_weights(args)
    c = args.coeffs if args.coeffs is not None else [1.0] * len(B)
    chk = poisson.verify_identity(B, c, t, args.method, n_per_dim=args.n_per_dim,
                                  samples=args.samples, seed=args.seed, sampler=args.sampler)
    row = {"exact_form": chk.exact_form, "estimate": chk.estimate, "error_bound": chk.error_bound,
           "abs_error": chk.abs_error, "method": chk.method, **chk.details}
    if chk.method == "mc":
        row["tolerance"] = "4 standard errors"
        row["check_passed"] = chk.abs_error <= 4 * chk.error_bound
    else:
        row["tolerance"] = 1e-8
        row["check_passed"] = chk.abs_error <= 1e-8 * max(abs(chk.exact_form), 1e-300)
    return [row]


def cmd_bounds(args) -> list[dict]:
    params = bounds.BoundParams(xi=args.xi, C=args.C, c=args.c)
    grid = [(a, n) for a in args.alpha for n in args.N]

    def one(item) -> dict:
        a, n = item
        row = bounds.bounds_row(a, n, params)
        if args.th4:
            table = default_table() if n <= default_table().count else PrimeTable(n)
            t = power_law(a, table)
            row["th4_rhs"] = (bounds.th4_rhs(t, bounds.default_v(a, n, t, params), args.xi, args.C, n)
                              if 0.5 <= a < 1 else None)
        return row
    return ordered_map(one, grid, args.workers)


def cmd_resonance(args) -> list[dict]:
    value, err = dilated.resonance_sum_certified(args.v, args.w, args.J, args.s)
    return [{"v": args.v, "w": args.w, "J": args.J, "s": args.s, "value": value, "error_bound": err,
             "start": dilated.resonance_start(args.v, args.w, args.J)}]


def cmd_maximal(args) -> list[dict]:
    sys_ = read_system(args)
    row = {"N": len(sys_), "sawtooth_l2_sq": dilated.sawtooth_l2_sq(sys_)}
    if args.grid_points:
        row.update({"maximal_l2_sq": dilated.maximal_l2_sq_grid(sys_, args.grid_points),
                    "method": "grid", "grid_points": args.grid_points})
    else:
        row.update({"maximal_l2_sq": dilated.maximal_l2_sq(sys_, workers=args.workers),
                    "method": "exact"})
    row["check_passed"] = row["sawtooth_l2_sq"] <= row["maximal_l2_sq"] + 1e-12
    return [row]


def cmd_ch_ratio(args) -> list[dict]:
    if args.family:
        def one(N: int) -> dict:
            if args.family == "first":
                seq = list(range(1, N + 1))
            elif args.family == "powers2":
                seq = [2**k for k in range(N)]
            else:
                seq = list(gcdcore.extremal_primes(N).values)
            return dilated.ch_ratio(dilated.DilatedSystem.of(seq, [N**-0.5] * N))
        return ordered_map(one, args.N, args.workers)
    return [dilated.ch_ratio(read_system(args))]


def cmd_selftest(args) -> list[dict]:
    if args.from_report:
        return replay_report(args.from_report)
    return [r.as_row() for r in selftest.run_checks(args.seed)]


COMMANDS = {
    "factorize": cmd_factorize, "gcdsum": cmd_gcdsum, "extremal": cmd_extremal,
    "reduce": cmd_reduce, "spectral": cmd_spectral, "verify-poisson": cmd_verify_poisson,
    "bounds": cmd_bounds, "resonance": cmd_resonance, "maximal": cmd_maximal,
    "ch-ratio": cmd_ch_ratio, "selftest": cmd_selftest,
}


def _add_seq(p):
    p.add_argument("--seq", type=int_list, help="comma-separated positive integers")
    p.add_argument("--seq-file", help="file with one positive integer per line")


def _add_weights(p):
    p.add_argument("--alpha", type=float, default=1.0,
                   help="power-law weights t_j = p_j^-alpha (default 1)")
    p.add_argument("--weights-file", help="decreasing weights in (0,1), one per line")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gcdlab",
        description="GCD sums, GCD matrices and dilated sawtooth sums. "
                    "log is the natural logarithm and [x] is floor(x) throughout.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["json", "csv", "human"], default="json")
    common.add_argument("--seed", type=int, default=0, help="64-bit seed (always echoed)")
    common.add_argument("--workers", type=int, default=None,
                        help=f"worker threads (default: ${WORKERS_ENV} or 1)")
    common.add_argument("--timing", action="store_true", help="include wall-clock timing")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("factorize", parents=[common], help="multi-index of integers")
    p.add_argument("n", type=int, nargs="+")

    p = sub.add_parser("gcdsum", parents=[common], help="GCD sum of a sequence")
    _add_seq(p)
    p.add_argument("--alpha", type=float, required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--normalized", dest="normalized", action="store_true", default=True)
    g.add_argument("--total", dest="normalized", action="store_false")
    p.add_argument("--check", action="store_true", help="cross-check against the index-set form")

    p = sub.add_parser("extremal", parents=[common], help="extremal families")
    p.add_argument("--kind", choices=["squarefree", "primes", "first"], required=True)
    p.add_argument("--r", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--alpha", type=float, required=True)

    p = sub.add_parser("reduce", parents=[common], help="canonical reduction of an index set")
    p.add_argument("--index-set", type=index_set_arg)
    _add_seq(p)
    _add_weights(p)

    p = sub.add_parser("spectral", parents=[common], help="extreme eigenvalues of GCD matrices")
    p.add_argument("--index-set", type=index_set_arg)
    _add_seq(p)
    _add_weights(p)
    p.add_argument("--tol", type=float, default=spectral.DEFAULT_TOL)
    p.add_argument("--method", choices=["auto", "power"], default="auto")
    p.add_argument("--random", type=int, default=0, help="number of random instances")
    p.add_argument("--max-n", type=int, default=64)
    p.add_argument("--dims", type=int, default=6)
    p.add_argument("--max-exp", type=int, default=3)
    p.add_argument("--max-weight", type=float, default=0.9)

    p = sub.add_parser("verify-poisson", parents=[common], help="check the kernel identity")
    p.add_argument("--index-set", type=index_set_arg, required=True)
    p.add_argument("--coeffs", type=float_list)
    _add_weights(p)
    p.add_argument("--method", choices=["grid", "mc"], default="grid")
    p.add_argument("--n-per-dim", type=int)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--sampler", choices=["poisson", "uniform"], default="poisson")

    p = sub.add_parser("bounds", parents=[common], help="closed-form bound table (CSV-friendly)")
    p.add_argument("--alpha", type=float_list, required=True)
    p.add_argument("--N", type=count_list, required=True)
    p.add_argument("--xi", type=float, default=2.0)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--th4", action="store_true", help="add the product bound with default selector")

    p = sub.add_parser("resonance", parents=[common], help="resonance sum with error bound")
    p.add_argument("--v", type=int, required=True)
    p.add_argument("--w", type=int, required=True)
    p.add_argument("--J", type=int, default=0)
    p.add_argument("--s", type=float, default=1.0)

    for name in ("maximal", "ch-ratio"):
        p = sub.add_parser(name, parents=[common],
                           help="maximal partial-sum norm" if name == "maximal"
                           else "maximal norm against sum c^2 (log log N)^4")
        p.add_argument("--seq", type=int_list)
        p.add_argument("--coeffs", type=float_list)
        p.add_argument("--system-file", help="two columns per line: n_k c_k")
        if name == "maximal":
            p.add_argument("--grid-points", type=int, help="use the midpoint grid estimator")
        else:
            p.add_argument("--family", choices=["first", "powers2", "primes"])
            p.add_argument("--N", type=int_list, default=[8])

    p = sub.add_parser("selftest", parents=[common], help="run the invariant suite")
    p.add_argument("--from-report", help="re-run and validate a saved JSON report")
    return parser


def _config(args, argv: Sequence[str]) -> dict:
    skip = {"format", "timing", "workers", "command"}
    cfg = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        if isinstance(v, IndexSet):
            v = v.to_json()
        cfg[k] = v
    cfg["argv"] = _strip_format(argv)
    return cfg


def _strip_format(argv: Sequence[str]) -> list[str]:
    """argv without presentation-only flags, for replay."""
    out = []
    skip_next = False
    for a in argv:
        if skip_next:
            skip_next = False
            continue
        if a in ("--format", "--workers"):
            skip_next = True
            continue
        if a == "--timing" or a.startswith("--format=") or a.startswith("--workers="):
            continue
        out.append(a)
    return out


def _close(a, b) -> bool:
    if isinstance(a, float) and isinstance(b, float):
        if math.isnan(a) and math.isnan(b):
            return True
        return a == b or abs(a - b) <= REPLAY_RTOL * max(abs(a), abs(b))
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(_close(a[k], b[k]) for k in a)
    if isinstance(a, list) and isinstance(b, list):
        return len(a) == len(b) and all(_close(x, y) for x, y in zip(a, b))
    return a == b


def replay_report(path: str) -> list[dict]:
    """Parse a saved JSON report, re-run its command and compare every row."""
    with open(path) as fh:
        report = json.load(fh)
    for key in ("schema_version", "command", "config", "rows"):
        if key not in report:
            raise ValueError(f"report lacks {key!r}")
    if report["schema_version"] != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {report['schema_version']}")
    argv = report["config"]["argv"]
    if argv and argv[0] == "selftest" and "--from-report" in argv:
        raise ValueError("refusing to replay a replay report")
    args = build_parser().parse_args(argv)
    args.workers = args.workers or default_workers()
    fresh = json.loads(json.dumps(COMMANDS[args.command](args), default=_plain))
    rows = []
    for i, old in enumerate(report["rows"]):
        ok = i < len(fresh) and _close(old, fresh[i])
        rows.append({"check": f"row {i}", "passed": ok,
                     "detail": "matches" if ok else "differs from re-run",
                     "tolerance": REPLAY_RTOL})
    if len(fresh) != len(report["rows"]):
        rows.append({"check": "row count", "passed": False,
                     "detail": f"{len(report['rows'])} saved vs {len(fresh)} re-run",
                     "tolerance": 0.0})
    for i, old in enumerate(report["rows"]):
        if old.get("check_passed") is False or old.get("passed") is False:
            rows.append({"check": f"row {i} status", "passed": False,
                         "detail": "saved row records a failed check", "tolerance": 0.0})
    return rows


def _plain(v):
    """json default hook for numpy scalars."""
    if isinstance(v, np.generic):
        return v.item()
    raise TypeError(f"{type(v).__name__} is not JSON serializable")


def _flat(v):
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True, default=_plain)
    return v


def render(report: dict, fmt: str) -> str:
    rows = report["rows"]
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True, default=_plain) + "\n"
    cols: list[str] = []
    for r in rows:
        cols += [k for k in r if k not in cols]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _flat(r.get(k, "")) for k in cols})
        return buf.getvalue()
    lines = [f"{report['command']} (seed {report['config']['seed']})"]
    for r in rows:
        lines.append("  " + "  ".join(f"{k}={_flat(v)}" for k, v in r.items()))
    if "timing" in report:
        lines.append(f"  elapsed {report['timing']['seconds']:.3f} s")
    return "\n".join(lines) + "\n"


def run(argv: Sequence[str] | None = None, out=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.workers is None:
        args.workers = default_workers()
    if not 0 <= args.seed < 2**64:
        print("error: seed must be a 64-bit unsigned integer", file=sys.stderr)
        return 2
    start = time.perf_counter()
    try:
        rows = COMMANDS[args.command](args)
    except argparse.ArgumentTypeError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    report = {"schema_version": SCHEMA_VERSION, "command": args.command,
              "config": _config(args, argv), "rows": rows}
    if args.timing:
        report["timing"] = {"seconds": time.perf_counter() - start}
    out.write(render(report, args.format))
    failed = any(r.get("check_passed") is False or r.get("passed") is False for r in rows)
    return 1 if failed else 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
