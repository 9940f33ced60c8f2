"""Command-line front end: ``yuleperc {predict,simulate,verify,sweep,oracle}``.

Exit codes: 0 success, 1 domain error or failed verification, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import inspect
import io
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, analytics, oracle, stats, verify


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# Manifest and output helpers
# --------------------------------------------------------------------------


def manifest(command: str, args: argparse.Namespace, outputs: list[str]) -> dict:
    params = {k: v for k, v in vars(args).items() if k not in ("func", "command")}
    return {
        "command": command,
        "parameters": params,
        "version": __version__,
        "master_seed": getattr(args, "seed", None),
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "outputs": outputs,
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def emit_json(doc: dict, out: str | None) -> None:
    text = json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def emit_csv(header: list[str], rows: list[list], out: str | None, doc_manifest: dict) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    writer.writerows(rows)
    if out:
        Path(out).write_text(buf.getvalue(), encoding="utf-8", newline="")
        emit_json(doc_manifest, out + ".manifest.json")
    else:
        sys.stdout.write(buf.getvalue())


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


# --------------------------------------------------------------------------
# Regime flags
# --------------------------------------------------------------------------


def add_regime_args(parser: argparse.ArgumentParser, required: bool = False) -> None:
    g = parser.add_argument_group("mutation schedule")
    g.add_argument(
        "--regime",
        choices=("bounded", "critical", "intermediate", "explicit"),
        required=required,
        help="schedule for p_n",
    )
    g.add_argument("--ell", "--top-size", dest="ell", type=int, help="bounded regime: p_n = a n^(-1/ell)")
    g.add_argument("--a", "--rate-constant", dest="a", type=float, help="bounded/critical regime constant")
    g.add_argument("--schedule", choices=("loglog", "power"), default="loglog")
    g.add_argument("--gamma", type=float, help="power schedule exponent, p_n = n^-gamma")
    g.add_argument("--p", "--retention", dest="p", type=float, help="explicit p; overrides the schedule")
    g.add_argument("--lambda", "--lam", dest="lam", type=float, default=1.0, help="target intensity")
    g.add_argument("--b", "--frac", dest="b", type=float, help="critical regime fractional part")


def build_regime(args: argparse.Namespace) -> analytics.Regime:
    kind = args.regime
    if kind is None:
        if args.p is None:
            raise UsageError("give --regime or --p")
        return analytics.Explicit(args.p)
    if kind == "bounded":
        if args.ell is None or args.a is None:
            raise UsageError("bounded regime needs --ell and --a")
        return analytics.Bounded(args.ell, args.a)
    if kind == "critical":
        if args.a is None:
            raise UsageError("critical regime needs --a")
        return analytics.Critical(args.a)
    if kind == "intermediate":
        return analytics.Intermediate(args.schedule, args.gamma)
    if args.p is None:
        raise UsageError("explicit regime needs --p")
    return analytics.Explicit(args.p)


def prediction_for(args: argparse.Namespace, regime: analytics.Regime, n: int) -> analytics.Prediction:
    b = args.b
    if isinstance(regime, analytics.Critical) and b is None:
        y = analytics.threshold_y(n, regime.a, args.lam)
        b = y - math.floor(y)
    return analytics.predict(
        regime, n, args.lam, b, x=getattr(args, "x", None), k=getattr(args, "k", None),
        p=None if isinstance(regime, analytics.Explicit) else args.p,
    )


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


def cmd_predict(args: argparse.Namespace) -> int:
    regime = build_regime(args)
    pred = prediction_for(args, regime, args.n)
    result = pred.to_dict()
    outputs = [args.out] if args.out else []
    if args.format == "csv":
        header = list(result)
        emit_csv(header, [[_fmt(result[h]) for h in header]], args.out, manifest("predict", args, outputs))
    else:
        emit_json({"manifest": manifest("predict", args, outputs), "kind": "predict", "result": result}, args.out)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.regime is None and args.p is None and args.stat == "tau":
        # the clock does not depend on the mutation schedule
        regime = analytics.Explicit(0.0)
    else:
        regime = build_regime(args)
    if args.p is not None and not isinstance(regime, analytics.Explicit):
        regime = analytics.Explicit(args.p)
    config = stats.McConfig(
        n=args.n,
        regime=regime,
        statistic=args.stat,
        replicates=args.reps,
        master_seed=args.seed,
        threads=args.threads,
        poisson=args.poisson,
        oracle=args.oracle,
        ks=args.ks,
        gumbel_mu=args.gumbel_mu,
    )
    report = stats.run_mc(config)
    outputs = [o for o in (args.out, args.replicates_csv) if o]
    man = manifest("simulate", args, outputs)
    if args.replicates_csv:
        integral = stats.parse_statistic(args.stat)[0] != "tau"
        rows = [[i, int(v) if integral else repr(float(v))] for i, v in enumerate(report.values)]
        emit_csv(["replicate", "statistic_value"], rows, args.replicates_csv, man)
    emit_json({"manifest": man, "kind": "simulate", "result": report.to_dict()}, args.out)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    fn = verify.SCENARIOS[args.scenario]
    kwargs = {}
    overrides = {
        "n": args.n, "p": args.p, "ell": args.ell, "a": args.a, "x": args.x,
        "lam": args.lam, "reps": args.reps, "seed": args.seed, "threads": args.threads,
    }
    accepted = inspect.signature(fn).parameters
    for key, value in overrides.items():
        if value is not None and key in accepted:
            kwargs[key] = value
    checks = fn(**kwargs)
    width = max(len(c.name) for c in checks)
    for c in checks:
        mark = "PASS" if c.passed else "FAIL"
        extra = f"  ({c.detail})" if c.detail else ""
        print(f"{mark}  {c.name:<{width}}  value={c.value:.6g}  bound={c.bound:.6g}{extra}")
    ok = all(c.passed for c in checks)
    print(f"{args.scenario}: {'all checks passed' if ok else 'FAILED'}")
    if args.json:
        doc = {
            "manifest": manifest("verify", args, [args.json]),
            "kind": "verify",
            "result": {"scenario": args.scenario, "passed": ok, "checks": [c.to_dict() for c in checks]},
        }
        emit_json(doc, args.json)
    return 0 if ok else 1


def parse_grid(spec: str) -> list[int]:
    """``log:1e3:1e6:4`` (geometric), ``lin:lo:hi:count`` or ``list:1000,5000``."""
    kind, _, rest = spec.partition(":")
    try:
        if kind == "list":
            grid = [int(float(v)) for v in rest.split(",") if v.strip()]
        elif kind in ("log", "lin"):
            lo, hi, count = rest.split(":")
            lo_f, hi_f, cnt = float(lo), float(hi), int(count)
            pts = np.geomspace(lo_f, hi_f, cnt) if kind == "log" else np.linspace(lo_f, hi_f, cnt)
            grid = [int(round(v)) for v in pts]
        else:
            raise UsageError(f"unknown grid kind {kind!r}")
    except ValueError as exc:
        raise UsageError(f"bad grid {spec!r}: {exc}") from exc
    if not grid:
        raise UsageError("empty grid")
    return grid


def cmd_sweep(args: argparse.Namespace) -> int:
    grid = parse_grid(args.grid)
    regime = build_regime(args)
    rows, means, ses = [], [], []
    for n in grid:
        pred = prediction_for(args, regime, n)
        stat = args.stat or f"exceed:{pred.threshold}"
        vals = stats.simulate_many(n, pred.p, [stat], args.reps, args.seed, args.threads)[stat]
        pmf = oracle.ExactPmf.from_samples(vals)
        tv = stats.tv_distance(pmf, stats.poisson_law(pred.intensity)) if pred.intensity > 0 else None
        mean = float(vals.mean())
        se = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
        means.append(mean)
        ses.append(se)
        rows.append([n, repr(pred.p), pred.threshold, repr(pred.intensity), stat, repr(mean), repr(se), _fmt(tv)])
    header = ["n", "p", "threshold", "intensity", "statistic", "empirical_mean", "std_error", "tv_poisson"]
    outputs = [args.out] if args.out else []
    emit_csv(header, rows, args.out, manifest("sweep", args, outputs))
    if len(grid) >= 3:
        trend = stats.divergence_check(means, stderrs=ses)
        print(f"increasing trend: {trend}", file=sys.stderr)
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    if args.what == "partitions":
        dist = oracle.partition_distribution(args.n, args.p)
        result = {"partitions": [{"parts": list(k), "weight": w} for k, w in sorted(dist.items(), reverse=True)]}
    elif args.what == "count":
        if args.x is None:
            raise UsageError("oracle count needs --x")
        pmf = oracle.exact_count_pmf(args.n, args.p, args.x)
        result = {"x": args.x, "pmf": {str(k): q for k, q in pmf.as_dict().items()}, "mean": pmf.mean()}
    else:
        pmf = oracle.root_cluster_pmf(args.n, args.p)
        result = {
            "pmf": {str(k): q for k, q in pmf.as_dict().items()},
            "mean": pmf.mean(),
            "closed_form_mean": analytics.ancestral_mean(args.n, args.p),
        }
    result.update({"n": args.n, "p": args.p, "what": args.what})
    emit_json({"manifest": manifest("oracle", args, [args.out] if args.out else []), "kind": "oracle", "result": result}, args.out)
    return 0


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="yuleperc",
        description="Largest clusters of Yule processes with mutations / percolation on random recursive trees.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", help="threshold, intensity and mean bounds for a regime")
    add_regime_args(p, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--x", type=int, help="threshold (required for --regime explicit)")
    p.add_argument("--k", type=int, help="override the k_n of the mean bounds")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="write to file instead of stdout")
    p.set_defaults(func=cmd_predict)

    s = sub.add_parser("simulate", help="Monte Carlo report for one statistic")
    add_regime_args(s)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--stat", default="largest", help="exceed:X | equal:L | largest | root | tau")
    s.add_argument("--reps", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--threads", type=int, default=stats.default_threads())
    s.add_argument("--poisson", type=float, help="report TV distance to Poisson(mean)")
    s.add_argument("--oracle", action="store_true", help="report TV distance to the exact law")
    s.add_argument("--ks", choices=("exp", "gumbel"), help="report KS distance to a reference law")
    s.add_argument("--gumbel-mu", type=float, default=0.0)
    s.add_argument("--out", help="report.json path (default stdout)")
    s.add_argument("--replicates-csv", help="per-replicate CSV path")
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="run a named verification scenario")
    v.add_argument("scenario", choices=sorted(verify.SCENARIOS))
    v.add_argument("--n", type=int)
    v.add_argument("--p", type=float)
    v.add_argument("--ell", type=int)
    v.add_argument("--a", type=float)
    v.add_argument("--x", type=int)
    v.add_argument("--lambda", dest="lam", type=float)
    v.add_argument("--reps", type=int)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--threads", type=int, default=stats.default_threads())
    v.add_argument("--json", help="also write the check table as JSON")
    v.set_defaults(func=cmd_verify)

    w = sub.add_parser("sweep", help="grid of predictions and simulations as CSV")
    add_regime_args(w)
    w.add_argument("--grid", required=True, help="log:LO:HI:COUNT | lin:LO:HI:COUNT | list:N1,N2,...")
    w.add_argument("--stat", help="statistic per grid point (default exceed:<threshold>)")
    w.add_argument("--x", type=int, help="threshold for --regime explicit")
    w.add_argument("--k", type=int)
    w.add_argument("--reps", type=int, default=10_000)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--threads", type=int, default=stats.default_threads())
    w.add_argument("--out", help="sweep.csv path (default stdout)")
    w.set_defaults(func=cmd_sweep)

    o = sub.add_parser("oracle", help="exact small-n laws")
    o.add_argument("what", choices=("partitions", "count", "root"))
    o.add_argument("--n", type=int, required=True)
    o.add_argument("--p", type=float, required=True)
    o.add_argument("--x", type=int)
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"yuleperc {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"yuleperc {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
