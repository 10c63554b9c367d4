"""Command-line entry point: ``csauc {eval,oracle,gen,bench}``."""

from __future__ import annotations

import argparse
import json
import sys

from .bench import bench_scaling, write_rows
from .bucketing import DEFAULT_PCPM_BUCKETS, BidBuckets
from .errors import CsaucError, EmptyInput, InputTooLarge, InvalidParameter
from .evaluate import EvalConfig, evaluate_file, parse_metrics
from .grouping import GroupWeight
from .ingest import InputSpec, SampleStream
from .metrics import copc, ropr
from .model import TiePolicy
from .oracle import ORACLE_CAP, auc_pairwise, csauc_exact
from .synth import BidDistribution, GenConfig, write_csv


INPUT_FORMATS = ("csv", "tsv", "jsonl")
REPORT_FORMATS = ("json", "text")


def _formats(args):
    """Split the repeatable --format flag into (input format, report format)."""
    inp = [f for f in args.format if f in INPUT_FORMATS]
    rep = [f for f in args.format if f in REPORT_FORMATS]
    if len(inp) > 1 or len(rep) > 1:
        raise InvalidParameter(f"conflicting --format values {args.format}")
    return (inp[0] if inp else None), (rep[0] if rep else getattr(args, "report", None) or "json")


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_input_flags(p):
    p.add_argument("--input", required=True, help="input file, or - for standard input")
    p.add_argument(
        "--format",
        action="append",
        choices=INPUT_FORMATS + REPORT_FORMATS,
        default=[],
        help="input format (csv|tsv|jsonl, default from extension) and/or report format (json|text); repeatable",
    )
    p.add_argument("--no-header", action="store_true", help="delimited input has no header row")
    p.add_argument("--group-key", default=None, help="group column name (or index without header); default 'group'")
    p.add_argument("--strict", action="store_true", help="fail on the first malformed row")
    p.add_argument("--tie-policy", choices=("half", "full"), default="half")
    p.add_argument("--precision", type=int, default=6, help="decimal places in the report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="csauc", description="Revenue-aware offline evaluation of CTR predictions.")
    sub = parser.add_subparsers(dest="command", required=True)

    ev = sub.add_parser("eval", help="compute metrics over a prediction log")
    _add_input_flags(ev)
    ev.add_argument("--metrics", default="auc,csauc,copc,ropr", help="comma list of auc,csauc,gcsauc,gauc,copc,ropr")
    ev.add_argument("--group-weight", choices=("rewardmax", "count", "uniform"), default=None)
    ev.add_argument("--min-group-size", type=int, default=2)
    ev.add_argument("--pcpm-buckets", type=int, default=DEFAULT_PCPM_BUCKETS)
    ev.add_argument("--bid-buckets", default="exact", help="exact | width:W | quantile:K")
    ev.add_argument("--per-group", action="store_true", help="include the per-group breakdown")
    ev.add_argument("--compensated", action="store_true", help="compensated summation in the sweep")
    ev.add_argument("--report", choices=REPORT_FORMATS, default=None, help="report format; same as --format json|text")

    orc = sub.add_parser("oracle", help="brute-force pairwise csAUC/AUC for small inputs")
    _add_input_flags(orc)
    orc.add_argument("--metrics", default="csauc", help="comma list of csauc,auc,copc,ropr")
    orc.add_argument("--force", action="store_true", help=f"allow more than {ORACLE_CAP} samples")

    gen = sub.add_parser("gen", help="write a synthetic prediction log as CSV")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--campaigns", type=int, default=50)
    gen.add_argument("--bid-dist", default="int:20", help="int:K | choice:a,b,... | uniform:lo,hi | lognormal:mu,sigma")
    gen.add_argument("--noise", type=float, default=0.5)
    gen.add_argument("--ctr-mean", type=float, default=0.05)
    gen.add_argument("--group-size", type=int, default=0, help="emit a group column with this many rows per group")
    gen.add_argument("--output", default="-")

    b = sub.add_parser("bench", help="time the bucketed sweep against the pair oracle")
    b.add_argument("--sizes", type=_int_list, default=[1_000, 10_000, 100_000])
    b.add_argument("--levels", type=_int_list, default=[10, 100])
    b.add_argument("--buckets", type=_int_list, default=[1_001, 100_001])
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--repeats", type=int, default=5)
    b.add_argument("--oracle-cap", type=int, default=5_000)
    b.add_argument("--backend", choices=("both", "numba", "numpy"), default="both")
    b.add_argument("--output", default="-")
    return parser


def _spec(args, use_group) -> InputSpec:
    cmap = {}
    if args.group_key is not None:
        cmap["group"] = args.group_key
    return InputSpec(
        args.input,
        format=_formats(args)[0],
        has_header=not args.no_header,
        column_map=cmap,
        use_group=use_group,
        strict=args.strict,
    )


def cmd_eval(args) -> int:
    cfg = EvalConfig(
        metrics=parse_metrics(args.metrics),
        tie_policy=TiePolicy.parse(args.tie_policy),
        pcpm_buckets=args.pcpm_buckets,
        bid_buckets=BidBuckets.parse(args.bid_buckets),
        group_weight=GroupWeight.parse(args.group_weight) if args.group_weight else None,
        min_group_size=args.min_group_size,
        per_group=args.per_group,
        compensated=args.compensated,
    )
    if args.pcpm_buckets < 1:
        raise InvalidParameter("--pcpm-buckets must be positive")
    report = evaluate_file(_spec(args, cfg.needs_groups), cfg)
    text = report.to_text(args.precision) if _formats(args)[1] == "text" else report.to_json(args.precision)
    sys.stdout.write(text + "\n")
    return 0


def cmd_oracle(args) -> int:
    metrics = parse_metrics(args.metrics)
    bad = [m for m in metrics if m in ("gcsauc", "gauc")]
    if bad:
        raise InvalidParameter(f"oracle does not support {bad}")
    stream = SampleStream(_spec(args, False))
    batch = stream.read_all()
    if len(batch) == 0:
        raise EmptyInput("no valid samples in input")
    if len(batch) > ORACLE_CAP and not args.force:
        raise InputTooLarge(f"{len(batch)} samples exceed the oracle cap of {ORACLE_CAP}; pass --force")
    p = args.precision
    parts = []
    tie = TiePolicy.parse(args.tie_policy)
    if "auc" in metrics:
        parts.append(f'"auc": {auc_pairwise(batch, force=True):.{p}f}')
    if "csauc" in metrics:
        res = csauc_exact(batch, tie, force=True)
        parts += [
            f'"csauc": {res.csauc:.{p}f}',
            f'"reward_rank": {res.reward_rank:.{p}f}',
            f'"reward_max": {res.reward_max:.{p}f}',
            f'"n_pairs": {res.n_pairs}',
        ]
    if "copc" in metrics:
        parts.append(f'"copc": {copc(batch):.{p}f}')
    if "ropr" in metrics:
        parts.append(f'"ropr": {ropr(batch):.{p}f}')
    parts.append(f'"n_samples": {len(batch)}')
    sys.stdout.write("{" + ", ".join(parts) + "}\n")
    return 0


def cmd_gen(args) -> int:
    cfg = GenConfig(
        n=args.n,
        seed=args.seed,
        campaigns=args.campaigns,
        bid_dist=BidDistribution.parse(args.bid_dist),
        noise=args.noise,
        ctr_mean=args.ctr_mean,
        group_size=args.group_size,
    )
    if args.output == "-":
        write_csv(cfg, sys.stdout)
    else:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            write_csv(cfg, fh)
    return 0


def cmd_bench(args) -> int:
    backends = None if args.backend == "both" else [args.backend]
    rows = bench_scaling(
        args.sizes, args.levels, args.buckets, args.seed, args.repeats, args.oracle_cap, backends
    )
    if args.output == "-":
        write_rows(rows, sys.stdout)
    else:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            write_rows(rows, fh)
    return 0


COMMANDS = {"eval": cmd_eval, "oracle": cmd_oracle, "gen": cmd_gen, "bench": cmd_bench}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CsaucError as exc:
        sys.stderr.write(json.dumps({"error": exc.code, "message": str(exc)}) + "\n")
        return 2
    except BrokenPipeError:
        return 1


if __name__ == "__main__":
    sys.exit(main())
