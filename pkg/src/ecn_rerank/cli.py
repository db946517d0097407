"""Command-line pipeline driver.

Subcommands cover the whole workflow: synth -> distance/rerank -> eval,
plus a bench mode that times re-ranking on synthetic unions of growing
size. Machine-readable results go only to --out paths; stdout carries a
short human summary, and every failure exits with a distinct code.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
import time

import numpy as np

from . import errors, evaluation, fileio
from .core import EcnParams, Method
from .distance import pairwise_cosine, pairwise_sq_euclidean
from .ecn import rerank
from .synth import generate_clusters

_ERROR_CLASSES = [
    errors.EmptyMatrixError,
    errors.ShapeMismatchError,
    errors.NonFiniteError,
    errors.ZeroNormRowError,
    errors.ParamsTooLargeError,
    errors.DegenerateSimilarityError,
    errors.IndexOutOfRangeError,
    errors.BadMagicError,
    errors.UnsupportedVersionError,
    errors.TruncatedFileError,
    errors.DuplicateIndexError,
    errors.UnknownRoleError,
    errors.IndexGapError,
    errors.NoValidQueriesError,
    errors.BadParamsError,
    errors.TooLargeForOracleError,
]


def _exit_code_epilog() -> str:
    lines = ["exit codes:", "  0   success", "  1   unexpected error", "  2   bad command line"]
    for cls in sorted(_ERROR_CLASSES, key=lambda c: c.exit_code):
        doc = (cls.__doc__ or "").strip().rstrip(".")
        lines.append(f"  {cls.exit_code:<3} {cls.__name__}: {doc}")
    return "\n".join(lines)


def _parse_int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def cmd_distance(args: argparse.Namespace) -> int:
    features = fileio.read_features(args.features)
    metric = pairwise_sq_euclidean if args.metric == "sqeuclidean" else pairwise_cosine
    started = time.monotonic()
    d = metric(features)
    fileio.write_distance(d, args.out)
    print(
        f"wrote {d.shape[0]}x{d.shape[1]} {args.metric} distance matrix "
        f"to {args.out} ({time.monotonic() - started:.2f}s)"
    )
    return 0


def cmd_rerank(args: argparse.Namespace) -> int:
    records = fileio.read_metadata(args.meta)
    params = EcnParams(t=args.t, q=args.q, k=args.k, method=Method(args.method))
    kwargs = {}
    if args.features is not None:
        kwargs["features"] = fileio.read_features(args.features)
    if args.distances is not None:
        kwargs["distances"] = fileio.read_distance(args.distances)
    started = time.monotonic()
    out = rerank(records, params, threads=args.threads, **kwargs)
    elapsed = time.monotonic() - started
    fileio.write_distance(out, args.out)
    print(
        f"wrote {out.shape[0]}x{out.shape[1]} re-ranked distances to {args.out} "
        f"(method={params.method.value}, t={params.t}, q={params.q}, k={params.k}, "
        f"{elapsed:.2f}s)"
    )
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    dist = fileio.read_distance(args.distances)
    records = fileio.read_metadata(args.meta)
    report = evaluation.evaluate(
        dist,
        records,
        ranks=args.ranks,
        params={"distances": str(args.distances), "meta": str(args.meta), "ranks": args.ranks},
    )
    evaluation.write_report(report, args.out)
    cmc_text = " | ".join(f"R-{k} {report.cmc[k]:.4f}" for k in sorted(report.cmc))
    print(f"mAP {report.map:.4f} | {cmc_text}")
    print(
        f"{report.num_queries} queries evaluated, {report.skipped_queries} skipped; "
        f"report written to {args.out}"
    )
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    features, records = generate_clusters(
        seed=args.seed,
        n_ids=args.ids,
        imgs_per_id=args.imgs,
        dim=args.dim,
        intra_std=args.intra,
        inter_std=args.inter,
        n_cameras=args.cams,
    )
    feat_path, meta_path = fileio.default_paths(args.out_prefix)
    fileio.write_features(features, feat_path)
    fileio.write_metadata(records, meta_path)
    print(
        f"wrote {features.shape[0]} items ({args.ids} ids x {args.imgs} images, "
        f"dim {args.dim}) to {feat_path} and {meta_path}"
    )
    return 0


def bench_timings(
    sizes: list[int],
    method: Method,
    t: int,
    q: int,
    k: int,
    dim: int,
    seed: int,
    threads: int,
    repeats: int,
) -> list[float]:
    """Median-of-`repeats` wall time per union size for the full
    pipeline, pairwise distances included."""
    imgs_per_id = 4
    params = EcnParams(t=t, q=q, k=k, method=method)
    timings = []
    for size in sizes:
        n_ids = max(1, size // imgs_per_id)
        features, records = generate_clusters(
            seed=seed,
            n_ids=n_ids,
            imgs_per_id=imgs_per_id,
            dim=dim,
            intra_std=0.6,
            inter_std=1.0,
            n_cameras=4,
        )
        samples = []
        for _ in range(repeats):
            started = time.monotonic()
            rerank(records, params, features=features, threads=threads)
            samples.append(time.monotonic() - started)
        timings.append(float(statistics.median(samples)))
    return timings


def cmd_bench(args: argparse.Namespace) -> int:
    method = Method(args.method)
    timings = bench_timings(
        sizes=args.sizes,
        method=method,
        t=args.t,
        q=args.q,
        k=args.k,
        dim=args.dim,
        seed=args.seed,
        threads=args.threads,
        repeats=args.repeats,
    )
    print(f"method={method.value} t={args.t} q={args.q} k={args.k} dim={args.dim}")
    print(f"{'n_items':>10} {'seconds':>10} {'ratio':>8}")
    for i, (size, secs) in enumerate(zip(args.sizes, timings)):
        ratio = f"{timings[i] / timings[i - 1]:.2f}" if i > 0 else "-"
        print(f"{size:>10} {secs:>10.3f} {ratio:>8}")
    if args.out:
        payload = {
            "sizes": args.sizes,
            "seconds": timings,
            "method": method.value,
            "params": {"t": args.t, "q": args.q, "k": args.k, "dim": args.dim,
                       "seed": args.seed, "threads": args.threads, "repeats": args.repeats},
        }
        with open(args.out, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2)
            f.write("\n")
        print(f"timings written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ecn-rerank",
        description="Expanded-cross-neighborhood re-ranking and CMC/mAP evaluation.",
        epilog=_exit_code_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("distance", help="compute a pairwise distance matrix from features")
    p.add_argument("--features", required=True)
    p.add_argument("--metric", choices=["sqeuclidean", "cosine"], default="sqeuclidean")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("rerank", help="re-rank distances over a query/gallery union")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--features", help="feature file; distances computed internally")
    src.add_argument("--distances", help="precomputed square union distance matrix")
    p.add_argument("--meta", required=True)
    p.add_argument(
        "--method",
        choices=[m.value for m in Method],
        default=Method.ECN_RANK.value,
    )
    p.add_argument("--t", type=int, default=3)
    p.add_argument("--q", type=int, default=8)
    p.add_argument("--k", type=int, default=25)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_rerank)

    p = sub.add_parser("eval", help="score query x gallery distances with CMC and mAP")
    p.add_argument("--distances", required=True)
    p.add_argument("--meta", required=True)
    p.add_argument("--ranks", type=_parse_int_list, default=[1, 5, 10, 50])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate a synthetic clustered dataset")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--ids", type=int, required=True)
    p.add_argument("--imgs", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--intra", type=float, required=True)
    p.add_argument("--inter", type=float, required=True)
    p.add_argument("--cams", type=int, required=True)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="time re-ranking on synthetic unions of growing size")
    p.add_argument("--sizes", type=_parse_int_list, default=[2000, 4000, 8000])
    p.add_argument(
        "--method",
        choices=[m.value for m in Method if m is not Method.NONE],
        default=Method.ECN_RANK.value,
    )
    p.add_argument("--t", type=int, default=3)
    p.add_argument("--q", type=int, default=8)
    p.add_argument("--k", type=int, default=25)
    p.add_argument("--dim", type=int, default=1024, help="feature width; default mirrors CNN embedding sizes")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--threads", type=int, default=2)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except errors.ToolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
