"""Command-line entry point.

Subcommands: synth (generate the synthetic preference dataset), graph
(build and export an information graph), featmap (export feature maps),
gram (compute a Gram matrix with phase timings), classify (run the
classification experiment grid), bench (empirical time complexity over a
sample-size grid).

Every run writes a ``config.json`` echo next to its outputs so any file
can be reproduced from flags alone.  Exit codes: 0 success, 2 usage,
3 input data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import classify as _classify
from . import datasets, kernels
from .rankings import ExtensionBudgetError, ParseError
from .submodular import CutFunction, build_graph, save_edge_list

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

CENSOR_KINDS = ("full", "topk", "exhaustive_interleave", "interleave")

# fixed sub-stream id for the dummy classifier's coin flips
DUMMY_STREAM = 0xD0


def _echo_config(out_dir: Path, args: argparse.Namespace) -> None:
    config = {k: v for k, v in vars(args).items() if k != "func"}
    for k, v in config.items():
        if isinstance(v, Path):
            config[k] = str(v)
    with open(out_dir / "config.json", "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_inputs(args):
    rankings, n = datasets.load_rankings(args.rankings)
    features = datasets.load_features_csv(args.features)
    if features.shape[0] != n:
        raise ValueError(
            f"{args.features}: {features.shape[0]} objects but rankings declare n={n}"
        )
    graph = build_graph(features, args.lengthscale, args.keep_fraction)
    return rankings, CutFunction(graph)


def cmd_synth(args) -> int:
    out = _out_dir(args)
    size = args.size
    if args.kind != "full" and size is None:
        raise ValueError(f"--kind {args.kind} needs --size")
    dataset = datasets.generate_dataset(args.m, args.sigma, args.kind, size, args.seed)
    datasets.save_rankings(out / "rankings.txt", dataset.rankings, dataset.rankings[0].n)
    datasets.save_labels(out / "labels.csv", dataset.labels)
    datasets.save_features_csv(out / "features.csv", datasets.FOOD_FEATURES)
    _echo_config(out, args)
    print(f"wrote {len(dataset)} rankings to {out}")
    return 0


def cmd_graph(args) -> int:
    out = _out_dir(args)
    features = datasets.load_features_csv(args.features)
    graph = build_graph(features, args.lengthscale, args.keep_fraction)
    save_edge_list(out / "graph.txt", graph)
    _echo_config(out, args)
    print(
        f"graph over {graph.n} objects, {graph.num_edges} edges, "
        f"lengthscale {graph.lengthscale:.6g}"
    )
    return 0


def cmd_featmap(args) -> int:
    out = _out_dir(args)
    rankings, cut = _load_inputs(args)
    maps = kernels.compute_feature_maps(
        cut, rankings, args.mode, args.samples, args.seed, args.budget, args.threads
    )
    with open(out / "featmaps.csv", "w", encoding="utf-8") as fh:
        for row in maps:
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")
    _echo_config(out, args)
    print(f"wrote {maps.shape[0]} feature maps of dimension {maps.shape[1]}")
    return 0


def cmd_gram(args) -> int:
    out = _out_dir(args)
    rankings, cut = _load_inputs(args)
    timings: list[tuple[str, float]] = []
    if args.kernel == "submodular":
        t0 = time.perf_counter()
        maps = kernels.compute_feature_maps(
            cut, rankings, args.mode, args.samples, args.seed, args.budget, args.threads
        )
        t1 = time.perf_counter()
        values = kernels.gram_from_feature_maps(maps)
        t2 = time.perf_counter()
        gram = kernels.GramMatrix(values, np.arange(len(rankings)), "submodular",
                                  {"mode": args.mode})
        timings += [("features", t1 - t0), ("products", t2 - t1), ("total", t2 - t0)]
    else:
        t0 = time.perf_counter()
        gram = kernels.gram_baseline(
            args.kernel, rankings, args.mallows_lambda,
            args.mode, args.samples, args.seed,
        )
        t1 = time.perf_counter()
        timings.append(("total", t1 - t0))
    if args.format == "csv":
        kernels.save_gram_csv(out / "gram.csv", gram)
    else:
        kernels.save_gram_binary(out / "gram.bin", gram)
    with open(out / "timing.csv", "w", encoding="utf-8") as fh:
        fh.write("phase,seconds\n")
        for phase, seconds in timings:
            fh.write(f"{phase},{seconds:.6f}\n")
    _echo_config(out, args)
    for phase, seconds in timings:
        print(f"{phase}: {seconds:.3f} s")
    return 0


def _gram_for(kernel: str, rankings, cut, args) -> np.ndarray:
    if kernel == "submodular":
        return kernels.gram_submodular(
            cut, rankings, args.mode, args.samples, args.seed, args.budget, args.threads
        ).values
    return kernels.gram_baseline(
        kernel, rankings, args.mallows_lambda, args.mode, args.samples, args.seed
    ).values


def _run_classification(kernel, gram, dataset, seed, reg, rng) -> float:
    if kernel == "dummy":
        _, test_ids = _classify.split(dataset, 0.2, seed)
        predictions = np.where(rng.random(len(test_ids)) < 0.5, 1, -1)
        return _classify.f1_score(predictions, dataset.labels[test_ids], 1)
    train_ids, test_ids = _classify.split(dataset, 0.2, seed)
    model = _classify.train_krr(gram[np.ix_(train_ids, train_ids)],
                                dataset.labels[train_ids], reg)
    predictions = _classify.predict(model, gram[np.ix_(test_ids, train_ids)])
    return _classify.f1_score(predictions, dataset.labels[test_ids], 1)


def cmd_classify(args) -> int:
    out = _out_dir(args)
    kernels_to_run = args.kernels.split(",")
    if args.dummy and "dummy" not in kernels_to_run:
        kernels_to_run.append("dummy")
    seeds = [int(s) for s in args.seeds.split(",")]
    rows: list[str] = []

    if args.rankings is not None:
        rankings, cut = _load_inputs(args)
        labels = datasets.load_labels(args.labels)
        dataset = datasets.LabeledRankingDataset(rankings, labels)
        grid = [(None, dataset)]
    else:
        cut = CutFunction(
            build_graph(datasets.FOOD_FEATURES, args.lengthscale, args.keep_fraction)
        )
        grid = [(float(s), None) for s in args.sigmas.split(",")]

    for sigma, dataset in grid:
        for seed in seeds:
            run_dataset = (
                dataset
                if dataset is not None
                else datasets.generate_dataset(args.m, sigma, args.kind, args.size, seed)
            )
            for kernel in kernels_to_run:
                gram = (
                    None
                    if kernel == "dummy"
                    else _gram_for(kernel, run_dataset.rankings, cut, args)
                )
                f1 = _run_classification(
                    kernel, gram, run_dataset, seed, args.reg,
                    np.random.default_rng((seed, DUMMY_STREAM)),
                )
                noise = "" if sigma is None else f"{sigma:g}"
                rows.append(f"{seed},{kernel},{args.kind},{noise},{f1:.6f}")

    with open(out / "metrics.csv", "w", encoding="utf-8") as fh:
        fh.write("seed,kernel,ranking_kind,noise,f1\n")
        fh.write("\n".join(rows) + "\n")
    _echo_config(out, args)
    print(f"wrote {len(rows)} metric rows to {out / 'metrics.csv'}")
    return 0


def _median_of_runs(fn, repeats: int, timeout: float | None) -> float | None:
    """Median wall time over ``repeats`` runs after one discarded warm-up;
    None when the warm-up exceeds the timeout."""
    t0 = time.perf_counter()
    fn()
    warmup = time.perf_counter() - t0
    if timeout is not None and warmup > timeout:
        return None
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def cmd_bench(args) -> int:
    out = _out_dir(args)
    sizes = [int(s) for s in args.grid.split(",")]
    kernels_to_run = args.kernels.split(",")
    cut = CutFunction(
        build_graph(datasets.FOOD_FEATURES, args.lengthscale, args.keep_fraction)
    )
    rows = ["m,kernel,phase,seconds"]
    for m in sizes:
        dataset = datasets.generate_dataset(m, args.sigma, args.kind, args.size,
                                            args.seed)
        for kernel in kernels_to_run:
            if kernel == "submodular":
                maps_holder = {}

                def features_phase():
                    maps_holder["phi"] = kernels.compute_feature_maps(
                        cut, dataset.rankings, args.mode, args.samples, args.seed,
                        args.budget, args.threads,
                    )

                def product_phase():
                    kernels.gram_from_feature_maps(maps_holder["phi"])

                t_feat = _median_of_runs(features_phase, args.repeats, args.timeout)
                t_prod = (
                    None
                    if t_feat is None
                    else _median_of_runs(product_phase, args.repeats, args.timeout)
                )
                for phase, t in (("features", t_feat), ("products", t_prod)):
                    rows.append(_bench_row(m, kernel, phase, t))
                total = None if t_feat is None or t_prod is None else t_feat + t_prod
                rows.append(_bench_row(m, kernel, "total", total))
            else:
                def run():
                    kernels.gram_baseline(kernel, dataset.rankings,
                                          args.mallows_lambda, args.mode,
                                          args.samples, args.seed)

                t = _median_of_runs(run, args.repeats, args.timeout)
                rows.append(_bench_row(m, kernel, "total", t))
    with open(out / "bench.csv", "w", encoding="utf-8") as fh:
        fh.write("\n".join(rows) + "\n")
    _echo_config(out, args)
    print("\n".join(rows))
    return 0


def _bench_row(m: int, kernel: str, phase: str, seconds: float | None) -> str:
    value = "NA" if seconds is None else f"{seconds:.6f}"
    return f"{m},{kernel},{phase},{value}"


def _add_common_kernel_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=("exact", "sampled"), default="exact",
                   help="handling of non-exhaustive rankings")
    p.add_argument("--samples", type=int, default=600,
                   help="extension samples per ranking in sampled mode")
    p.add_argument("--budget", type=int, default=100_000,
                   help="enumeration guard for exact mode")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=0,
                   help="feature-map workers; 0 = all cores, 1 = sequential")
    p.add_argument("--mallows-lambda", type=float, default=1.0)
    p.add_argument("--lengthscale", type=float, default=None,
                   help="override the median-distance heuristic")
    p.add_argument("--keep-fraction", type=float, default=1.0,
                   help="fraction of strongest graph edges to keep")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rankkernels",
        description="Submodular kernels for ranked data: datasets, Gram "
                    "matrices, classification, and timing experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate the synthetic preference dataset")
    p.add_argument("--m", type=int, required=True, help="number of rankings")
    p.add_argument("--sigma", type=float, required=True, help="score noise level")
    p.add_argument("--kind", choices=CENSOR_KINDS, default="full")
    p.add_argument("--size", type=int, default=None,
                   help="k for topk, block/subset count for interleavings")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("graph", help="build and export an information graph")
    p.add_argument("--features", required=True)
    p.add_argument("--lengthscale", type=float, default=None)
    p.add_argument("--keep-fraction", type=float, default=1.0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("featmap", help="export per-ranking feature maps")
    p.add_argument("--rankings", required=True)
    p.add_argument("--features", required=True)
    _add_common_kernel_flags(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_featmap)

    p = sub.add_parser("gram", help="compute a Gram matrix with phase timings")
    p.add_argument("--rankings", required=True)
    p.add_argument("--features", required=True)
    p.add_argument("--kernel", choices=("submodular", "kendall", "mallows"),
                   default="submodular")
    p.add_argument("--format", choices=("csv", "binary"), default="csv")
    _add_common_kernel_flags(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_gram)

    p = sub.add_parser("classify", help="run the classification experiment grid")
    p.add_argument("--rankings", default=None,
                   help="classify an existing dataset instead of generating one")
    p.add_argument("--labels", default=None)
    p.add_argument("--features", default=None)
    p.add_argument("--m", type=int, default=250)
    p.add_argument("--sigmas", default="0.5",
                   help="comma-separated noise grid for generated datasets")
    p.add_argument("--kind", choices=CENSOR_KINDS, default="full")
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--kernels", default="submodular,kendall,mallows")
    p.add_argument("--dummy", action="store_true",
                   help="add a uniform dummy-classifier baseline row")
    p.add_argument("--seeds", default="0,1,2,3,4,5")
    p.add_argument("--reg", type=float, default=1e-3)
    _add_common_kernel_flags(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("bench", help="empirical time complexity over a size grid")
    p.add_argument("--grid", default="1250,2500,5000",
                   help="comma-separated sample sizes")
    p.add_argument("--kernels", default="submodular")
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--kind", choices=CENSOR_KINDS, default="full")
    p.add_argument("--size", type=int, default=None)
    p.add_argument("--repeats", type=int, default=7)
    p.add_argument("--timeout", type=float, default=None,
                   help="seconds; a cell whose warm-up exceeds this records NA")
    _add_common_kernel_flags(p)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "classify" and args.rankings is not None:
        if args.labels is None or args.features is None:
            parser.error("--rankings needs --labels and --features")
    try:
        return args.func(args)
    except (ParseError, ExtensionBudgetError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (_classify.FactorizationError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
