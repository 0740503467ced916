"""Command line front end: build, query, bench, steer, serve.

`bench` reproduces the speed/accuracy comparison tables (method x parameter
x metric) as CSV plus a JSON blob; `steer` runs the manual-weight steering
protocol and emits the per-round track-distance matrix; `serve` hosts the
REST API for the browser UI.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace as dc_replace
from pathlib import Path

import numpy as np

from .baselines import ALL_METHODS, run_benchmark, steerability_experiment
from .data import load_csv, MultivariateTimeSeries
from .errors import MtsError
from .lsh import LshConfig
from .pipeline import build_session, run_query, session_to_document, set_query
from .synthetic import make_corpus, make_planted_corpus


def _load_config(path) -> LshConfig:
    if path is None:
        return LshConfig()
    return LshConfig(**json.loads(Path(path).read_text()))


def _load_series(spec: str, d: int, n: int, seed: int, t: int = 120) -> MultivariateTimeSeries:
    """'synthetic' generates a corpus; anything else is a CSV path."""
    if spec == "synthetic":
        return make_corpus(n_windows=n, t=t, d=d, seed=seed)
    return load_csv(spec, has_header=_has_header(spec))


def _has_header(path) -> bool:
    first = Path(path).open().readline()
    for cell in first.strip().split(","):
        try:
            float(cell)
        except ValueError:
            return True
    return False


def cmd_build(args) -> int:
    series = _load_series(args.dataset, args.tracks, args.windows, args.seed, args.t)
    config = _load_config(args.config)
    session = build_session(series, t=args.t, stride=args.stride, config=config, seed=args.seed)
    print(f"windows: {len(session.window_set)}")
    print(f"model digest: {session.model_digest()}")
    if args.out:
        Path(args.out).write_text(json.dumps(session_to_document(session)))
        print(f"session written to {args.out}")
    return 0


def cmd_query(args) -> int:
    series = _load_series(args.dataset, args.tracks, args.windows, args.seed, args.t)
    config = dc_replace(_load_config(args.config), rank_metric=args.metric)
    session = build_session(series, t=args.t, stride=args.stride, config=config, seed=args.seed)
    set_query(session, args.start)
    result = run_query(session)
    print(f"round {result.round_counter}; {len(result.top_k)} candidates; "
          f"{result.expansions_used} radius expansions")
    print("rank  window  start   score")
    for rank, wi in enumerate(result.top_k[: args.top]):
        start = session.window_set.windows[wi].start
        print(f"{rank:>4}  {wi:>6}  {start:>5}  {result.scores[wi]:.6f}")
    return 0


def _bench_series(args, value: int, seed: int):
    """One (vary, value) cell: the dataset and window length to use."""
    if args.vary == "query-size":
        series = _load_series(args.dataset, args.tracks, args.windows, seed, value)
        return series, value
    if args.vary == "dataset-size":
        base = _load_series(args.dataset, args.tracks, max(args.windows, value), seed, args.t)
        values = base.values[: value + args.t - 1]
        return MultivariateTimeSeries(values, base.track_names), args.t
    if args.vary == "tracks":
        if args.dataset == "synthetic":
            series = make_corpus(n_windows=args.windows, t=args.t, d=value, seed=seed)
        else:
            base = load_csv(args.dataset, has_header=_has_header(args.dataset))
            series = MultivariateTimeSeries(
                base.values[:, :value], base.track_names[:value]
            )
        return series, args.t
    raise ValueError(f"unknown vary mode {args.vary}")


def cmd_bench(args) -> int:
    values = [int(v) for v in args.values.split(",")]
    methods = args.methods.split(",") if args.methods else list(ALL_METHODS)
    rows = []
    for value in values:
        series, t = _bench_series(args, value, args.seed)
        rng = np.random.default_rng(args.seed)
        n_windows = series.n - t + 1
        starts = sorted(
            int(s) for s in rng.choice(n_windows, size=min(args.queries, n_windows), replace=False)
        )
        reports = run_benchmark(
            series, t=t, query_starts=starts, seed=args.seed,
            methods=methods, config=_load_config(args.config),
        )
        for rep in reports:
            rows.append({
                "method": rep.method,
                "vary": args.vary,
                "value": value,
                "threads": 1,
                "recall": float(rep.recall),
                "precision_50": float(rep.precision_50),
                "precision_10pct": float(rep.precision_10pct),
                "preprocessing_s": round(rep.preprocessing_s, 4),
                "querying_s": round(rep.querying_s, 4),
            })
            print(f"{rep.method:>11} {args.vary}={value:<6} "
                  f"recall={float(rep.recall):.3f} p50={float(rep.precision_50):.3f} "
                  f"p10%={float(rep.precision_10pct):.3f} "
                  f"prep={rep.preprocessing_s:.2f}s query={rep.querying_s:.2f}s")

    out_csv = Path(args.out)
    with out_csv.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    out_json = out_csv.with_suffix(".json")
    out_json.write_text(json.dumps({"rows": rows}, indent=2))
    print(f"wrote {out_csv} and {out_json}")
    return 0


def cmd_steer(args) -> int:
    if args.dataset == "synthetic":
        # Size the planted groups to what the corpus can hold.
        avail = (args.windows - 1) // (2 * args.t)
        plant = max(2, min(60, (avail - 1) // 2))
        series, info = make_planted_corpus(
            n_windows=args.windows, t=args.t, d=args.tracks, seed=args.seed,
            boost_track=args.boost, suppress_track=args.suppress,
            n_boost=plant, n_suppress=plant,
        )
        start = info["query_start"]
    else:
        series = load_csv(args.dataset, has_header=_has_header(args.dataset))
        start = args.start if args.start is not None else 0
    session = build_session(series, t=args.t, seed=args.seed, config=_load_config(args.config))
    set_query(session, start)
    run_query(session)
    per_round, weights = steerability_experiment(
        session, rounds=args.rounds, boost=args.boost, suppress=args.suppress
    )
    writer = csv.writer(sys.stdout)
    writer.writerow(["round"] + [f"track_{j}_dtw" for j in range(session.d)])
    for r, row in enumerate(per_round):
        writer.writerow([r] + [f"{v:.6f}" for v in row])
    if args.out:
        with Path(args.out).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["round"] + [f"track_{j}_dtw" for j in range(session.d)])
            for r, row in enumerate(per_round):
                w.writerow([r] + [f"{v:.6f}" for v in row])
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(data_dir=args.data_dir, default_seed=args.seed)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="mtsearch")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_t=True):
        p.add_argument("--dataset", default="synthetic",
                       help="CSV path or 'synthetic'")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--config", default=None, help="LshConfig JSON file")
        p.add_argument("--tracks", type=int, default=3,
                       help="track count for synthetic data")
        p.add_argument("--windows", type=int, default=2000,
                       help="window count for synthetic data")
        p.add_argument("--stride", type=int, default=1)
        if with_t:
            p.add_argument("--t", type=int, default=120, help="window length")

    p = sub.add_parser("build", help="build a session and report the model digest")
    common(p)
    p.add_argument("--out", default=None, help="write the session document here")
    p.set_defaults(fn=cmd_build)

    p = sub.add_parser("query", help="run one query and print the top hits")
    common(p)
    p.add_argument("--start", type=int, required=True)
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--metric", choices=["DTW", "ED"], default="DTW")
    p.set_defaults(fn=cmd_query)

    p = sub.add_parser("bench", help="speed/accuracy tables across methods")
    common(p)
    p.add_argument("--queries", type=int, default=10)
    p.add_argument("--vary", choices=["query-size", "dataset-size", "tracks"],
                   required=True)
    p.add_argument("--values", required=True, help="comma separated values")
    p.add_argument("--methods", default=None,
                   help="comma separated subset of: " + ",".join(ALL_METHODS))
    p.add_argument("--out", default="bench.csv")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("steer", help="manual-weight steering experiment")
    common(p)
    p.add_argument("--rounds", type=int, default=4)
    p.add_argument("--boost", type=int, default=1)
    p.add_argument("--suppress", type=int, default=3)
    p.add_argument("--start", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_steer)
    # steering needs at least boost/suppress distinct tracks
    p.set_defaults(tracks=4)

    p = sub.add_parser("serve", help="host the REST API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int,
                   default=int(os.environ.get("MTSEARCH_PORT", "8800")))
    p.add_argument("--data-dir", default="./mtsearch-data")
    p.add_argument("--seed", type=int, default=0,
                   help="default seed for sessions created without one")
    p.set_defaults(fn=cmd_serve)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except MtsError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
