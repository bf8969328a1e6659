"""Command-line front end.

Subcommands: gen-synth, train, classify, eval, bench, hcar. Every command is
reproducible from its inputs, flags and seed; failures exit with the error
category's code (see --help).
"""

from __future__ import annotations

import argparse
import json
import sys

from . import evaluation, hcar, kernels, matching, synth
from .dataset import load_dataset
from .errors import BadConfig, DfamError, exit_code_table
from .matching import DfamConfig
from .spectral import HASH_IDS

BASELINE_KINDS = ("nb", "dt", "rf", "knn")
_KIND_MAP = {"nb": "naive_bayes", "dt": "decision_tree",
             "rf": "random_forest", "knn": "knn"}


def _epilog() -> str:
    lines = ["exit codes:"]
    lines += [f"  {code:>2}  {name}" for name, code in exit_code_table().items()]
    return "\n".join(lines)


def _add_model_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--window", type=int, default=128,
                   help="window size W in samples, power of two (default 128)")
    p.add_argument("--overlap", type=float, default=0.7,
                   help="training window overlap ratio r in [0,1) (default 0.7)")
    p.add_argument("--bins", type=int, default=3,
                   help="dominant-frequency bin count g (default 3)")
    p.add_argument("--hash", default="H2", choices=HASH_IDS,
                   help="frequency hash function (default H2)")
    p.add_argument("--sensors", default="both", choices=("accel", "gyro", "both"),
                   help="sensor subset (default both)")
    p.add_argument("--placement", default="any",
                   choices=("RR", "RL", "LR", "LL", "any"),
                   help="placement filter (default any)")
    p.add_argument("--rate", type=float, default=50.0,
                   help="sampling rate in Hz (default 50)")
    p.add_argument("--filter-length", type=int, default=1,
                   help="odd moving-average length, 1 disables (default 1)")
    p.add_argument("--seed", type=int, default=0, help="master RNG seed")


def _config_from_args(args) -> DfamConfig:
    return DfamConfig(
        window_size=args.window,
        overlap_ratio=args.overlap,
        bins=args.bins,
        hash_id=args.hash,
        sampling_hz=args.rate,
        sensors=args.sensors,
        placement=args.placement,
        filter_length=args.filter_length,
        seed=args.seed,
    )


def _add_stream_flags(p: argparse.ArgumentParser):
    for key in matching.STREAM_KEYS:
        flag = "--" + key.replace("_", "-")
        p.add_argument(flag, dest=key, help=f"CSV file for the {key} stream")


def _streams_from_args(args, cfg: DfamConfig):
    from .dataset import read_stream_csv
    streams = {}
    for key in cfg.stream_keys:
        path = getattr(args, key, None)
        if path is None:
            raise BadConfig(f"sensor subset {cfg.sensors!r} requires --"
                            + key.replace("_", "-"))
        streams[key] = read_stream_csv(path, key, cfg.sampling_hz)
    return streams


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dfam",
        description="Concurrent pedestrian activity recognition via "
                    "dominant-frequency activity matching.",
        epilog=_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synth", help="write a synthetic labeled corpus")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--activities", type=int, default=6)
    p.add_argument("--subjects", type=int, default=1)
    p.add_argument("--duration", type=float, default=60.0,
                   help="seconds per activity recording (default 60)")
    p.add_argument("--rate", type=float, default=50.0)
    p.add_argument("--noise", type=float, default=0.25,
                   help="Gaussian noise sigma (default 0.25)")
    p.add_argument("--jitter", type=float, default=0.0,
                   help="per-subject tone frequency jitter in Hz (default 0)")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("train", help="train a matching model from a corpus")
    p.add_argument("--data", required=True, nargs="+",
                   help="manifest file(s) or a directory of manifests")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--max-per-activity", type=int, default=None,
                   help="cap equalized per-activity instance count")
    p.add_argument("--binary", choices=("movement", "distraction"),
                   help="collapse labels for a detector stage model")
    _add_model_config_flags(p)

    p = sub.add_parser("classify", help="classify every window of a recording")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True, help="predictions CSV to write")
    p.add_argument("--vote", action="store_true",
                   help="also print a stream-level majority label")
    _add_stream_flags(p)

    p = sub.add_parser("eval", help="cross-validate a classifier on a corpus")
    p.add_argument("--data", required=True, nargs="+")
    p.add_argument("--out", required=True, help="report JSON to write")
    p.add_argument("--classifier", default="dfam",
                   choices=("dfam",) + BASELINE_KINDS)
    p.add_argument("--protocol", default="kfold", choices=("kfold", "loso"))
    p.add_argument("--folds", type=int, default=10,
                   help="fold count for the kfold protocol (default 10)")
    p.add_argument("--k", type=int, default=1,
                   help="neighbour count for the knn classifier (default 1)")
    p.add_argument("--confusion-csv", default=None,
                   help="also write the confusion matrix as CSV")
    _add_model_config_flags(p)

    p = sub.add_parser("bench", help="per-stage response-time benchmark")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True, help="JSON-lines timing records")
    p.add_argument("--repetitions", type=int, default=10)
    p.add_argument("--compare-kernels", action="store_true",
                   help="time every available kernel backend, not just the active one")
    p.add_argument("--alert-sink", default=None,
                   help="file for the notify stage's alert records")
    _add_stream_flags(p)

    p = sub.add_parser("hcar", help="replay a recording through the two-state detector")
    p.add_argument("--model-s1", required=True, help="binary movement model")
    p.add_argument("--model-s2", required=True, help="binary distraction model")
    p.add_argument("--reset", type=float, default=10.0,
                   help="seconds between alerts (default 10)")
    p.add_argument("--out", default="-",
                   help="alert JSON-lines file, '-' for stdout (default)")
    p.add_argument("--trace", default=None, help="optional state-trace JSON file")
    _add_stream_flags(p)

    return parser


def _cmd_gen_synth(args) -> int:
    paths = synth.gen_synth(
        args.out, activities=args.activities, subjects=args.subjects,
        duration_s=args.duration, sampling_hz=args.rate, noise=args.noise,
        jitter_hz=args.jitter, seed=args.seed)
    print(f"wrote {len(paths)} manifest(s) under {args.out}")
    return 0


def _load_filtered(paths, placement: str):
    dataset = load_dataset(paths).filter_placement(placement)
    if not dataset.recordings:
        raise BadConfig(f"no recordings left after placement filter {placement!r}")
    return dataset


def _cmd_train(args) -> int:
    cfg = _config_from_args(args)
    dataset = _load_filtered(args.data, cfg.placement)
    recordings = [(r.label, r.streams) for r in dataset.recordings]
    if args.binary:
        recordings = hcar.relabel_binary(recordings, args.binary)
    model = matching.train(recordings, cfg, max_per_activity=args.max_per_activity)
    matching.save_model(model, args.out)
    counts = model.instance_counts()
    print(f"trained {len(counts)} activities x {min(counts.values())} signatures "
          f"-> {args.out}")
    return 0


def _cmd_classify(args) -> int:
    model = matching.load_model(args.model)
    streams = _streams_from_args(args, model.config)
    sigs = matching.recording_signatures(streams, model.config)
    labels, scores = matching.classify_batch(sigs, model)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("window_index,predicted,score\n")
        for i, (label, row) in enumerate(zip(labels, scores)):
            fh.write(f"{i},{label.name},{row.max():.6g}\n")
    print(f"classified {len(labels)} windows -> {args.out}")
    if args.vote:
        print(f"majority: {matching.majority_label(labels).name}")
    return 0


def _cmd_eval(args) -> int:
    cfg = _config_from_args(args)
    dataset = _load_filtered(args.data, cfg.placement)
    classifier = args.classifier
    hyperparams = {}
    if classifier == "knn":
        hyperparams["k"] = args.k
    kind = "dfam" if classifier == "dfam" else _KIND_MAP[classifier]
    report = evaluation.evaluate(dataset, kind, cfg, protocol=args.protocol,
                                 k=args.folds, seed=args.seed,
                                 hyperparams=hyperparams)
    report.save(args.out)
    if args.confusion_csv:
        report.confusion_csv(args.confusion_csv)
    print(f"{kind} {args.protocol} accuracy {report.accuracy:.4f} -> {args.out}")
    return 0


def _cmd_bench(args) -> int:
    model = matching.load_model(args.model)
    stream_paths = {}
    for key in model.config.stream_keys:
        path = getattr(args, key, None)
        if path is None:
            raise BadConfig("model needs --" + key.replace("_", "-"))
        stream_paths[key] = path
    backends = kernels.available_backends() if args.compare_kernels \
        else [kernels.BACKEND]
    sink = open(args.alert_sink, "w", encoding="utf-8") if args.alert_sink else None
    try:
        records = evaluation.bench_response(model, stream_paths,
                                            repetitions=args.repetitions,
                                            backends=backends, sink=sink)
    finally:
        if sink is not None:
            sink.close()
    with open(args.out, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    summary = evaluation.bench_summary(records)
    for backend, stages in summary.items():
        cls = stages["classify_per_window_ms"]["mean"]
        total = stages["total_ms"]["mean"]
        print(f"{backend}: classify {cls:.3f} ms/window, "
              f"pipeline {total:.1f} ms mean over {args.repetitions} reps")
    return 0


def _cmd_hcar(args) -> int:
    model_s1 = matching.load_model(args.model_s1)
    model_s2 = matching.load_model(args.model_s2)
    detector = hcar.HcarDetector(model_s1, model_s2, reset_seconds=args.reset)
    streams = _streams_from_args(args, model_s2.config)
    alerts, trace, work = hcar.simulate(detector, streams)
    sink = sys.stdout if args.out == "-" else open(args.out, "w", encoding="utf-8")
    try:
        for alert in alerts:
            sink.write(json.dumps(alert.to_dict(), sort_keys=True) + "\n")
    finally:
        if sink is not sys.stdout:
            sink.close()
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            json.dump({"trace": trace, "work": work}, fh, sort_keys=True, indent=2)
            fh.write("\n")
    print(f"{len(alerts)} alert(s) over {len(trace)} windows; "
          f"work: {json.dumps(work, sort_keys=True)}", file=sys.stderr)
    return 0


_COMMANDS = {
    "gen-synth": _cmd_gen_synth,
    "train": _cmd_train,
    "classify": _cmd_classify,
    "eval": _cmd_eval,
    "bench": _cmd_bench,
    "hcar": _cmd_hcar,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except DfamError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
