"""Command line entry point: ``vqoe analyze | synth | train | eval``.

Exit codes: 0 success, 2 bad input or usage, 3 model problems.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from . import features as feat
from .errors import InputError, ModelError
from .learn import (
    AdtConfig,
    evaluate_model,
    feature_importance,
    fit_with_thresholds,
    format_table,
    kfold_cv,
    load_model,
    save_model,
)
from .spatial import IntraCoderConfig, dct_blur_baseline
from .synth import build_corpus
from .temporal import DecimateThresholds
from .video_io import attach_recorded_bitrate, read_y4m

EXIT_OK, EXIT_INPUT, EXIT_MODEL = 0, 2, 3
REPORT_SCHEMA_VERSION = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INPUT)


def _qp(text):
    qp = int(text)
    if not 0 <= qp <= 51:
        raise argparse.ArgumentTypeError(f"QP must be in 0..51, got {qp}")
    return qp


def _folds(text):
    k = int(text)
    if k < 2:
        raise argparse.ArgumentTypeError(f"need at least 2 folds, got {k}")
    return k


def _positive(text):
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return x


def _write_json(path, obj):
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def _load_checked_model(path):
    model = load_model(path)
    if tuple(model.feature_names) != feat.FEATURE_NAMES:
        raise ModelError(
            f"model features {list(model.feature_names)} do not match extractor "
            f"v{feat.EXTRACTOR_VERSION} features {list(feat.FEATURE_NAMES)}"
        )
    if model.thresholds is None:
        raise ModelError(f"{path}: model has no class thresholds")
    return model


def _bitrate_from_manifest(manifest, input_path):
    target = os.path.abspath(input_path)
    for row in feat.read_manifest(manifest):
        if os.path.abspath(row.path) == target:
            return row.recorded_bitrate_bps
    raise InputError(f"{input_path} is not listed in {manifest}")


def cmd_analyze(args) -> int:
    bitrate = args.recorded_bitrate
    if bitrate is None:
        if args.manifest is None:
            raise InputError("--recorded-bitrate is required (or --manifest listing the clip)")
        bitrate = _bitrate_from_manifest(args.manifest, args.input)
    frames, meta = read_y4m(args.input)
    meta = attach_recorded_bitrate(meta, bitrate)
    model = _load_checked_model(args.model) if args.model else None
    th = DecimateThresholds(args.hi, args.lo, args.frac)
    analysis = feat.analyze_frames(frames, meta, IntraCoderConfig(args.qp), th)
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "clip_id": meta.clip_id,
        "features": analysis.features.to_dict(),
        "intra_bitrate_bps": analysis.pbr.intra_bitrate_bps,
        "recorded_bitrate_bps": analysis.pbr.recorded_bitrate_bps,
        "freeze_events": [
            {"start_frame": e.start_frame, "end_frame": e.end_frame, "duration_seconds": e.duration_seconds}
            for e in analysis.temporal.events
        ],
        "warnings": [],
    }
    if analysis.temporal.still_clip_warning:
        report["warnings"].append("still_clip: every frame after the first is a duplicate")
    if args.baseline_dct:
        report["dct_baseline_score"] = dct_blur_baseline(frames)
    if model is not None:
        mos = float(model.predict(analysis.features.as_array()[None])[0])
        report["predicted_mos"] = mos
        report["label"] = model.thresholds.label(mos)
        report["thresholds"] = {"m1": model.thresholds.m1, "m2": model.thresholds.m2}
    _write_json(args.out, report)
    return EXIT_OK


def cmd_synth(args) -> int:
    corpus = build_corpus(args.n, args.seed, args.out_dir)
    print(f"wrote {len(corpus.clips)} clips; manifest {corpus.manifest_path}")
    return EXIT_OK


def _adt_config(args):
    return AdtConfig(
        n_estimators=args.n_estimators,
        learning_rate=args.learning_rate,
        loss=args.loss,
        max_tree_depth=args.max_depth,
        rng_seed=args.seed,
    )


def cmd_train(args) -> int:
    samples = feat.load_dataset(args.manifest)
    config = _adt_config(args)
    cv = kfold_cv(samples, config, args.folds)
    x, y = feat.feature_matrix(samples)
    model = fit_with_thresholds(x, y, config)
    save_model(model, args.out_model)
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "command": "train",
        "manifest": os.path.abspath(args.manifest),
        "config": dataclasses.asdict(config),
        "cross_validation": cv.to_dict(),
        "final_model": {
            "thresholds": {"m1": model.thresholds.m1, "m2": model.thresholds.m2},
            "feature_importance": dict(zip(feat.FEATURE_NAMES, feature_importance(model).tolist())),
            "n_estimators_fitted": len(model.estimators),
        },
    }
    if args.report:
        _write_json(args.report, report)
    if args.pretty:
        print(format_table({"ADT": cv}))
    return EXIT_OK


def cmd_eval(args) -> int:
    model = _load_checked_model(args.model)
    samples = feat.load_dataset(args.manifest)
    rep = evaluate_model(model, samples)
    report = {"schema_version": REPORT_SCHEMA_VERSION, "command": "eval", "evaluation": rep.to_dict()}
    if args.report:
        _write_json(args.report, report)
    if args.pretty:
        print(format_table({"ADT": rep}))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="vqoe", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="compute QoE features (and a label) for one Y4M clip")
    a.add_argument("--input", required=True)
    a.add_argument("--recorded-bitrate", type=_positive, help="bits/second of the original recording")
    a.add_argument("--manifest", help="manifest CSV to look the recorded bitrate up in")
    a.add_argument("--model")
    a.add_argument("--qp", type=_qp, default=30)
    a.add_argument("--hi", type=float, default=64 * 12)
    a.add_argument("--lo", type=float, default=64 * 5)
    a.add_argument("--frac", type=float, default=0.1)
    a.add_argument("--baseline-dct", action="store_true")
    a.add_argument("--out", required=True)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("synth", help="build a synthetic labelled corpus")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=7)
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_synth)

    for name, fn, helptext in (("train", cmd_train, "cross-validate and fit a model"),
                               ("eval", cmd_eval, "score a saved model on a manifest")):
        t = sub.add_parser(name, help=helptext)
        t.add_argument("--manifest", required=True)
        t.add_argument("--report")
        t.add_argument("--pretty", action="store_true", help="print a precision/accuracy/recall/MSE table")
        t.set_defaults(func=fn)
        if name == "train":
            t.add_argument("--folds", type=_folds, default=10)
            t.add_argument("--seed", type=int, default=0)
            t.add_argument("--out-model", required=True)
            t.add_argument("--n-estimators", type=int, default=10)
            t.add_argument("--learning-rate", type=float, default=0.1)
            t.add_argument("--loss", choices=("linear", "square", "exponential"), default="linear")
            t.add_argument("--max-depth", type=int, default=3)
        else:
            t.add_argument("--model", required=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ModelError as e:
        print(f"vqoe: model error: {e}", file=sys.stderr)
        return EXIT_MODEL
    except (InputError, ValueError, OSError) as e:
        print(f"vqoe: input error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    raise SystemExit(main())
