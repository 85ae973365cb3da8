"""Command-line interface.

Subcommands: synth, preprocess, analyze, train, topomap. Heavy imports
happen inside the handlers so that --threads can pin the BLAS pool through
environment variables before numpy first loads. Exit codes: 0 on success,
1 on runtime failure, 2 on usage errors. Set VPG_LOG=DEBUG|INFO|... for
logging verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

log = logging.getLogger("vpgnet")

_THREAD_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
    "VECLIB_MAXIMUM_THREADS",
)


def _setup_logging():
    level = os.environ.get("VPG_LOG", "WARNING").upper()
    if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        level = "WARNING"
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _print_config(command: str, resolved: dict):
    print(f"{command} config: {json.dumps(resolved, sort_keys=True)}")


def _parse_pair(text: str, sep: str, caster):
    parts = text.split(sep)
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two values separated by {sep!r}: {text!r}")
    return caster(parts[0]), caster(parts[1])


def _band(text: str):
    return _parse_pair(text, ":", float)


def _trials(text: str):
    return _parse_pair(text, ":", int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vpgnet",
        description="EEG visual-imagery decoding with perception-guided training",
    )
    parser.add_argument("--threads", type=int, default=None, help="cap BLAS threads")
    parser.add_argument(
        "--deterministic",
        action="store_true",
        help="single-threaded numerics for bit-reproducible runs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic imagery/perception pair")
    p.add_argument("--out", required=True, help="output directory (vi/ and vp/ inside)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--channels", type=int, default=16)
    p.add_argument("--trials-per-class", type=_trials, default=(50, 100), metavar="VI:VP")
    p.add_argument("--samples", type=int, default=1251)
    p.add_argument("--fs", type=float, default=250.0)

    p = sub.add_parser("preprocess", help="band-pass, resample, and crop a dataset")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--band", type=_band, default=(8.0, 13.0), metavar="LOW:HIGH")
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--resample", type=float, default=None, metavar="HZ")
    p.add_argument("--crop", type=int, default=None, metavar="SAMPLES")

    p = sub.add_parser("analyze", help="per-channel alpha tendencies to CSV and SVG")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out-csv", required=True)
    p.add_argument("--out-svg", required=True)
    p.add_argument("--band", type=_band, default=(8.0, 13.0), metavar="LOW:HIGH")
    p.add_argument("--window", type=float, default=1.0, help="window length, seconds")
    p.add_argument("--step", type=float, default=0.25, help="window step, seconds")

    p = sub.add_parser("train", help="cross-validated regime comparison")
    p.add_argument("--vi", required=True, help="imagery dataset directory")
    p.add_argument("--vp", default=None, help="perception dataset directory")
    p.add_argument("--regimes", choices=("vi", "both"), default="both")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--out-csv", default=None, help="optional flat CSV path")
    p.add_argument("--reversal", choices=("zeros", "ones"), default="zeros")
    p.add_argument("--scope", choices=("channel", "trial"), default="channel")
    p.add_argument("--model", choices=("proposed", "compact"), default="proposed")
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--batch", type=int, default=16)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--channels", default=None, help="comma-separated channel subset")

    p = sub.add_parser("topomap", help="render a channel,value CSV as a scalp map")
    p.add_argument("--values", required=True, help="CSV with channel,value rows")
    p.add_argument("--montage", required=True, help="dataset directory supplying the montage")
    p.add_argument("--out", required=True, help="output SVG path")

    return parser


def _cmd_synth(args) -> int:
    from pathlib import Path

    from .dataio import save_dataset
    from .synth import SynthConfig, generate_synthetic

    vi_n, vp_n = args.trials_per_class
    config = SynthConfig(
        n_channels=args.channels,
        fs_hz=args.fs,
        n_samples=args.samples,
        trials_per_class_imagery=vi_n,
        trials_per_class_perception=vp_n,
        seed=args.seed,
    )
    _print_config(
        "synth",
        {
            "out": args.out,
            "seed": args.seed,
            "channels": args.channels,
            "trials_per_class": [vi_n, vp_n],
            "samples": args.samples,
            "fs_hz": args.fs,
        },
    )
    vi, vp = generate_synthetic(config)
    out = Path(args.out)
    save_dataset(vi, out / "vi")
    save_dataset(vp, out / "vp")
    print(f"wrote {len(vi)} imagery trials to {out / 'vi'}")
    print(f"wrote {len(vp)} perception trials to {out / 'vp'}")
    return 0


def _cmd_preprocess(args) -> int:
    from .core import Dataset
    from .dataio import load_dataset, save_dataset
    from .dsp import FilterSpec, crop_epoch, design_bandpass, filter_epoch, resample

    ds = load_dataset(args.input)
    low, high = args.band
    _print_config(
        "preprocess",
        {
            "in": args.input,
            "out": args.out,
            "band": [low, high],
            "order": args.order,
            "resample": args.resample,
            "crop": args.crop,
        },
    )
    coeffs = design_bandpass(FilterSpec(low, high, ds.fs_hz, args.order))
    epochs = []
    for ep in ds.epochs:
        ep = filter_epoch(ep, coeffs)
        if args.resample is not None:
            ep = resample(ep, args.resample)
        if args.crop is not None:
            ep = crop_epoch(ep, args.crop)
        epochs.append(ep)
    fs = args.resample if args.resample is not None else ds.fs_hz
    save_dataset(Dataset(ds.name, ds.montage, fs, ds.classes, tuple(epochs)), args.out)
    print(f"wrote {len(epochs)} trials to {args.out}")
    return 0


def _cmd_analyze(args) -> int:
    import numpy as np

    from .dataio import load_dataset
    from .dsp import alpha_tendency
    from .topomap import export_topomap

    ds = load_dataset(args.input)
    _print_config(
        "analyze",
        {
            "in": args.input,
            "band": list(args.band),
            "window_s": args.window,
            "step_s": args.step,
            "out_csv": args.out_csv,
            "out_svg": args.out_svg,
        },
    )
    slopes = np.zeros(ds.montage.n_channels)
    for ep in ds.epochs:
        slopes += alpha_tendency(ep, args.band, args.window, args.step).per_channel_slope
    slopes /= max(len(ds), 1)
    export_topomap(slopes, ds.montage, args.out_svg, args.out_csv)
    occ = ds.montage.occipital_indices
    occ_mean = float(slopes[list(occ)].mean()) if occ else float("nan")
    print(f"mean occipital slope: {occ_mean:.6g} power/s over {len(ds)} trials")
    return 0


def _cmd_train(args) -> int:
    from .dataio import load_dataset
    from .experiment import (
        ExperimentConfig,
        TrainingParams,
        run_experiment,
        write_report,
    )
    from .transform import NormScope, Regime, Reference, ReversalConfig

    regimes = (
        (Regime.VI_ONLY,)
        if args.regimes == "vi"
        else (Regime.VI_ONLY, Regime.VI_PLUS_VP)
    )
    channels = None if args.channels is None else tuple(args.channels.split(","))
    config = ExperimentConfig(
        folds=args.folds,
        seed=args.seed,
        regimes=regimes,
        reversal=ReversalConfig(Reference(args.reversal)),
        scope=NormScope(args.scope),
        training=TrainingParams(
            learning_rate=args.lr,
            batch_size=args.batch,
            max_epochs=args.epochs,
            patience=args.patience,
        ),
        channels=channels,
        model=args.model,
    )
    _print_config("train", config.echo())
    vi = load_dataset(args.vi)
    vp = load_dataset(args.vp) if args.vp else None
    report = run_experiment(vi, vp, config)
    write_report(report, args.out, args.out_csv)
    for name, res in report.regimes.items():
        print(f"{name}: mean accuracy {res.mean:.4f} (std {res.std:.4f})")
    if len(report.regimes) == 2:
        gap = report.regimes["vi_plus_vp"].mean - report.regimes["vi_only"].mean
        print(f"gap (vi_plus_vp - vi_only): {gap:+.4f}")
    print(f"report written to {args.out}")
    return 0


def _cmd_topomap(args) -> int:
    import csv

    import numpy as np

    from .dataio import load_dataset
    from .errors import ChannelMismatch
    from .topomap import export_topomap

    ds = load_dataset(args.montage)
    _print_config(
        "topomap", {"values": args.values, "montage": args.montage, "out": args.out}
    )
    table = {}
    with open(args.values, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            table[row["channel"]] = float(row["value"])
    missing = [n for n in ds.montage.channel_names if n not in table]
    if missing:
        raise ChannelMismatch(f"values CSV lacks channels: {missing}")
    values = np.array([table[n] for n in ds.montage.channel_names])
    export_topomap(values, ds.montage, args.out)
    print(f"wrote {args.out}")
    return 0


_HANDLERS = {
    "synth": _cmd_synth,
    "preprocess": _cmd_preprocess,
    "analyze": _cmd_analyze,
    "train": _cmd_train,
    "topomap": _cmd_topomap,
}


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 2

    threads = 1 if args.deterministic else args.threads
    if threads is not None:
        if threads < 1:
            print("--threads must be at least 1", file=sys.stderr)
            return 2
        for var in _THREAD_VARS:
            os.environ[var] = str(threads)
        log.info("numeric thread pools capped at %d", threads)

    from .errors import VpgError

    try:
        return _HANDLERS[args.command](args)
    except VpgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
