"""``speechkit`` command-line driver.

Exit codes: 0 success, 1 domain error (bad input data, failed scoring,
unresolvable config), 2 usage error. Results go to standard output or
``-o``/``--report`` files; diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .hyperconf import apply_overrides, dump_resolved, load_config, parse_override_args, resolution_order, resolve

log = logging.getLogger("speechkit")

_LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


class UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    return f"{x:.6f}"


# -- resolve / run --

def _load_with_overrides(path, overrides):
    return apply_overrides(load_config(path), overrides)


def cmd_resolve(args, overrides) -> int:
    root = _load_with_overrides(args.config, overrides)
    if args.dump:
        sys.stdout.write(dump_resolved(resolve(root)))
    else:
        resolve(root)
        for key in resolution_order(root):
            print(key)
    return 0


RUN_DEFAULTS = {
    "seed": 0,
    "epochs": 1,
    "learning_rate": 0.1,
    "batch_size": 8,
    "batching": "random",
    "max_elems": None,
    "n_buckets": 8,
    "data_root": "",
    "valid_manifest": None,
    "test_manifest": None,
    "checkpoint_dir": None,
    "checkpoint_minutes": 15.0,
    "checkpoint_steps": None,
}


def _run_settings(values: dict, args) -> dict:
    missing = [k for k in ("train_manifest", "input_keys", "target_keys") if k not in values]
    if missing:
        raise ValueError(f"config lacks required keys: {', '.join(missing)}")
    cfg = {**RUN_DEFAULTS, **values}
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.batching is not None:
        cfg["batching"] = args.batching
    for k in ("input_keys", "target_keys"):
        if not isinstance(cfg[k], list) or not cfg[k]:
            raise ValueError(f"{k} must be a non-empty list of manifest keys")
    return cfg


def _vector_pipeline(path, cfg):
    from .datapipe import Pipeline
    from .manifest import load_manifest

    m = load_manifest(path, data_root=cfg["data_root"])
    pipe = Pipeline(m)
    pipe.add_dynamic_item(lambda *v: np.array(v, dtype=np.float64), takes=cfg["input_keys"], provides="input")
    pipe.add_dynamic_item(lambda *v: np.array(v, dtype=np.float64), takes=cfg["target_keys"], provides="target")
    pipe.set_output_keys(["input", "target"])
    lengths = {ex: m[ex].get("length", 1) for ex in m.ids}
    return pipe, lengths


def cmd_run(args, overrides) -> int:
    from .trainloop import SGD, Checkpointer, LinearL1, PlannedBatches

    cfg = _run_settings(resolve(_load_with_overrides(args.config, overrides)), args)

    def source(path, strategy):
        pipe, lengths = _vector_pipeline(path, cfg)
        kw = {"batch_size": cfg["batch_size"]} if strategy != "dynamic" else {
            "max_elems": cfg["max_elems"], "n_buckets": cfg["n_buckets"]}
        return PlannedBatches(pipe, lengths, strategy, ["input", "target"], **kw)

    class Reporting(LinearL1):
        def on_stage_end(self, stage, epoch, stats):
            print(f"epoch {epoch} {stage.value} loss {_fmt(stats['loss'])}")

    ck = None
    if cfg["checkpoint_dir"] is not None:
        ck = Checkpointer(cfg["checkpoint_dir"], interval_minutes=float(cfg["checkpoint_minutes"]),
                          interval_steps=cfg["checkpoint_steps"], best_metrics={"valid_loss": "min"})
    brain = Reporting(len(cfg["input_keys"]), len(cfg["target_keys"]), SGD(float(cfg["learning_rate"])), ck,
                      seed=int(cfg["seed"]))
    train = source(cfg["train_manifest"], cfg["batching"])
    # evaluation sets keep file order
    valid = source(cfg["valid_manifest"], "sorted") if cfg["valid_manifest"] else None
    state = brain.fit(range(int(cfg["epochs"])), train, valid)
    if cfg["test_manifest"]:
        best = ("valid_loss", "min") if ck is not None and valid is not None else None
        brain.evaluate(source(cfg["test_manifest"], "sorted"), best=best)
    print(f"steps {state.global_step}")
    print("parameters " + " ".join(f"{p:.17g}" for p in brain.params))
    return 0


# -- score --

def cmd_score(args) -> int:
    from . import metrics
    from .wavio import read_wav

    if args.metric == "wer":
        stats = metrics.score_corpus(metrics.read_transcripts(args.ref), metrics.read_transcripts(args.hyp),
                                     threads=args.threads)
        rate = metrics.error_rate(stats)
        if args.report:
            Path(args.report).write_text(metrics.render_wer_report(stats), encoding="utf-8")
        print(f"%WER {rate:.2f} [ {stats.errors} / {stats.n_ref_tokens}, {stats.ins} ins, {stats.dels} del, "
              f"{stats.subs} sub ]")
        print(f"Scored {stats.scored} sentences, {stats.missing_hyp} not present in hyp.")
    elif args.metric == "der":
        b = metrics.der_breakdown(metrics.read_rttm(args.ref), metrics.read_rttm(args.hyp),
                                  collar=args.collar, ignore_overlap=args.ignore_overlap)
        print(f"DER {b.der:.4f}")
        print(f"missed {b.missed:.4f} false_alarm {b.false_alarm:.4f} confusion {b.confusion:.4f} "
              f"scored {b.reference_length:.4f}")
        for h, r in sorted(b.mapping.items()):
            print(f"map {h} {r}")
    elif args.metric == "eer":
        rate, thr = metrics.eer(metrics.read_scores(args.target), metrics.read_scores(args.nontarget))
        print(f"EER {rate:.4f} threshold {thr:.6f}")
    else:
        clean, fs = read_wav(args.clean)
        est, fs_e = read_wav(args.est)
        if fs != fs_e:
            raise ValueError(f"sample rates differ: {fs} vs {fs_e}")
        print(f"SI-SNR {metrics.si_snr(clean[0], est[0]):.4f}")
        if args.mix:
            mix, fs_m = read_wav(args.mix)
            if fs != fs_m:
                raise ValueError(f"sample rates differ: {fs} vs {fs_m}")
            print(f"SI-SNRi {metrics.si_snri(clean[0], est[0], mix[0]):.4f}")
    return 0


# -- doa / beamform --

def _spectrogram(path, args, geometry):
    from .arraydsp import stft
    from .wavio import read_wav

    audio, fs = read_wav(path)
    if geometry is not None and audio.shape[0] != geometry.n_mics:
        raise ValueError(f"{path} has {audio.shape[0]} channels, geometry has {geometry.n_mics} mics")
    return stft(audio, fs, args.frame_ms, args.hop_ms)


def _pair(text: str) -> tuple[float, float]:
    try:
        a, b = (float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}") from None
    return a, b


def cmd_doa(args) -> int:
    from .arraydsp import azimuth_grid, compute_scm, gcc_phat, load_geometry, music, srp_phat, to_angles

    geom = load_geometry(args.geometry)
    spec = _spectrogram(args.wav, args, geom)
    if args.method == "gccphat":
        p, q = args.mics
        if not (0 <= p < geom.n_mics and 0 <= q < geom.n_mics) or p == q:
            raise ValueError(f"bad microphone pair {p},{q} for {geom.n_mics} mics")
        est = gcc_phat(spec.X[p], spec.X[q], spec.fs, spec.fft_size, mic_distance=geom.distance(p, q),
                       speed_of_sound=geom.speed_of_sound)
        print(f"tdoa_samples {est.tdoa_samples:.4f} angle {est.angle_deg:.2f}")
        return 0
    scm = compute_scm(spec)
    grid = azimuth_grid(args.resolution, args.elevation)
    if args.method == "srpphat":
        if args.sources != 1:
            raise ValueError("srpphat reports a single source; use music for more")
        res = srp_phat(scm, geom, grid)
    else:
        res = music(scm, geom, grid, n_sources=args.sources)
    for d in res.directions:
        az, el = to_angles(d)
        print(f"azimuth {az:.1f} elevation {el:.1f}")
    return 0


def _load_mask(path, shape) -> np.ndarray:
    mask = np.load(path, allow_pickle=False) if str(path).endswith(".npy") else np.loadtxt(path, ndmin=2)
    if mask.shape != shape:
        raise ValueError(f"mask {path} has shape {mask.shape}, expected frames x bins {shape}")
    if np.any(mask < 0) or np.any(mask > 1):
        raise ValueError(f"mask {path} has values outside [0, 1]")
    return mask


def cmd_beamform(args) -> int:
    from .arraydsp import (apply_beamformer, compute_scm, delay_and_sum, gev, istft, load_geometry, mvdr,
                           steering, unit_vector)
    from .wavio import write_wav

    geom = load_geometry(args.geometry)
    spec = _spectrogram(args.wav, args, geom)
    mask = _load_mask(args.noise_mask, spec.X.shape[1:]) if args.noise_mask else None
    if args.method == "gev":
        if mask is None:
            raise ValueError("gev needs --noise-mask")
        w = gev(compute_scm(spec, 1.0 - mask, kind="SS"), compute_scm(spec, mask, kind="NN"))
    else:
        if args.doa is None:
            raise ValueError(f"{args.method} needs --doa az,el")
        steer = steering(geom, unit_vector(*args.doa), spec.freqs, reference_mic=0)
        if args.method == "das":
            w = delay_and_sum(steer)
        else:
            w = mvdr(compute_scm(spec, mask, kind="NN" if mask is not None else "XX"), steer)
    if w.flagged_bins:
        log.warning("%d frequency bins fell back to delay-and-sum", len(w.flagged_bins))
    out = istft(apply_beamformer(w, spec))
    write_wav(args.output, out[0], int(spec.fs), args.subtype)
    print(f"wrote {args.output} {out.shape[1]} samples")
    return 0


# -- manifest --

def cmd_manifest(args) -> int:
    from .manifest import load_manifest, validate_manifest

    m = load_manifest(args.file, data_root=args.data_root)
    report = validate_manifest(m, audio_check=not args.no_audio_check)
    print(f"{len(m)} examples, {len(report)} findings")
    if len(report):
        print(report.render())
        return 1
    return 0


# -- parser --

def _common(p: argparse.ArgumentParser, top: bool) -> None:
    d = {} if top else {"default": argparse.SUPPRESS}
    p.add_argument("--seed", type=int, help="global PRNG seed for batching and training", **({"default": None} | d))
    p.add_argument("--threads", type=int, help="cap on module parallelism", **({"default": 1} | d))


def _leaf(subparsers, name: str, usage: str) -> argparse.ArgumentParser:
    p = subparsers.add_parser(name, allow_abbrev=False, usage=usage)
    p.set_defaults(usage_parser=p)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="speechkit", description="Speech toolkit core.", allow_abbrev=False)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _common(parser, True)
    sub = parser.add_subparsers(dest="command", metavar="{resolve,run,score,doa,beamform,manifest}")
    sub.required = True

    def add(name, **kw):
        p = sub.add_parser(name, allow_abbrev=False, **kw)
        _common(p, False)
        p.set_defaults(usage_parser=p)
        return p

    p = add("resolve", help="resolve a config and print it",
            usage="speechkit resolve <file> [--key=value ...] [--dump]")
    p.add_argument("config")
    p.add_argument("--dump", action="store_true", help="print the resolved tree as YAML")
    p.set_defaults(func=cmd_resolve, takes_overrides=True)

    p = add("run", help="train the reference program from a config",
            usage="speechkit run <config.yaml> [--key=value ...] [--batching {random,sorted,dynamic}]")
    p.add_argument("config")
    p.add_argument("--batching", choices=("random", "sorted", "dynamic"))
    p.set_defaults(func=cmd_run, takes_overrides=True)

    p = add("score", help="compute a metric")
    metrics = p.add_subparsers(dest="metric", metavar="{wer,der,eer,sisnr}")
    metrics.required = True
    m = _leaf(metrics, "wer", "speechkit score wer --ref ref.txt --hyp hyp.txt [--report out.txt]")
    m.add_argument("--ref", required=True)
    m.add_argument("--hyp", required=True)
    m.add_argument("--report")
    m = _leaf(metrics, "der", "speechkit score der --ref ref.rttm --hyp hyp.rttm [--collar S] [--ignore-overlap]")
    m.add_argument("--ref", required=True)
    m.add_argument("--hyp", required=True)
    m.add_argument("--collar", type=float, default=0.25)
    m.add_argument("--ignore-overlap", action="store_true")
    m = _leaf(metrics, "eer", "speechkit score eer --target t.txt --nontarget nt.txt")
    m.add_argument("--target", required=True)
    m.add_argument("--nontarget", required=True)
    m = _leaf(metrics, "sisnr", "speechkit score sisnr --clean s.wav --est e.wav [--mix x.wav]")
    m.add_argument("--clean", required=True)
    m.add_argument("--est", required=True)
    m.add_argument("--mix")
    p.set_defaults(func=cmd_score)

    def stft_opts(q):
        q.add_argument("--geometry", required=True, help="YAML mic positions")
        q.add_argument("--frame-ms", type=float, default=32.0)
        q.add_argument("--hop-ms", type=float, default=16.0)

    p = add("doa", help="direction of arrival",
            usage="speechkit doa {gccphat,srpphat,music} <multichannel.wav> --geometry geom.yaml [--sources N]")
    p.add_argument("method", choices=("gccphat", "srpphat", "music"))
    p.add_argument("wav")
    stft_opts(p)
    p.add_argument("--sources", type=int, default=1)
    p.add_argument("--resolution", type=float, default=1.0, help="azimuth grid step in degrees")
    p.add_argument("--elevation", type=float, default=0.0, help="elevation of the azimuth grid")
    p.add_argument("--mics", type=lambda s: tuple(int(x) for x in s.split(",")), default=(0, 1),
                   help="microphone pair for gccphat")
    p.set_defaults(func=cmd_doa)

    p = add("beamform", help="beamform a multichannel recording",
            usage="speechkit beamform {das,mvdr,gev} <in.wav> --geometry geom.yaml --doa <az,el> "
                  "[--noise-mask mask] -o out.wav")
    p.add_argument("method", choices=("das", "mvdr", "gev"))
    p.add_argument("wav")
    stft_opts(p)
    p.add_argument("--doa", type=_pair)
    p.add_argument("--noise-mask", help=".npy or text file, frames x bins, values in [0, 1]")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--subtype", choices=("float32", "pcm16"), default="float32")
    p.set_defaults(func=cmd_beamform)

    p = add("manifest", help="manifest tools")
    msub = p.add_subparsers(dest="action", metavar="{validate}")
    msub.required = True
    m = _leaf(msub, "validate", "speechkit manifest validate <file> [--data-root DIR]")
    m.add_argument("file")
    m.add_argument("--data-root", default="")
    m.add_argument("--no-audio-check", action="store_true")
    p.set_defaults(func=cmd_manifest)
    return parser


def _split_overrides(parser, argv, args, rest):
    overrides, leftover = parse_override_args(rest)
    if leftover:
        raise UsageError(f"unrecognized arguments: {' '.join(leftover)}")
    if overrides and not getattr(args, "takes_overrides", False):
        raise UsageError(f"{args.command} takes no --key=value overrides")
    if overrides:
        config_at = argv.index(args.config)
        for tok in argv[:config_at]:
            if tok.startswith("--") and "=" in tok and tok.split("=", 1)[0][2:] not in ("seed", "threads"):
                raise UsageError(f"override {tok} must follow the config path")
    return overrides


def _setup_logging() -> None:
    level = os.environ.get("SPEECHKIT_LOG", "error").lower()
    logging.basicConfig(level=_LOG_LEVELS.get(level, logging.ERROR), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    if level not in _LOG_LEVELS:
        log.error("SPEECHKIT_LOG=%s is not one of error, info, debug", level)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    _setup_logging()
    parser = build_parser()
    try:
        args, rest = parser.parse_known_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        overrides = _split_overrides(parser, argv, args, rest)
    except UsageError as e:
        getattr(args, "usage_parser", parser).print_usage(sys.stderr)
        print(f"speechkit: error: {e}", file=sys.stderr)
        return 2
    if args.threads < 1:
        print("speechkit: error: --threads must be at least 1", file=sys.stderr)
        return 2
    try:
        if getattr(args, "takes_overrides", False):
            return args.func(args, overrides)
        return args.func(args)
    except (ValueError, LookupError, OSError, FloatingPointError) as e:
        print(f"speechkit: error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
