"""Command-line front end: transforms, enrollment, recognition, sweeps, MOS.

Parseable results go to stdout, diagnostics to stderr. Exit codes: 0 success,
1 runtime error, 2 flag misuse.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .errors import NoCrossover, VoicemaskError
from .experiment import (
    ALGORITHMS,
    DegreeSchedule,
    aggregate_mos,
    emit_report,
    find_crossover,
    load_manifest,
    run_degree_sweep,
    synth_corpus,
)
from .phase_vocoder import VARIANTS, PitchShiftSpec, pitch_shift
from .signal_core import StftConfig, read_wav, write_wav
from .speaker_id import (
    FeatureConfig,
    classify_gender,
    covariance_model,
    extract_cepstra,
    identify_speaker,
    load_models,
    save_models,
    train_gender_models,
)
from .vtln import FAMILIES, WarpSpec, vtln_transform

_PITCH_ALGOS = ("voc", "vocf")
_TRANSFORM_ALGOS = _PITCH_ALGOS + FAMILIES
_SCHEDULED_ALGOS = ALGORITHMS  # algorithms with a degree schedule


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="voicemask", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="apply one voice modification to a WAV file")
    p.add_argument("--algo", required=True, choices=_TRANSFORM_ALGOS)
    p.add_argument("--degree", type=int)
    p.add_argument("--ratio", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--gender", choices=("M", "F"))
    p.add_argument("--variant", choices=VARIANTS, default="identity-locked")
    p.add_argument("--in", dest="in_path", required=True, metavar="PATH")
    p.add_argument("--out", dest="out_path", required=True, metavar="PATH")

    p = sub.add_parser("enroll", help="build speaker and gender models from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--models", required=True)

    p = sub.add_parser("identify", help="rank enrolled speakers for a WAV file")
    p.add_argument("--models", required=True)
    p.add_argument("--in", dest="in_path", required=True, metavar="PATH")

    p = sub.add_parser("gender", help="classify a WAV file as M or F")
    p.add_argument("--models", required=True)
    p.add_argument("--in", dest="in_path", required=True, metavar="PATH")

    p = sub.add_parser("sweep", help="run the degree sweep and emit reports")
    p.add_argument("--manifest", required=True)
    p.add_argument("--algos", default=",".join(ALGORITHMS), help="comma-separated subset")
    p.add_argument("--degrees", default="0..25", help="inclusive range, e.g. 0..25")
    p.add_argument("--out", dest="out_dir", required=True, metavar="DIR")

    p = sub.add_parser("synth", help="generate the deterministic synthetic corpus")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--speakers", type=int, required=True)
    p.add_argument("--utts", type=int, required=True)
    p.add_argument("--out", dest="out_dir", required=True, metavar="DIR")

    p = sub.add_parser("mos", help="aggregate listening-test ratings")
    p.add_argument("--ratings", required=True)
    return parser


def _cmd_transform(parser, args) -> int:
    selectors = [v is not None for v in (args.degree, args.ratio, args.alpha)]
    if sum(selectors) != 1:
        parser.error("exactly one of --degree / --ratio / --alpha is required")
    is_pitch = args.algo in _PITCH_ALGOS
    if args.ratio is not None and not is_pitch:
        parser.error(f"--ratio is only valid for {'/'.join(_PITCH_ALGOS)}")
    if args.alpha is not None and is_pitch:
        parser.error("--alpha is not valid for pitch algorithms")
    if args.degree is not None and args.algo not in _SCHEDULED_ALGOS:
        parser.error(f"--degree is only valid for {'/'.join(_SCHEDULED_ALGOS)}")
    if args.degree is not None and args.algo in ("quadratic", "bilinear") and args.gender is None:
        parser.error("--gender is required with --degree for warp algorithms")

    buf = read_wav(args.in_path)
    cfg = StftConfig()
    if args.degree is not None:
        out = DegreeSchedule(args.algo).apply(buf, args.degree, args.gender, cfg, args.variant)
    elif args.ratio is not None:
        out = pitch_shift(buf, PitchShiftSpec(ratio=args.ratio, variant=args.variant), cfg)
    else:
        out = vtln_transform(buf, WarpSpec(args.algo, args.alpha), cfg)
    write_wav(args.out_path, out)
    return 0


def _cmd_enroll(parser, args) -> int:
    manifest = load_manifest(args.manifest)
    cfg = FeatureConfig()
    per_speaker = {}
    genders = {}
    pooled = []
    for entry in manifest.train_entries():
        feats = extract_cepstra(read_wav(entry.path), cfg)
        per_speaker.setdefault(entry.speaker_id, []).append(feats)
        genders[entry.speaker_id] = entry.gender
        pooled.append((feats, entry.gender))
    models = [
        covariance_model(np.vstack(seqs), label=spk, gender=genders[spk])
        for spk, seqs in sorted(per_speaker.items())
    ]
    male, female = train_gender_models(pooled)
    save_models(args.models, models + [male, female])
    return 0


def _split_models(models):
    speakers = [m for m in models if m.label not in ("M", "F")]
    male = next((m for m in models if m.label == "M"), None)
    female = next((m for m in models if m.label == "F"), None)
    return speakers, male, female


def _cmd_identify(parser, args) -> int:
    speakers, _, _ = _split_models(load_models(args.models))
    if not speakers:
        print("error: model store has no speaker models", file=sys.stderr)
        return 1
    test = covariance_model(extract_cepstra(read_wav(args.in_path)), label="probe")
    for label, score in identify_speaker(test, speakers):
        print(f"{label} {score:.6f}")
    return 0


def _cmd_gender(parser, args) -> int:
    _, male, female = _split_models(load_models(args.models))
    if male is None or female is None:
        print("error: model store lacks a gender model", file=sys.stderr)
        return 1
    test = covariance_model(extract_cepstra(read_wav(args.in_path)), label="probe")
    decided, margin = classify_gender(test, male, female)
    print(f"{decided} {margin:.6f}")
    return 0


def _parse_degrees(parser, text: str):
    try:
        lo_text, hi_text = text.split("..", 1)
        lo, hi = int(lo_text), int(hi_text)
    except ValueError:
        parser.error(f"--degrees must look like A..B, got {text!r}")
    if not 0 <= lo <= hi <= 25:
        parser.error(f"--degrees must satisfy 0 <= A <= B <= 25, got {text!r}")
    return tuple(range(lo, hi + 1))


def _format_crossover(curve) -> str:
    try:
        return f"{find_crossover(curve):.1f}"
    except NoCrossover:
        return "-"


def _cmd_sweep(parser, args) -> int:
    algos = tuple(a.strip() for a in args.algos.split(",") if a.strip())
    for algo in algos:
        if algo not in ALGORITHMS:
            parser.error(f"unknown algorithm {algo!r}; choose from {','.join(ALGORITHMS)}")
    degrees = _parse_degrees(parser, args.degrees)
    manifest = load_manifest(args.manifest)
    result = run_degree_sweep(manifest, algos, degrees)
    emit_report(result, args.out_dir)
    for algo in algos:
        for gender in ("M", "F"):
            print(f"{algo} {gender} {_format_crossover(result.curve(algo, 'gender', gender))}")
        print(f"{algo} id {_format_crossover(result.curve(algo, 'identification'))}")
    return 0


def _cmd_synth(parser, args) -> int:
    synth_corpus(args.seed, args.speakers, args.utts, args.out_dir)
    return 0


def _cmd_mos(parser, args) -> int:
    table = aggregate_mos(args.ratings)
    for algo, mean, count in table.scores:
        print(f"{algo} {mean:.4f} {count}")
    return 0


_COMMANDS = {
    "transform": _cmd_transform,
    "enroll": _cmd_enroll,
    "identify": _cmd_identify,
    "gender": _cmd_gender,
    "sweep": _cmd_sweep,
    "synth": _cmd_synth,
    "mos": _cmd_mos,
}


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.WARNING, format="%(message)s")
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](parser, args)
    except (VoicemaskError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
