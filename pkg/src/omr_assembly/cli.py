"""Command-line entry point."""

import argparse
import logging
import sys

from . import pipeline, voicing
from .errors import OmrError


def _parse_time(text):
    try:
        beats, beat_type = text.split("/")
        return voicing.TimeSpec(beats=int(beats), beat_type=int(beat_type))
    except (ValueError, OmrError) as exc:
        raise argparse.ArgumentTypeError(f"bad time signature {text!r}: {exc}")


def _parse_threshold(text):
    try:
        category, value = text.split("=")
        return category, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected CATEGORY=VALUE, got {text!r}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="omr-assembly",
        description="Assemble a sheet music image plus detection results "
                    "into a MusicXML score.")
    sub = parser.add_subparsers(dest="command", required=True)

    asm = sub.add_parser("assemble", help="run the full pipeline")
    asm.add_argument("image", help="page image (PNG or JPEG)")
    source = asm.add_mutually_exclusive_group(required=True)
    source.add_argument("--detections", metavar="DIR",
                        help="fixture directory with .det files")
    source.add_argument("--detector", metavar="CMD",
                        help="detector command template with {image} and "
                             "{category} placeholders")
    asm.add_argument("--fifths", type=int, default=0,
                     help="key signature (sharps positive)")
    asm.add_argument("--time", type=_parse_time,
                     default=voicing.TimeSpec(), metavar="B/T",
                     help="time signature, default 4/4")
    asm.add_argument("--mode", choices=("seq", "par"), default="seq")
    asm.add_argument("--workers", type=int, default=1)
    asm.add_argument("--out", default="score.musicxml")
    asm.add_argument("--split-staves", action="store_true",
                     help="also write one file per staff")
    asm.add_argument("--dump-measures", metavar="DIR",
                     help="write each standardized measure image")
    asm.add_argument("--dump-overlays", metavar="DIR",
                     help="write fitted staff-line overlay images")
    asm.add_argument("--confidence", type=_parse_threshold, action="append",
                     default=[], metavar="CAT=V",
                     help="per-category confidence threshold")
    asm.add_argument("--semantics", metavar="FILE",
                     help="YAML symbol semantics table")
    asm.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    config = pipeline.PipelineConfig(
        image_path=args.image,
        detections_dir=args.detections,
        detector_command=args.detector,
        output_path=args.out,
        fifths=args.fifths,
        time_spec=args.time,
        thresholds=dict(args.confidence),
        mode="parallel" if args.mode == "par" else "sequential",
        workers=args.workers,
        split_staves=args.split_staves,
        dump_measures=args.dump_measures,
        dump_overlays=args.dump_overlays,
        semantics_path=args.semantics,
    )
    try:
        _, report = pipeline.run(config)
    except OmrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(report.table())
    return 0


if __name__ == "__main__":
    sys.exit(main())
