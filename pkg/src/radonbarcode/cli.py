"""Command-line front end: barcode generation, angle optimization, experiments.

Angle specs are either ``equidistant:<n>`` (n evenly spaced angles starting
at 0) or an explicit comma list like ``30,50,120,160``.  Images are loaded,
converted to grayscale and resampled to a square working size; the default
size is 32 and can be set with the RADONBARCODE_SIZE environment variable or
the --size flag.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .barcode import generate_barcode, render_barcode
from .image_io import DEFAULT_WORKING_SIZE, GrayImage, load_image, normalize
from .microde import DEConfig, default_config, mde_optimize
from .radon import AngleSet, equidistant_angles
from .search import DEFAULT_BUDGET_CAP, exhaustive_search, write_history_csv, write_result_json
from .experiments import (
    RUNS_PER_METHOD,
    phantom_suite,
    run_series1,
    run_series2,
    write_all_artifacts,
)

IMAGE_SUFFIXES = {".png", ".pgm", ".bmp"}


def _env_size() -> int:
    return int(os.environ.get("RADONBARCODE_SIZE", DEFAULT_WORKING_SIZE))


def parse_angle_spec(spec: str) -> AngleSet:
    if spec.startswith("equidistant:"):
        return equidistant_angles(int(spec.split(":", 1)[1]))
    return AngleSet(float(tok) for tok in spec.split(","))


def _load_working_image(path: str, size: int) -> GrayImage:
    return normalize(load_image(path), size, size)


def _read_class_map(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        name, _, cls = line.partition(",")
        out[Path(name.strip()).stem] = cls.strip()
    return out


def _collect_images(source: str, size: int) -> list[tuple[str, GrayImage]]:
    if source == "phantoms":
        return phantom_suite(size)
    directory = Path(source)
    if not directory.is_dir():
        raise ValueError(f"image source {source!r} is not a directory (or 'phantoms')")
    files = sorted(p for p in directory.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    if not files:
        raise ValueError(f"no readable images (png/pgm/bmp) in {directory}")
    return [(p.stem, _load_working_image(str(p), size)) for p in files]


def cmd_barcode(args: argparse.Namespace) -> int:
    img = _load_working_image(args.image, args.size)
    angles = parse_angle_spec(args.angles)
    bc = generate_barcode(img, angles)
    out = Path(args.output) if args.output else Path(Path(args.image).stem + "_barcode.pgm")
    render_barcode(bc, out)
    print(f"{bc.total_bits} bits over {len(angles)} angles -> {out} (+ .txt)")
    return 0


def cmd_optimize(args: argparse.Namespace) -> int:
    img = _load_working_image(args.image, args.size)
    flags = {
        "image": args.image, "n": args.n, "method": args.method, "size": args.size,
        "seed": args.seed, "jobs": args.jobs,
    }
    if args.method == "bf":
        candidates = parse_angle_spec(args.candidates)
        flags.update({"candidates": args.candidates, "budget_cap": args.budget_cap})
        result = exhaustive_search(img, args.n, candidates,
                                   budget_cap=args.budget_cap, jobs=args.jobs)
    else:
        base = default_config(args.n)
        cfg = DEConfig(
            pop_size=args.np if args.np is not None else base.pop_size,
            nfc_max=args.nfc if args.nfc is not None else base.nfc_max,
            f=args.f,
            cr=args.cr,
            step=args.step,
            seed=args.seed,
            value_to_reach=args.vtr,
        )
        flags.update({"np": cfg.pop_size, "nfc": cfg.nfc_max, "f": cfg.f,
                      "cr": cfg.cr, "step": cfg.step, "vtr": cfg.value_to_reach})
        result = mde_optimize(img, args.n, cfg, jobs=args.jobs)

    out = Path(args.output)
    write_result_json(result, out, extra={"flags": flags})
    write_history_csv(result.history, out.with_suffix(".csv"))
    score = result.best_score.value
    print(f"best angles: {', '.join(f'{a:g}' for a in result.best_angles)}")
    print(f"correlation: {'undefined' if score is None else f'{score:.6f}'} "
          f"({result.evaluations} evaluations) -> {out}")
    return 0


def cmd_experiment(args: argparse.Namespace) -> int:
    images = _collect_images(args.images, args.size)
    classes = _read_class_map(args.classes) if args.classes else None
    if args.series == 1:
        report = run_series1(
            images, default_config(4), args.seed,
            runs=args.runs, jobs=args.jobs, classes=classes,
        )
    else:
        report = run_series2(
            images, default_config(4), default_config(8), args.seed,
            runs=args.runs, jobs=args.jobs, classes=classes,
        )
    flags = {
        "series": args.series, "images": args.images, "seed": args.seed,
        "size": args.size, "runs": args.runs, "jobs": args.jobs, "svg": args.svg,
    }
    write_all_artifacts(report, images, args.output,
                        extra_json={"flags": flags}, svg=args.svg)
    print(f"report written to {Path(args.output) / 'report.json'}")
    for c in report.per_class:
        mean = "undefined" if c.score_mean is None else f"{c.score_mean:.4f}"
        std = "" if c.score_std is None else f" +/- {c.score_std:.4f}"
        print(f"  {c.image_class:20s} {c.method:12s} {mean}{std}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # SUPPRESS so a subcommand without -v does not clobber a global -v
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS,
                        help="log per-method timings")
    parser = argparse.ArgumentParser(
        prog="radonbarcode",
        description="Radon barcodes and projection-angle optimization for grayscale images.",
        parents=[common],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("barcode", help="generate a Radon barcode for an image", parents=[common])
    p.add_argument("image", help="path to a png/pgm/bmp image")
    p.add_argument("--angles", default="equidistant:8",
                   help="angle spec: equidistant:<n> or comma list (default equidistant:8)")
    p.add_argument("--size", type=int, default=_env_size(),
                   help="square working size (default %(default)s)")
    p.add_argument("--output", help="stripe image path (default <image>_barcode.pgm)")
    p.set_defaults(func=cmd_barcode)

    p = sub.add_parser("optimize", help="find the n angles that reconstruct an image best",
                       parents=[common])
    p.add_argument("image")
    p.add_argument("-n", type=int, required=True, help="number of angles to select")
    p.add_argument("--method", choices=("bf", "mde"), default="mde")
    p.add_argument("--candidates", default="equidistant:16",
                   help="bf only: candidate angle spec (default equidistant:16)")
    p.add_argument("--budget-cap", type=int, default=DEFAULT_BUDGET_CAP,
                   help="bf only: refuse more combinations than this (default %(default)s)")
    p.add_argument("--np", type=int, default=None, help="mde population size")
    p.add_argument("--nfc", type=int, default=None, help="mde evaluation budget")
    p.add_argument("--f", type=float, default=0.5, help="mde differential weight")
    p.add_argument("--cr", type=float, default=0.9, help="mde crossover rate")
    p.add_argument("--step", type=float, default=10.0,
                   help="mde decoder grid step in degrees (default %(default)s)")
    p.add_argument("--vtr", type=float, default=None, help="mde early-stop correlation")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=_env_size())
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--output", default="optimize_result.json")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("experiment", help="run a full comparison series and write a report",
                       parents=[common])
    p.add_argument("--series", type=int, choices=(1, 2), required=True)
    p.add_argument("--images", default="phantoms",
                   help="image directory, or 'phantoms' for the built-in suite")
    p.add_argument("--classes", default=None,
                   help="optional csv file mapping 'filename,class'")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--runs", type=int, default=RUNS_PER_METHOD,
                   help="stochastic runs per method (default %(default)s)")
    p.add_argument("--size", type=int, default=_env_size())
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--svg", action="store_true", help="also render fitness-curve charts")
    p.add_argument("--output", default="experiment_out")
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    verbose = getattr(args, "verbose", False)
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(message)s")
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
