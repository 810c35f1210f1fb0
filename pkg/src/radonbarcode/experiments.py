"""Batch experiment runner: exhaustive vs evolutionary angle selection.

Two series are provided.  Series 1 pits the exhaustive 4-of-16 search against
the micro-DE optimizer restricted to the same 16-angle grid.  Series 2 keeps
the exhaustive 4-of-16 result as a baseline and frees the optimizer to pick
4 and then 8 angles from the whole-degree range.

Every stochastic run gets its own seed derived by hashing
(master seed, image id, method, run index), so any single run can be redone
in isolation and full reruns are byte-identical, including under --jobs.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .barcode import generate_barcode, render_barcode
from .image_io import GrayImage, make_phantom, PHANTOM_KINDS
from .microde import DEConfig, mde_optimize
from .radon import AngleSet, equidistant_angles
from .search import SearchResult, exhaustive_search, write_history_csv

log = logging.getLogger(__name__)

RUNS_PER_METHOD = 30
BASELINE_GRID = 16  # candidate angles for the exhaustive baseline
BASELINE_N = 4

METHOD_BF = "BF-4/16"
METHOD_MDE_4_180 = "MDE-4/180"
METHOD_MDE_8_180 = "MDE-8/180"
METHOD_CUSTOM = "custom"  # series 1's grid-restricted optimizer runs

NamedImage = tuple[str, GrayImage]


def derive_seed(master_seed: int, image_id: str, method: str, run: int) -> int:
    """Stable per-run seed; hashlib keeps it identical across processes."""
    key = f"{master_seed}|{image_id}|{method}|{run}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


@dataclass(frozen=True)
class RunRecord:
    """One optimizer (or baseline) invocation on one image."""

    image_id: str
    method: str
    run: int
    seed: int | None  # None for the deterministic baseline
    score: float | None
    angles: AngleSet
    history: tuple[tuple[int, float | None], ...]


@dataclass(frozen=True)
class MethodSummary:
    """Aggregate of every run of one method on one image."""

    image_id: str
    image_class: str
    method: str
    detail: str
    best_angles: AngleSet
    best_score: float | None
    runs: int
    score_mean: float | None
    score_std: float | None
    degenerate: bool  # every run's correlation was undefined


@dataclass(frozen=True)
class ClassSummary:
    image_class: str
    method: str
    score_mean: float | None
    score_std: float | None
    n_values: int


@dataclass(frozen=True)
class ExperimentReport:
    series: int
    master_seed: int
    runs_per_method: int
    methods: tuple[tuple[str, str], ...]  # (tag, detail) in run order
    per_image: tuple[MethodSummary, ...]
    per_class: tuple[ClassSummary, ...]
    run_records: tuple[RunRecord, ...]

    def to_json_dict(self) -> dict:
        return {
            "series": self.series,
            "master_seed": self.master_seed,
            "runs_per_method": self.runs_per_method,
            "methods": [{"method": m, "detail": d} for m, d in self.methods],
            "per_image": [
                {
                    "image": s.image_id,
                    "class": s.image_class,
                    "method": s.method,
                    "detail": s.detail,
                    "best_angles": list(s.best_angles),
                    "best_angles_rounded": list(s.best_angles.rounded()),
                    "best_score": s.best_score,
                    "runs": s.runs,
                    "score_mean": s.score_mean,
                    "score_std": s.score_std,
                    "degenerate": s.degenerate,
                }
                for s in self.per_image
            ],
            "per_class": [
                {
                    "class": c.image_class,
                    "method": c.method,
                    "score_mean": c.score_mean,
                    "score_std": c.score_std,
                    "n_values": c.n_values,
                }
                for c in self.per_class
            ],
        }


def phantom_suite(size: int) -> list[NamedImage]:
    """The bundled synthetic images, one per phantom kind."""
    return [(f"{kind}-{size}", make_phantom(kind, size)) for kind in PHANTOM_KINDS]


def _describe(n: int, cfg: DEConfig) -> str:
    return (
        f"micro-DE n={n} pop={cfg.pop_size} nfc={cfg.nfc_max} "
        f"f={cfg.f} cr={cfg.cr} step={cfg.step}"
    )


def _mean_std(values: list[float]) -> tuple[float | None, float | None]:
    """Sample statistics over the defined scores; std is 0.0 for one value."""
    if not values:
        return None, None
    if len(values) == 1:
        return values[0], 0.0
    return float(np.mean(values)), float(np.std(values, ddof=1))


def _summarize(
    image_id: str,
    image_class: str,
    method: str,
    detail: str,
    records: list[RunRecord],
) -> MethodSummary:
    defined = [r.score for r in records if r.score is not None]
    mean, std = _mean_std(defined)
    best = records[0]
    for r in records[1:]:
        b = -math.inf if best.score is None else best.score
        if r.score is not None and r.score > b:
            best = r
    return MethodSummary(
        image_id=image_id,
        image_class=image_class,
        method=method,
        detail=detail,
        best_angles=best.angles,
        best_score=best.score,
        runs=len(records),
        score_mean=mean,
        score_std=std,
        degenerate=not defined,
    )


def _mde_runs(
    image_id: str,
    img: GrayImage,
    method: str,
    n: int,
    cfg: DEConfig,
    master_seed: int,
    runs: int,
    jobs: int,
) -> list[RunRecord]:
    seeds = [derive_seed(master_seed, image_id, method, r) for r in range(runs)]

    def one(seed: int) -> SearchResult:
        return mde_optimize(img, n, replace(cfg, seed=seed))

    t0 = time.perf_counter()
    if jobs > 1 and runs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, seeds))
    else:
        results = [one(s) for s in seeds]
    log.info("%s %s: %d runs in %.2fs", image_id, method, runs, time.perf_counter() - t0)
    return [
        RunRecord(image_id, method, r, seeds[r], results[r].best_score.value,
                  results[r].best_angles, results[r].history)
        for r in range(runs)
    ]


def _baseline_run(image_id: str, img: GrayImage, jobs: int) -> RunRecord:
    t0 = time.perf_counter()
    res = exhaustive_search(img, BASELINE_N, equidistant_angles(BASELINE_GRID), jobs=jobs)
    log.info("%s %s: %d evaluations in %.2fs",
             image_id, METHOD_BF, res.evaluations, time.perf_counter() - t0)
    return RunRecord(image_id, METHOD_BF, 0, None, res.best_score.value,
                     res.best_angles, res.history)


def _aggregate_classes(
    summaries: list[MethodSummary],
    records: list[RunRecord],
    classes: dict[str, str],
) -> list[ClassSummary]:
    # pooled per-run best scores of every class member, per method
    order: list[tuple[str, str]] = []
    pools: dict[tuple[str, str], list[float]] = {}
    for s in summaries:
        key = (s.image_class, s.method)
        if key not in pools:
            pools[key] = []
            order.append(key)
    for r in records:
        key = (classes[r.image_id], r.method)
        if r.score is not None:
            pools[key].append(r.score)
    out = []
    for cls, method in order:
        values = pools[(cls, method)]
        mean, std = _mean_std(values)
        out.append(ClassSummary(cls, method, mean, std, len(values)))
    return out


def _run_series(
    series: int,
    images: list[NamedImage],
    plans: list[tuple[str, str, int, DEConfig | None]],
    master_seed: int,
    runs: int,
    jobs: int,
    classes: dict[str, str] | None,
) -> ExperimentReport:
    if not images:
        raise ValueError("image list is empty")
    ids = [i for i, _ in images]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate image ids")
    classes = dict(classes) if classes else {}
    for image_id in ids:
        classes.setdefault(image_id, image_id)

    summaries: list[MethodSummary] = []
    records: list[RunRecord] = []
    for image_id, img in images:
        for method, detail, n, cfg in plans:
            if cfg is None:
                recs = [_baseline_run(image_id, img, jobs)]
            else:
                recs = _mde_runs(image_id, img, method, n, cfg, master_seed, runs, jobs)
            records.extend(recs)
            summaries.append(_summarize(image_id, classes[image_id], method, detail, recs))

    return ExperimentReport(
        series=series,
        master_seed=master_seed,
        runs_per_method=runs,
        methods=tuple((m, d) for m, d, _, _ in plans),
        per_image=tuple(summaries),
        per_class=tuple(_aggregate_classes(summaries, records, classes)),
        run_records=tuple(records),
    )


def run_series1(
    images: list[NamedImage],
    cfg: DEConfig,
    master_seed: int,
    *,
    runs: int = RUNS_PER_METHOD,
    jobs: int = 1,
    classes: dict[str, str] | None = None,
) -> ExperimentReport:
    """Exhaustive 4-of-16 versus the optimizer restricted to the same grid.

    The optimizer's decoder step is forced to the 16-angle grid spacing so
    both methods pick from identical candidates.
    """
    grid_cfg = replace(cfg, step=180.0 / BASELINE_GRID)
    plans = [
        (METHOD_BF, f"exhaustive {BASELINE_N} of {BASELINE_GRID} equidistant angles", 0, None),
        (METHOD_CUSTOM, _describe(BASELINE_N, grid_cfg) + " (grid-restricted)",
         BASELINE_N, grid_cfg),
    ]
    return _run_series(1, images, plans, master_seed, runs, jobs, classes)


def run_series2(
    images: list[NamedImage],
    cfg4: DEConfig,
    cfg8: DEConfig,
    master_seed: int,
    *,
    runs: int = RUNS_PER_METHOD,
    jobs: int = 1,
    classes: dict[str, str] | None = None,
) -> ExperimentReport:
    """Exhaustive 4-of-16 baseline versus free 4- and 8-angle optimization."""
    plans = [
        (METHOD_BF, f"exhaustive {BASELINE_N} of {BASELINE_GRID} equidistant angles", 0, None),
        (METHOD_MDE_4_180, _describe(4, cfg4), 4, cfg4),
        (METHOD_MDE_8_180, _describe(8, cfg8), 8, cfg8),
    ]
    return _run_series(2, images, plans, master_seed, runs, jobs, classes)


# ---------------------------------------------------------------------------
# artifact emission

def _safe(name: str) -> str:
    return name.replace("/", "-").replace(" ", "_")


def write_report_json(report: ExperimentReport, path: str | os.PathLike,
                      extra: dict | None = None) -> None:
    payload = report.to_json_dict()
    if extra:
        payload.update(extra)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def write_per_run_csv(report: ExperimentReport, path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["image", "method", "run", "seed", "best_score", "best_angles"])
        for r in report.run_records:
            writer.writerow([
                r.image_id,
                r.method,
                r.run,
                "" if r.seed is None else r.seed,
                "" if r.score is None else repr(r.score),
                ";".join(repr(a) for a in r.angles),
            ])


def write_fitness_curves(report: ExperimentReport, directory: str | os.PathLike) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for r in report.run_records:
        name = f"{_safe(r.image_id)}_{_safe(r.method)}_{r.run:02d}.csv"
        write_history_csv(r.history, directory / name)


def write_best_barcodes(report: ExperimentReport, images: list[NamedImage],
                        directory: str | os.PathLike) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    by_id = dict(images)
    for s in report.per_image:
        bc = generate_barcode(by_id[s.image_id], s.best_angles)
        render_barcode(bc, directory / f"{_safe(s.image_id)}_{_safe(s.method)}.pgm")


def write_curves_svg(report: ExperimentReport, directory: str | os.PathLike) -> None:
    """One chart per image and method, overlaying every run's curve."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    grouped: dict[tuple[str, str], list[RunRecord]] = {}
    for r in report.run_records:
        grouped.setdefault((r.image_id, r.method), []).append(r)
    for (image_id, method), recs in grouped.items():
        name = f"{_safe(image_id)}_{_safe(method)}.svg"
        _write_svg(recs, directory / name, title=f"{image_id} {method}")


def _write_svg(recs: list[RunRecord], path: Path, title: str) -> None:
    w, h, pad = 640, 400, 45
    n_evals = max(len(r.history) for r in recs)
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<text x="{w // 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{pad}" y1="{h - pad}" x2="{w - pad}" y2="{h - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{h - pad}" stroke="black"/>',
        f'<text x="{w // 2}" y="{h - 8}" text-anchor="middle" font-size="11">evaluations</text>',
        f'<text x="14" y="{h // 2}" font-size="11" '
        f'transform="rotate(-90 14 {h // 2})" text-anchor="middle">best correlation</text>',
    ]
    for r in recs:
        pts = []
        for i, score in r.history:
            if score is None:
                continue
            x = pad + (i - 1) / max(n_evals - 1, 1) * (w - 2 * pad)
            y = (h - pad) - (score + 1.0) / 2.0 * (h - 2 * pad)
            pts.append(f"{x:.1f},{y:.1f}")
        if pts:
            lines.append(
                f'<polyline points="{" ".join(pts)}" fill="none" '
                f'stroke="steelblue" stroke-opacity="0.45" stroke-width="1"/>'
            )
    lines.append("</svg>")
    path.write_text("\n".join(lines) + "\n")


def write_all_artifacts(
    report: ExperimentReport,
    images: list[NamedImage],
    out_dir: str | os.PathLike,
    *,
    extra_json: dict | None = None,
    svg: bool = False,
) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_report_json(report, out / "report.json", extra=extra_json)
    write_per_run_csv(report, out / "per_run.csv")
    write_fitness_curves(report, out / "fitness_curves")
    write_best_barcodes(report, images, out / "barcodes")
    if svg:
        write_curves_svg(report, out / "curves_svg")
