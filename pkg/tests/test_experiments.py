"""Tests for the experiment runners and their artifacts."""

import csv
import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from radonbarcode.experiments import (
    BASELINE_GRID,
    BASELINE_N,
    METHOD_BF,
    METHOD_CUSTOM,
    METHOD_MDE_4_180,
    METHOD_MDE_8_180,
    derive_seed,
    phantom_suite,
    run_series1,
    run_series2,
    write_all_artifacts,
)
from radonbarcode.image_io import GrayImage, make_phantom
from radonbarcode.microde import DEConfig


@pytest.fixture(scope="module")
def series2_report():
    images = [("disk-32", make_phantom("disk", 32))]
    cfg4 = DEConfig(pop_size=6, nfc_max=30)
    cfg8 = DEConfig(pop_size=10, nfc_max=20)
    return images, run_series2(images, cfg4, cfg8, master_seed=99, runs=2)


# ---------------------------------------------------------------- seeds


def test_derive_seed_is_deterministic_and_distinct():
    s = derive_seed(42, "disk-32", METHOD_MDE_4_180, 0)
    assert s == derive_seed(42, "disk-32", METHOD_MDE_4_180, 0)
    assert s >= 0
    variants = {
        derive_seed(42, "disk-32", METHOD_MDE_4_180, 1),
        derive_seed(42, "disk-32", METHOD_MDE_8_180, 0),
        derive_seed(42, "square-32", METHOD_MDE_4_180, 0),
        derive_seed(43, "disk-32", METHOD_MDE_4_180, 0),
    }
    assert s not in variants
    assert len(variants) == 4


def test_phantom_suite_names_and_sizes():
    suite = phantom_suite(16)
    assert [name for name, _ in suite] == [
        "shepp-logan-16", "disk-16", "square-16", "gradient-16",
    ]
    assert all(img.height == img.width == 16 for _, img in suite)


# ---------------------------------------------------------------- structure


def test_series2_report_structure(series2_report):
    _, report = series2_report
    assert report.series == 2
    assert report.master_seed == 99
    assert report.runs_per_method == 2
    assert [m for m, _ in report.methods] == [METHOD_BF, METHOD_MDE_4_180, METHOD_MDE_8_180]

    # one baseline record plus two runs for each optimizer method
    assert len(report.run_records) == 1 + 2 + 2
    bf = [r for r in report.run_records if r.method == METHOD_BF]
    assert len(bf) == 1
    assert bf[0].seed is None
    assert bf[0].run == 0
    assert len(bf[0].history) == 1820

    for method, nfc in ((METHOD_MDE_4_180, 30), (METHOD_MDE_8_180, 20)):
        recs = [r for r in report.run_records if r.method == method]
        assert [r.run for r in recs] == [0, 1]
        assert [r.seed for r in recs] == [
            derive_seed(99, "disk-32", method, 0),
            derive_seed(99, "disk-32", method, 1),
        ]
        assert all(len(r.history) == nfc for r in recs)

    assert len(report.per_image) == 3
    assert {s.image_class for s in report.per_image} == {"disk-32"}


def test_series2_summary_statistics(series2_report):
    _, report = series2_report
    for summary in report.per_image:
        recs = [r for r in report.run_records
                if r.method == summary.method and r.image_id == summary.image_id]
        scores = [r.score for r in recs if r.score is not None]
        assert not summary.degenerate
        assert summary.runs == len(recs)
        assert summary.score_mean == pytest.approx(np.mean(scores), abs=1e-12)
        if len(scores) == 1:
            assert summary.score_std == 0.0
        else:
            assert summary.score_std == pytest.approx(np.std(scores, ddof=1), abs=1e-12)
        assert summary.best_score == max(scores)
        best = max(recs, key=lambda r: -math.inf if r.score is None else r.score)
        assert summary.best_angles == best.angles


def test_series1_restricts_optimizer_to_grid():
    images = [("square-32", make_phantom("square", 32))]
    cfg = DEConfig(pop_size=6, nfc_max=30)
    report = run_series1(images, cfg, master_seed=7, runs=2)
    assert report.series == 1
    assert [m for m, _ in report.methods] == [METHOD_BF, METHOD_CUSTOM]
    spacing = 180.0 / BASELINE_GRID
    for record in report.run_records:
        if record.method == METHOD_CUSTOM:
            assert len(record.angles) == BASELINE_N
            for a in record.angles:
                assert a / spacing == pytest.approx(round(a / spacing), abs=1e-12)
    custom = next(d for m, d in report.methods if m == METHOD_CUSTOM)
    assert "grid" in custom


def test_degenerate_image_is_flagged():
    images = [("flat-16", GrayImage(np.full((16, 16), 0.5)))]
    cfg = DEConfig(pop_size=4, nfc_max=8)
    report = run_series1(images, cfg, master_seed=1, runs=1)
    for summary in report.per_image:
        assert summary.degenerate
        assert summary.score_mean is None
        assert summary.best_score is None
    for cls in report.per_class:
        assert cls.n_values == 0
        assert cls.score_mean is None
    # the report still serializes cleanly
    json.dumps(report.to_json_dict())


def test_class_pooling_combines_member_runs():
    images = [
        ("disk a", make_phantom("disk", 16)),
        ("disk b", make_phantom("disk", 16)),
    ]
    classes = {"disk a": "round", "disk b": "round"}
    cfg = DEConfig(pop_size=4, nfc_max=8)
    report = run_series1(images, cfg, master_seed=5, runs=2, classes=classes)

    assert {c.image_class for c in report.per_class} == {"round"}
    for cls in report.per_class:
        members = [r.score for r in report.run_records
                   if r.method == cls.method and r.score is not None]
        assert cls.n_values == len(members)
        assert cls.score_mean == pytest.approx(np.mean(members), abs=1e-12)
    bf_pool = next(c for c in report.per_class if c.method == METHOD_BF)
    assert bf_pool.n_values == 2  # one exhaustive run per member image
    mde_pool = next(c for c in report.per_class if c.method == METHOD_CUSTOM)
    assert mde_pool.n_values == 4  # two runs for each of the two members


def test_minimal_budget_report_is_well_formed():
    images = [("disk-16", make_phantom("disk", 16))]
    report = run_series2(
        images,
        DEConfig(pop_size=6, nfc_max=6),
        DEConfig(pop_size=10, nfc_max=10),
        master_seed=3,
        runs=2,
    )
    for record in report.run_records:
        if record.method == METHOD_MDE_4_180:
            assert len(record.history) == 6
        elif record.method == METHOD_MDE_8_180:
            assert len(record.history) == 10
        assert record.score is not None
    assert len(report.per_image) == 3


def test_runner_validation():
    cfg = DEConfig(pop_size=4, nfc_max=8)
    with pytest.raises(ValueError):
        run_series1([], cfg, master_seed=0, runs=1)
    img = make_phantom("disk", 16)
    with pytest.raises(ValueError):
        run_series1([("a", img), ("a", img)], cfg, master_seed=0, runs=1)


# ---------------------------------------------------------------- artifacts


def test_artifact_layout_and_reproducibility(tmp_path):
    images = [("disk-16", make_phantom("disk", 16))]
    cfg4 = DEConfig(pop_size=6, nfc_max=18)
    cfg8 = DEConfig(pop_size=10, nfc_max=10)

    first = run_series2(images, cfg4, cfg8, master_seed=11, runs=2, jobs=1)
    second = run_series2(images, cfg4, cfg8, master_seed=11, runs=2, jobs=2)

    dir_a, dir_b = tmp_path / "a", tmp_path / "b"
    write_all_artifacts(first, images, dir_a, svg=True)
    write_all_artifacts(second, images, dir_b, svg=True)

    names = sorted(p.relative_to(dir_a) for p in dir_a.rglob("*") if p.is_file())
    assert (dir_a / "report.json").exists()
    assert (dir_a / "per_run.csv").exists()
    assert (dir_a / "fitness_curves" / "disk-16_BF-4-16_00.csv").exists()
    assert (dir_a / "fitness_curves" / "disk-16_MDE-4-180_01.csv").exists()
    assert (dir_a / "barcodes" / "disk-16_MDE-8-180.pgm").exists()
    assert (dir_a / "barcodes" / "disk-16_MDE-8-180.txt").exists()
    assert (dir_a / "curves_svg" / "disk-16_BF-4-16.svg").exists()

    # a rerun with different parallelism produces byte-identical artifacts
    assert names == sorted(p.relative_to(dir_b) for p in dir_b.rglob("*") if p.is_file())
    for rel in names:
        assert (dir_a / rel).read_bytes() == (dir_b / rel).read_bytes(), rel


def test_report_json_content(tmp_path, series2_report):
    images, report = series2_report
    out = tmp_path / "report.json"
    from radonbarcode.experiments import write_report_json

    write_report_json(report, out, extra={"flags": {"seed": 99}})
    data = json.loads(out.read_text())
    assert data["series"] == 2
    assert data["master_seed"] == 99
    assert data["flags"] == {"seed": 99}
    assert len(data["per_image"]) == 3
    for entry in data["per_image"]:
        assert set(entry) >= {"image", "method", "best_angles", "best_angles_rounded",
                              "best_score", "score_mean", "score_std", "degenerate"}


def test_per_run_csv_matches_report(tmp_path, series2_report):
    images, report = series2_report
    path = tmp_path / "per_run.csv"
    from radonbarcode.experiments import write_per_run_csv

    write_per_run_csv(report, path)
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == len(report.run_records)

    # recompute each method's mean from the CSV and compare with the summary
    for summary in report.per_image:
        scores = [float(r["best_score"]) for r in rows
                  if r["method"] == summary.method and r["best_score"] != ""]
        assert summary.score_mean == pytest.approx(np.mean(scores), abs=1e-12)
    bf_row = next(r for r in rows if r["method"] == METHOD_BF)
    assert bf_row["seed"] == ""
    assert ";" in next(r for r in rows if r["method"] == METHOD_MDE_4_180)["best_angles"]


def test_curves_svg_is_valid_xml(tmp_path, series2_report):
    images, report = series2_report
    from radonbarcode.experiments import write_curves_svg

    write_curves_svg(report, tmp_path)
    svgs = sorted(tmp_path.glob("*.svg"))
    assert len(svgs) == 3
    for path in svgs:
        root = ET.parse(path).getroot()
        assert root.tag.endswith("svg")
        polylines = [el for el in root.iter() if el.tag.endswith("polyline")]
        assert polylines
