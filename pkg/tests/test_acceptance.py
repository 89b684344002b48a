"""Acceptance suite: one test per release criterion, each printing a
pass/fail line. Run with ``pytest tests/test_acceptance.py -v -s``."""

from __future__ import annotations

import subprocess
import sys
import time

import numpy as np
import pytest
import scipy.stats
from fastapi.testclient import TestClient
from PIL import Image

from dermcontrast.audit import AXIS_FST, subgroup_audit
from dermcontrast.cohort import cross_tab, make_splits, split_by_median, train_count
from dermcontrast.contrast import ContrastScore, contrast_ratio, srgb_channel_to_linear
from dermcontrast.fileio import (
    read_groups_csv,
    write_annotations_jsonl,
    write_cohort_csv,
    write_groups_csv,
    write_predictions_csv,
)
from dermcontrast.records import (
    GROUP_HIGH,
    GROUP_LOW,
    ImageRecord,
    PredictionRecord,
)
from dermcontrast.server import create_app
from dermcontrast.stats import auc, paired_ttest

from .conftest import grey_annotation, make_record
from .oracles import CONTRAST_GREY119_VS_WHITE, expected_train_total, pair_count_auc


def check(name: str, condition: bool, detail: str = "") -> None:
    status = "PASS" if condition else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[acceptance] {name}: {status}{suffix}")
    assert condition, f"{name}{suffix}"


def test_wcag_formula_suite():
    start = time.perf_counter()
    ok_wb = abs(contrast_ratio((255, 255, 255), (0, 0, 0)).value - 21.0) < 1e-9

    rng = np.random.default_rng(2024)
    ok_self = True
    ok_sym = True
    for _ in range(1000):
        a = tuple(int(v) for v in rng.integers(0, 256, 3))
        b = tuple(int(v) for v in rng.integers(0, 256, 3))
        ok_self = ok_self and contrast_ratio(a, a).value == 1.0
        ok_sym = ok_sym and contrast_ratio(a, b).value == contrast_ratio(b, a).value

    c_star = 0.03928 * 255
    gap = abs(
        srgb_channel_to_linear(c_star + 1e-9) - srgb_channel_to_linear(c_star - 1e-9)
    )
    ok_cont = gap < 1e-6
    elapsed = time.perf_counter() - start
    check(
        "wcag-formula-suite",
        ok_wb and ok_self and ok_sym and ok_cont and elapsed < 1.0,
        f"breakpoint gap {gap:.2e}, {elapsed:.2f}s",
    )


def test_wcag_reference_value():
    score = contrast_ratio((119, 119, 119), (255, 255, 255)).value
    check(
        "wcag-reference-value",
        abs(score - CONTRAST_GREY119_VS_WHITE) < 1e-3,
        f"score {score:.6f} vs oracle {CONTRAST_GREY119_VS_WHITE:.6f}",
    )


def test_auc_oracle_equivalence():
    start = time.perf_counter()
    rng = np.random.default_rng(7)
    n_checked = 0
    worst = 0.0
    while n_checked < 1000:
        n = int(rng.integers(2, 51))
        labels = rng.integers(0, 2, n).astype(bool)
        if labels.all() or not labels.any():
            continue
        # integer grid mixes ties; occasional continuous scores mix none
        if rng.integers(2):
            scores = rng.integers(0, 8, n).astype(float)
        else:
            scores = rng.normal(size=n)
        diff = abs(auc(labels, scores) - pair_count_auc(labels, scores))
        worst = max(worst, diff)
        n_checked += 1
    elapsed = time.perf_counter() - start
    check(
        "auc-oracle-equivalence",
        worst < 1e-12 and elapsed < 5.0,
        f"worst |diff| {worst:.2e} over 1000 instances, {elapsed:.2f}s",
    )


def test_paired_ttest_oracle():
    rng = np.random.default_rng(99)
    worst_t = worst_p = 0.0
    for _ in range(100):
        n = int(rng.integers(5, 201))
        a = rng.normal(10.0, 3.0, n)
        b = a + rng.normal(0.05, 1.0, n)
        mine = paired_ttest(a, b)
        ref = scipy.stats.ttest_rel(a, b)
        worst_t = max(worst_t, abs(mine.t - ref.statistic))
        worst_p = max(worst_p, abs(mine.p - ref.pvalue))
    check(
        "paired-ttest-oracle",
        worst_t < 1e-6 and worst_p < 1e-6,
        f"worst |dt| {worst_t:.2e}, worst |dp| {worst_p:.2e}",
    )


def _predictions_with_exact_auc(
    thousandths: int, subgroup_tag: str, fst: str, model_id: str, seed: int = 0
):
    """25 positives x 40 negatives = 1000 pairs, exactly ``thousandths`` of
    them won, so the single-seed AUC is the published mean to the bit."""
    assert 0 <= thousandths <= 1000
    records, preds = [], []
    full_wins, remainder = divmod(thousandths, 40)
    placements = [40] * full_wins + ([remainder] if remainder else [])
    placements += [0] * (25 - len(placements))
    idx = 0
    for wins in placements:
        image_id = f"{model_id}-{subgroup_tag}-p{idx}"
        rec = make_record(image_id, fst_group=fst, malignant=True)
        rec.contrast_score = ContrastScore(5.0, 0.8, 0.2)
        rec.contrast_group = GROUP_HIGH
        records.append(rec)
        preds.append(
            PredictionRecord(image_id, model_id, seed, "finetune_eval", wins / 41.0)
        )
        idx += 1
    for j in range(40):
        image_id = f"{model_id}-{subgroup_tag}-n{j}"
        rec = make_record(image_id, fst_group=fst, malignant=False)
        rec.contrast_score = ContrastScore(5.0, 0.8, 0.2)
        rec.contrast_group = GROUP_HIGH
        records.append(rec)
        preds.append(
            PredictionRecord(image_id, model_id, seed, "finetune_eval", (j + 0.5) / 41.0)
        )
    return records, preds


def test_gap_reproduction_from_published_means():
    # by-skin-tone means after fine-tuning, and the expected gaps V-VI minus I-II
    skin_tone_means = {
        "inception": (0.792, 0.828, 0.036),
        "efficientnet": (0.776, 0.862, 0.086),
        "swinv2": (0.814, 0.895, 0.081),
    }
    all_ok = True
    details = []
    for model, (light, dark, published_gap) in skin_tone_means.items():
        records, preds = [], []
        for mean, fst in ((light, "I-II"), (dark, "V-VI")):
            r, p = _predictions_with_exact_auc(
                round(mean * 1000), fst.replace("-", ""), fst, model
            )
            records += r
            preds += p
        report = subgroup_audit(preds, records, axis=AXIS_FST)
        cell_light = report.cell(model, "finetune_eval", "I-II")
        cell_dark = report.cell(model, "finetune_eval", "V-VI")
        gap_row = report.cell(model, "finetune_eval", "gap:V-VI-I-II")
        ok = (
            cell_light.mean_auc == light
            and cell_dark.mean_auc == dark
            and gap_row.mean_auc == cell_dark.mean_auc - cell_light.mean_auc
            and abs(gap_row.mean_auc - published_gap) < 1e-12
        )
        all_ok = all_ok and ok
        details.append(f"{model} gap {gap_row.mean_auc:+.3f}")
    # by-contrast means after fine-tuning: high minus low
    contrast_means = {
        "inception": (0.810, 0.809, 0.001),
        "efficientnet": (0.822, 0.819, 0.003),
        "swinv2": (0.852, 0.832, 0.020),
    }
    for model, (high, low, published_gap) in contrast_means.items():
        gap = high - low
        ok = gap == high - low and abs(gap - published_gap) < 1e-12
        all_ok = all_ok and ok
        details.append(f"{model} contrast gap {gap:+.3f}")
    check("gap-reproduction", all_ok, "; ".join(details))


# Reference cohort tally: images per (contrast group, FST group).
REFERENCE_TALLY = {
    (GROUP_HIGH, "I-II"): 88,
    (GROUP_HIGH, "III-IV"): 134,
    (GROUP_HIGH, "V-VI"): 92,
    (GROUP_LOW, "I-II"): 114,
    (GROUP_LOW, "III-IV"): 103,
    (GROUP_LOW, "V-VI"): 111,
}


def test_grouping_properties(tmp_path):
    # median split on five distinct scores: 2 high / 3 low, median element low
    records = []
    for i, value in enumerate([1.0, 2.0, 3.0, 4.0, 5.0]):
        rec = make_record(f"m{i}")
        rec.contrast_score = ContrastScore(value, 0.9, 0.1)
        records.append(rec)
    grouping = split_by_median(records)
    ok_sizes = (grouping.n_high, grouping.n_low) == (2, 3)
    ok_median_low = records[2].contrast_group == GROUP_LOW

    # ties at the cutoff all land low
    tie_records = []
    for i, value in enumerate([1.0, 3.0, 3.0, 3.0, 9.0]):
        rec = make_record(f"t{i}")
        rec.contrast_score = ContrastScore(value, 0.9, 0.1)
        tie_records.append(rec)
    tie_grouping = split_by_median(tie_records)
    ok_ties = (
        tie_grouping.cutoff == 3.0
        and all(r.contrast_group == GROUP_LOW for r in tie_records[:4])
        and tie_records[4].contrast_group == GROUP_HIGH
    )

    # cross-tab totals always equal group sizes
    rng = np.random.default_rng(55)
    ok_totals = True
    for _ in range(20):
        n = int(rng.integers(5, 120))
        rand_records = []
        for i in range(n):
            rec = make_record(
                f"r{i}", fst_group=["I-II", "III-IV", "V-VI"][int(rng.integers(3))]
            )
            rec.contrast_score = ContrastScore(float(rng.uniform(1, 21)), 0.9, 0.1)
            rand_records.append(rec)
        g = split_by_median(rand_records)
        tab = cross_tab(g.records)
        ok_totals = ok_totals and (
            tab.row_totals[GROUP_HIGH] == g.n_high
            and tab.row_totals[GROUP_LOW] == g.n_low
            and tab.total == g.n_high + g.n_low
        )

    # fixture manifest with the reference group assignments reproduces the tally
    fixture_records = []
    i = 0
    for (group, fst), count in REFERENCE_TALLY.items():
        for _ in range(count):
            rec = make_record(f"f{i:04d}", fst_group=fst)
            rec.contrast_score = ContrastScore(
                8.0 if group == GROUP_HIGH else 2.0, 0.9, 0.1
            )
            rec.contrast_group = group
            fixture_records.append(rec)
            i += 1
    groups_path = tmp_path / "groups.csv"
    cohort_path = tmp_path / "cohort.csv"
    write_groups_csv(groups_path, fixture_records, cutoff=5.0)
    write_cohort_csv(cohort_path, fixture_records)
    from dermcontrast.fileio import read_cohort_csv

    loaded = read_cohort_csv(cohort_path)
    group_map, _, _ = read_groups_csv(groups_path)
    for rec in loaded:
        rec.contrast_group = group_map[rec.image_id]
    tab = cross_tab(loaded)
    ok_reference = (
        tab.row_totals[GROUP_HIGH] == 314
        and tab.row_totals[GROUP_LOW] == 328
        and tab.total == 642
        and tab.counts[(GROUP_HIGH, "III-IV")] == 134
    )
    check(
        "grouping-properties",
        ok_sizes and ok_median_low and ok_ties and ok_totals and ok_reference,
        f"reference totals high={tab.row_totals[GROUP_HIGH]} low={tab.row_totals[GROUP_LOW]}",
    )


def _synthetic_grouped_cohort(n=642, seed=11):
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n):
        rec = make_record(
            f"img{i:04d}",
            fst_group=["I-II", "III-IV", "V-VI"][int(rng.integers(3))],
            malignant=bool(rng.integers(2)),
        )
        rec.contrast_score = ContrastScore(float(rng.uniform(1.1, 20.9)), 0.9, 0.2)
        records.append(rec)
    split_by_median(records)
    return records


def test_split_determinism():
    records = _synthetic_grouped_cohort()
    seeds = [0, 1, 2, 3, 4]
    first = make_splits(records, seeds)
    second = make_splits(records, seeds)
    ok_rerun = first.assignments == second.assignments

    rng = np.random.default_rng(123)
    permuted = list(records)
    rng.shuffle(permuted)
    third = make_splits(permuted, seeds)
    ok_permuted = third.assignments == first.assignments

    strata: dict[str, int] = {}
    for r in records:
        key = f"{int(r.malignant)}|{r.fst_group}|{r.contrast_group}"
        strata[key] = strata.get(key, 0) + 1
    per_seed_train = {
        seed: sum(
            1 for a in first.assignments if a.seed == seed and a.phase == "finetune_train"
        )
        for seed in seeds
    }
    expected = expected_train_total(strata.values(), 0.8)
    ok_counts = all(v == expected for v in per_seed_train.values())

    # per-stratum train fraction within one record of 0.8
    ok_fraction = True
    phase_by_key = {(a.image_id, a.seed): a.phase for a in first.assignments}
    by_stratum: dict[str, list[str]] = {}
    for r in records:
        key = f"{int(r.malignant)}|{r.fst_group}|{r.contrast_group}"
        by_stratum.setdefault(key, []).append(r.image_id)
    for seed in seeds:
        for key, ids in by_stratum.items():
            n_train = sum(
                1 for i in ids if phase_by_key[(i, seed)] == "finetune_train"
            )
            ok_fraction = ok_fraction and abs(n_train - 0.8 * len(ids)) <= 1.0
    check(
        "split-determinism",
        ok_rerun and ok_permuted and ok_counts and ok_fraction,
        f"{len(first.assignments)} assignments, {expected} train per seed",
    )


def test_end_to_end_synthetic_audit(tmp_path):
    start = time.perf_counter()
    n = 200
    records = [
        make_record(f"img{i:03d}", fst_group=["I-II", "III-IV", "V-VI"][i % 3],
                    malignant=i % 2 == 0)
        for i in range(n)
    ]
    annotations = [
        grey_annotation(f"img{i:03d}", "ann-a", fg=40 + (180 * i) // n, bg=245)
        for i in range(n)
    ]
    cohort_path = tmp_path / "cohort.csv"
    log_path = tmp_path / "annotations.jsonl"
    out = tmp_path / "out"
    write_cohort_csv(cohort_path, records)
    write_annotations_jsonl(log_path, annotations)

    def run(*args):
        proc = subprocess.run(
            [sys.executable, "-m", "dermcontrast.cli", *args],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        return proc

    run("score", str(cohort_path), str(log_path), "--labeller", "ann-a",
        "--out-dir", str(out))
    run("split", str(out / "scores.csv"), "--out-dir", str(out))
    run("splits-gen", str(out / "groups.csv"), str(cohort_path), "--seeds", "5",
        "--out-dir", str(out))

    # predictions: high group perfectly separated; low group's positive and
    # negative score multisets identical, so its AUC is exactly 0.5 by design
    groups, _, _ = read_groups_csv(out / "groups.csv")
    rng = np.random.default_rng(20260809)
    preds = []
    for seed in range(5):
        low_pos = [i for i in range(n) if groups[f"img{i:03d}"] == GROUP_LOW and i % 2 == 0]
        low_neg = [i for i in range(n) if groups[f"img{i:03d}"] == GROUP_LOW and i % 2 == 1]
        shared = list(rng.uniform(0.05, 0.95, max(len(low_pos), len(low_neg))))
        prob_of = {}
        for k, i in enumerate(rng.permutation(low_pos)):
            prob_of[int(i)] = shared[k % len(shared)]
        for k, i in enumerate(rng.permutation(low_neg)):
            prob_of[int(i)] = shared[k % len(shared)]
        for i in range(n):
            image_id = f"img{i:03d}"
            if groups[image_id] == GROUP_HIGH:
                prob = 0.9 if i % 2 == 0 else 0.1
            else:
                prob = prob_of[i]
            preds.append(
                PredictionRecord(image_id, "model-a", seed, "ood_eval", float(prob))
            )
    preds_path = tmp_path / "predictions.csv"
    write_predictions_csv(preds_path, preds)

    run("audit", str(preds_path), str(out / "groups.csv"), str(cohort_path),
        "--axis", "contrast_group", "--out-dir", str(out))

    cells = {}
    for line in (out / "report.csv").read_text().strip().split("\n")[1:]:
        parts = line.split(",")
        cells[parts[3]] = float(parts[4])
    elapsed = time.perf_counter() - start
    ok = (
        abs(cells["high"] - 1.0) <= 0.03
        and abs(cells["low"] - 0.5) <= 0.03
        and elapsed < 30.0
    )
    check(
        "end-to-end-synthetic-audit",
        ok,
        f"high {cells['high']:.3f}, low {cells['low']:.3f}, {elapsed:.1f}s",
    )


def test_service_contract(tmp_path):
    image_dir = tmp_path / "images"
    image_dir.mkdir()
    left, right = (60, 45, 40), (205, 175, 160)
    img = Image.new("RGB", (24, 24))
    for x in range(24):
        for y in range(24):
            img.putpixel((x, y), left if x < 12 else right)
    img.save(image_dir / "img-a.png")
    rec = ImageRecord("img-a", "img-a.png", "III-IV", False)
    cohort_path = tmp_path / "cohort.csv"
    write_cohort_csv(cohort_path, [rec])
    log_path = tmp_path / "annotations.jsonl"

    body = {
        "image_id": "img-a",
        "labeller_id": "ann-a",
        "foreground": [{"x": 2, "y": 2 + i} for i in range(3)],
        "background": [{"x": 20, "y": 2 + i} for i in range(3)],
        "lighting_flag": True,
        "checklist": {"matched_lighting": True},
    }
    from dermcontrast.contrast import average_points

    expected = contrast_ratio(average_points([left] * 3), average_points([right] * 3))
    app = create_app(cohort_path, image_dir, log_path)
    with TestClient(app) as client:
        resp = client.post("/api/annotations", json=body)
        ok_submit = resp.status_code == 200
        ok_bit_equal = (
            resp.json()["score"]["value"] == expected.value
            and resp.json()["score"]["lighter"] == expected.lighter
            and resp.json()["score"]["darker"] == expected.darker
        )
        short = dict(body, foreground=body["foreground"][:2])
        ok_422 = client.post("/api/annotations", json=short).status_code == 422
        before = client.get("/api/scores", params={"labeller": "ann-a"}).json()

    reborn = create_app(cohort_path, image_dir, log_path)
    with TestClient(reborn) as client:
        after = client.get("/api/scores", params={"labeller": "ann-a"}).json()
        ok_restart = after == before and len(after["scores"]) == 1
    check(
        "service-contract",
        ok_submit and ok_bit_equal and ok_422 and ok_restart,
        f"score {expected.value:.6f} returned bit-equal",
    )
