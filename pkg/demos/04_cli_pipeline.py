"""
File-mediated CLI pipeline
==========================

The full pipeline as external tooling sees it: write a cohort CSV and an
annotation log, then run ``score``, ``split``, ``splits-gen``, ``weights``,
and ``audit`` as subprocesses. The gap between ``splits-gen`` and ``audit``
is where external training jobs produce the predictions file.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from dermcontrast import GROUP_HIGH, ImageRecord, PointAnnotation, PointPick, PredictionRecord
from dermcontrast.fileio import (
    read_groups_csv,
    write_annotations_jsonl,
    write_cohort_csv,
    write_predictions_csv,
)

rng = np.random.default_rng(11)
FSTS = ["I-II", "III-IV", "V-VI"]


def run(*args):
    print(f"$ dermcontrast {' '.join(str(a) for a in args)}")
    proc = subprocess.run(
        [sys.executable, "-m", "dermcontrast.cli", *map(str, args)],
        capture_output=True,
        text=True,
    )
    print(proc.stdout, end="")
    if proc.returncode != 0:
        print(proc.stderr, end="")
        raise SystemExit(proc.returncode)


workdir = Path(tempfile.mkdtemp(prefix="dermcontrast-demo-"))
print(f"working in {workdir}\n")

n = 80
records, annotations = [], []
for i in range(n):
    image_id = f"img{i:03d}"
    records.append(
        ImageRecord(image_id, f"{image_id}.png", FSTS[i % 3], malignant=i % 2 == 0)
    )
    grey = 40 + (180 * i) // n
    annotations.append(
        PointAnnotation(
            image_id=image_id,
            labeller_id="ann-a",
            foreground=tuple(PointPick(j, 0, (grey,) * 3) for j in range(3)),
            background=tuple(PointPick(j, 9, (242,) * 3) for j in range(3)),
            lighting_flag=True,
            created_at="2026-01-01T00:00:00+00:00",
        )
    )
cohort = workdir / "cohort.csv"
log = workdir / "annotations.jsonl"
write_cohort_csv(cohort, records)
write_annotations_jsonl(log, annotations)

run("score", cohort, log, "--labeller", "ann-a", "--out-dir", workdir)
run("split", workdir / "scores.csv", "--out-dir", workdir)
run("splits-gen", workdir / "groups.csv", cohort, "--seeds", "5", "--out-dir", workdir)
run("weights", cohort, "--out-dir", workdir)

# ... an external training job would run here, producing predictions ...
groups, _, _ = read_groups_csv(workdir / "groups.csv")
predictions = []
for seed in range(5):
    for rec in records:
        if groups[rec.image_id] == GROUP_HIGH:
            prob = 0.9 if rec.malignant else 0.1
        else:
            prob = float(rng.uniform(0, 1))
        predictions.append(
            PredictionRecord(rec.image_id, "demo-model", seed, "ood_eval", prob)
        )
write_predictions_csv(workdir / "predictions.csv", predictions)

run(
    "audit",
    workdir / "predictions.csv",
    workdir / "groups.csv",
    cohort,
    "--axis",
    "contrast_group",
    "--out-dir",
    workdir,
)

manifest = json.loads((workdir / "report.csv.manifest.json").read_text())
print(f"report manifest: command={manifest['command']} "
      f"inputs={len(manifest['inputs'])} tool={manifest['tool_version']}")
