"""
Subgroup bias audit
===================

Builds a cohort whose high-contrast images are perfectly classified while the
low-contrast ones get chance-level scores, then audits externally produced
predictions across contrast and skin-tone subgroups: per-seed AUCs, seed
spread, declared gaps, and bootstrap intervals.
"""

import numpy as np

from dermcontrast import (
    AXIS_CONTRAST,
    AXIS_CROSS,
    BootstrapSpec,
    ContrastScore,
    GROUP_HIGH,
    GROUP_LOW,
    ImageRecord,
    PredictionRecord,
    subgroup_audit,
)

rng = np.random.default_rng(3)
FSTS = ["I-II", "III-IV", "V-VI"]

records = []
for i in range(180):
    rec = ImageRecord(
        image_id=f"img{i:03d}",
        file_path="",
        fst_group=FSTS[i % 3],
        malignant=i % 2 == 0,
    )
    rec.contrast_score = ContrastScore(5.0, 0.8, 0.2)
    rec.contrast_group = GROUP_HIGH if i < 90 else GROUP_LOW
    records.append(rec)

predictions = []
for seed in range(5):
    for rec in records:
        if rec.contrast_group == GROUP_HIGH:
            prob = rng.uniform(0.75, 1.0) if rec.malignant else rng.uniform(0.0, 0.25)
        else:
            prob = rng.uniform(0.0, 1.0)  # chance level
        predictions.append(
            PredictionRecord(rec.image_id, "demo-model", seed, "ood_eval", float(prob))
        )

report = subgroup_audit(
    predictions,
    records,
    axis=AXIS_CONTRAST,
    bootstrap=BootstrapSpec(n_resamples=500, seed=0),
)
print(report.to_table_text())

for row in report.rows:
    if row.is_gap:
        print(f"declared gap {row.subgroup}: {row.mean_auc:+.3f}")
    elif row.ci is not None:
        print(
            f"{row.subgroup}: mean {row.mean_auc:.3f} +- {row.std_auc:.3f} over "
            f"{row.n_seeds} seeds, 95% CI [{row.ci.lo:.3f}, {row.ci.hi:.3f}]"
        )

print()
cross = subgroup_audit(predictions, records, axis=AXIS_CROSS)
print(cross.to_table_text())
