"""Subgroup performance audits, labeller consistency, and background trends."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .cohort import annotation_score, latest_annotations
from .contrast import average_points, luminance
from .errors import UndefinedMetricError
from .records import (
    FST_GROUPS,
    GROUP_HIGH,
    GROUP_LOW,
    ImageRecord,
    PointAnnotation,
    PredictionRecord,
)
from .stats import BootstrapInterval, TTestResult, auc, bootstrap_auc_ci, paired_ttest

AXIS_CONTRAST = "contrast_group"
AXIS_FST = "fst_group"
AXIS_CROSS = "contrast_x_fst"
AXES = (AXIS_CONTRAST, AXIS_FST, AXIS_CROSS)

#: Gap pairs reported by default, per axis: (A, B) meaning AUC(A) - AUC(B).
DEFAULT_GAP_PAIRS: dict[str, list[tuple[str, str]]] = {
    AXIS_CONTRAST: [(GROUP_HIGH, GROUP_LOW)],
    AXIS_FST: [("V-VI", "I-II")],
    AXIS_CROSS: [],
}


def _subgroup_of(record: ImageRecord, axis: str) -> str:
    if axis == AXIS_CONTRAST:
        return record.contrast_group
    if axis == AXIS_FST:
        return record.fst_group
    if axis == AXIS_CROSS:
        return f"{record.contrast_group}/{record.fst_group}"
    raise ValueError(f"unknown axis {axis!r}; expected one of {AXES}")


def subgroup_order(axis: str) -> list[str]:
    """Canonical display order of subgroups on an axis."""
    if axis == AXIS_CONTRAST:
        return [GROUP_HIGH, GROUP_LOW]
    if axis == AXIS_FST:
        return list(FST_GROUPS)
    if axis == AXIS_CROSS:
        return [f"{g}/{fst}" for g in (GROUP_HIGH, GROUP_LOW) for fst in FST_GROUPS]
    raise ValueError(f"unknown axis {axis!r}; expected one of {AXES}")


@dataclass(frozen=True)
class BootstrapSpec:
    """Optional bootstrap layer on audit cells."""

    n_resamples: int = 1000
    level: float = 0.95
    seed: int = 0


@dataclass
class AuditRow:
    """One report row: a subgroup cell or a declared gap between two cells."""

    model_id: str
    phase: str
    axis: str
    subgroup: str
    mean_auc: Optional[float]
    std_auc: Optional[float]
    n_images: Optional[int]
    n_seeds: Optional[int]
    per_seed: dict[int, float] = field(default_factory=dict)
    ci: Optional[BootstrapInterval] = None
    undefined_seeds: list[int] = field(default_factory=list)

    @property
    def is_gap(self) -> bool:
        return self.subgroup.startswith("gap:")

    @property
    def is_undefined(self) -> bool:
        return self.mean_auc is None


@dataclass
class AuditReport:
    """Per-subgroup AUC with seed spread, optional CIs, and declared gaps."""

    axis: str
    rows: list[AuditRow]
    warnings: list[str] = field(default_factory=list)
    n_unjoined_predictions: int = 0

    def cell(self, model_id: str, phase: str, subgroup: str) -> Optional[AuditRow]:
        for row in self.rows:
            if (row.model_id, row.phase, row.subgroup) == (model_id, phase, subgroup):
                return row
        return None

    def to_table_text(self) -> str:
        """Render one text table per (phase), subgroups as rows, models as columns."""
        lines: list[str] = []
        phases = sorted({r.phase for r in self.rows})
        models = sorted({r.model_id for r in self.rows})
        order = subgroup_order(self.axis)
        col_w = max(12, max((len(m) for m in models), default=0) + 2)
        for phase in phases:
            lines.append(f"AUC by {self.axis} [{phase}]")
            lines.append(f"{'':<16}" + "".join(f"{m:>{col_w}}" for m in models))
            gap_names = [
                r.subgroup
                for r in self.rows
                if r.phase == phase and r.is_gap
            ]
            for name in order + sorted(set(gap_names)):
                cells = []
                found = False
                for m in models:
                    row = self.cell(m, phase, name)
                    if row is None:
                        cells.append(f"{'-':>{col_w}}")
                        continue
                    found = True
                    if row.is_undefined:
                        cells.append(f"{'undef':>{col_w}}")
                    elif row.is_gap:
                        cells.append(f"{row.mean_auc:>+{col_w}.3f}")
                    else:
                        text = f"{row.mean_auc:.3f}"
                        if row.std_auc is not None and row.n_seeds and row.n_seeds > 1:
                            text += f" ({row.std_auc:.3f})"
                        cells.append(f"{text:>{col_w}}")
                if found:
                    lines.append(f"{name:<16}" + "".join(cells))
            lines.append("")
        return "\n".join(lines).rstrip() + "\n"


def compute_gap(mean_a: float, mean_b: float) -> float:
    """Gap between two subgroup means, exactly their difference."""
    return mean_a - mean_b


def subgroup_audit(
    predictions: Sequence[PredictionRecord],
    records: Sequence[ImageRecord],
    axis: str = AXIS_CONTRAST,
    gap_pairs: Optional[Sequence[tuple[str, str]]] = None,
    bootstrap: Optional[BootstrapSpec] = None,
) -> AuditReport:
    """Per-seed subgroup AUCs aggregated to mean +- std, with declared gaps.

    Predictions join to grouped records by image_id; records that were
    excluded (or never grouped) do not participate on any axis. Cells where
    some seed sees a single class mark that seed undefined and continue; a
    cell with no defined seed is reported as undefined rather than dropped.
    Bootstrap intervals, when enabled, resample the pooled per-seed rows of
    the cell at image level.
    """
    if axis not in AXES:
        raise ValueError(f"unknown axis {axis!r}; expected one of {AXES}")
    if gap_pairs is None:
        gap_pairs = DEFAULT_GAP_PAIRS[axis]
    by_id = {
        r.image_id: r
        for r in records
        if r.contrast_group in (GROUP_HIGH, GROUP_LOW)
    }
    joined: list[tuple[PredictionRecord, ImageRecord]] = []
    n_unjoined = 0
    for pred in predictions:
        rec = by_id.get(pred.image_id)
        if rec is None:
            n_unjoined += 1
            continue
        joined.append((pred, rec))
    if not joined:
        raise ValueError(
            f"no predictions joined to grouped records "
            f"({len(predictions)} predictions, {len(by_id)} grouped records)"
        )

    warnings: list[str] = []
    if n_unjoined:
        warnings.append(
            f"{n_unjoined} prediction(s) did not join to a grouped record"
        )

    # cell -> seed -> [(label, prob)]
    cells: dict[tuple[str, str, str], dict[int, list[tuple[bool, float]]]] = {}
    for pred, rec in joined:
        key = (pred.model_id, pred.phase, _subgroup_of(rec, axis))
        cells.setdefault(key, {}).setdefault(pred.seed, []).append(
            (rec.malignant, pred.malignant_prob)
        )

    rows: list[AuditRow] = []
    order = {name: i for i, name in enumerate(subgroup_order(axis))}
    for (model_id, phase, subgroup) in sorted(
        cells, key=lambda k: (k[0], k[1], order.get(k[2], 99), k[2])
    ):
        seed_rows = cells[(model_id, phase, subgroup)]
        per_seed: dict[int, float] = {}
        undefined_seeds: list[int] = []
        image_ids: set[str] = set()
        for seed in sorted(seed_rows):
            pairs = seed_rows[seed]
            labels = [label for label, _ in pairs]
            scores = [prob for _, prob in pairs]
            try:
                per_seed[seed] = auc(labels, scores)
            except UndefinedMetricError:
                undefined_seeds.append(seed)
                warnings.append(
                    f"{model_id}/{phase}/{subgroup}: AUC undefined for seed {seed} "
                    f"(single class)"
                )
        for pred, rec in joined:
            if (pred.model_id, pred.phase, _subgroup_of(rec, axis)) == (
                model_id,
                phase,
                subgroup,
            ):
                image_ids.add(pred.image_id)
        if per_seed:
            values = list(per_seed.values())
            mean = float(np.mean(values))
            std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
        else:
            mean = None
            std = None
        ci = None
        if bootstrap is not None and per_seed:
            pooled = [pair for seed in sorted(seed_rows) for pair in seed_rows[seed]]
            labels = [label for label, _ in pooled]
            scores = [prob for _, prob in pooled]
            try:
                ci = bootstrap_auc_ci(
                    labels,
                    scores,
                    n_resamples=bootstrap.n_resamples,
                    level=bootstrap.level,
                    seed=bootstrap.seed,
                )
            except UndefinedMetricError:
                warnings.append(
                    f"{model_id}/{phase}/{subgroup}: bootstrap skipped (single class)"
                )
        rows.append(
            AuditRow(
                model_id=model_id,
                phase=phase,
                axis=axis,
                subgroup=subgroup,
                mean_auc=mean,
                std_auc=std,
                n_images=len(image_ids),
                n_seeds=len(per_seed),
                per_seed=per_seed,
                ci=ci,
                undefined_seeds=undefined_seeds,
            )
        )

    gap_rows: list[AuditRow] = []
    for model_id, phase in sorted({(r.model_id, r.phase) for r in rows}):
        for a, b in gap_pairs:
            row_a = next(
                (r for r in rows if (r.model_id, r.phase, r.subgroup) == (model_id, phase, a)),
                None,
            )
            row_b = next(
                (r for r in rows if (r.model_id, r.phase, r.subgroup) == (model_id, phase, b)),
                None,
            )
            if row_a is None or row_b is None or row_a.is_undefined or row_b.is_undefined:
                warnings.append(
                    f"{model_id}/{phase}: gap {a}-{b} not computable "
                    f"(missing or undefined subgroup)"
                )
                continue
            gap_rows.append(
                AuditRow(
                    model_id=model_id,
                    phase=phase,
                    axis=axis,
                    subgroup=f"gap:{a}-{b}",
                    mean_auc=compute_gap(row_a.mean_auc, row_b.mean_auc),
                    std_auc=None,
                    n_images=None,
                    n_seeds=None,
                )
            )

    return AuditReport(
        axis=axis,
        rows=rows + gap_rows,
        warnings=warnings,
        n_unjoined_predictions=n_unjoined,
    )


@dataclass(frozen=True)
class ScoreSummary:
    """Distribution summary of one labeller's contrast scores."""

    n: int
    mean: float
    std: float
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "ScoreSummary":
        arr = np.asarray(values, dtype=float)
        q1, med, q3 = np.percentile(arr, [25.0, 50.0, 75.0])
        return cls(
            n=int(arr.size),
            mean=float(arr.mean()),
            std=float(arr.std(ddof=1)) if arr.size > 1 else 0.0,
            minimum=float(arr.min()),
            q1=float(q1),
            median=float(med),
            q3=float(q3),
            maximum=float(arr.max()),
        )


@dataclass
class ConsistencyReport:
    """Inter-labeller agreement: paired t-test plus per-labeller summaries."""

    labeller_a: str
    labeller_b: str
    ttest: TTestResult
    summary_a: ScoreSummary
    summary_b: ScoreSummary
    n_shared: int
    only_a: list[str] = field(default_factory=list)
    only_b: list[str] = field(default_factory=list)

    def to_text(self) -> str:
        lines = [
            f"Labeller consistency: {self.labeller_a} vs {self.labeller_b}",
            f"  shared images: {self.n_shared} "
            f"(only {self.labeller_a}: {len(self.only_a)}, "
            f"only {self.labeller_b}: {len(self.only_b)})",
            f"  paired t = {self.ttest.t:.6g}, two-sided p = {self.ttest.p:.6g} "
            f"(df = {self.ttest.df})",
            f"  mean diff = {self.ttest.mean_diff:.6g}, sd diff = {self.ttest.sd_diff:.6g}",
        ]
        for name, s in ((self.labeller_a, self.summary_a), (self.labeller_b, self.summary_b)):
            lines.append(
                f"  {name}: n={s.n} mean={s.mean:.4f} std={s.std:.4f} "
                f"quartiles=[{s.q1:.4f}, {s.median:.4f}, {s.q3:.4f}]"
            )
        return "\n".join(lines)


def consistency_report(
    annotations: Iterable[PointAnnotation],
    labeller_a: str,
    labeller_b: str,
) -> ConsistencyReport:
    """Compare two labellers' score distributions over their shared images.

    Scores come from each labeller's latest annotation per image; the paired
    t-test runs over the shared image set (error if empty). Images covered by
    only one labeller are listed, not fatal.
    """
    latest = latest_annotations(annotations)
    scores: dict[str, dict[str, float]] = {labeller_a: {}, labeller_b: {}}
    for (image_id, labeller_id), ann in latest.items():
        if labeller_id in scores:
            scores[labeller_id][image_id] = annotation_score(ann).value
    a_map, b_map = scores[labeller_a], scores[labeller_b]
    shared = sorted(set(a_map) & set(b_map))
    if not shared:
        raise ValueError(
            f"labellers {labeller_a!r} ({len(a_map)} images) and {labeller_b!r} "
            f"({len(b_map)} images) share no images: intersection size 0"
        )
    ttest = paired_ttest([a_map[i] for i in shared], [b_map[i] for i in shared])
    return ConsistencyReport(
        labeller_a=labeller_a,
        labeller_b=labeller_b,
        ttest=ttest,
        summary_a=ScoreSummary.from_values(list(a_map.values())),
        summary_b=ScoreSummary.from_values(list(b_map.values())),
        n_shared=len(shared),
        only_a=sorted(set(a_map) - set(b_map)),
        only_b=sorted(set(b_map) - set(a_map)),
    )


@dataclass(frozen=True)
class TrendGroup:
    """Mean background color of one FST group."""

    fst_group: str
    n: int
    mean_rgb: tuple[float, float, float]
    mean_luminance: float


@dataclass
class TrendReport:
    """Per-FST background color means and the monotone-darkening verdict."""

    groups: list[TrendGroup]
    verdict: bool
    n_unmatched: int = 0

    def to_text(self) -> str:
        lines = ["Background color by FST group"]
        for g in self.groups:
            r, gg, b = g.mean_rgb
            lines.append(
                f"  {g.fst_group:<7} n={g.n:<5} mean RGB=({r:.1f}, {gg:.1f}, {b:.1f}) "
                f"mean luminance={g.mean_luminance:.4f}"
            )
        lines.append(
            "  verdict: luminance decreases with darker FST group: "
            + ("yes" if self.verdict else "no")
        )
        return "\n".join(lines)


def background_trend(
    annotations: Iterable[PointAnnotation],
    records: Sequence[ImageRecord],
) -> TrendReport:
    """Mean background color per FST group, with a monotonicity verdict.

    Every latest (image, labeller) annotation contributes its averaged
    background color; luminances are averaged per annotation, then per group.
    The verdict is true iff mean luminance strictly decreases from lighter to
    darker FST groups, over the groups present.
    """
    by_id = {r.image_id: r for r in records}
    sums: dict[str, list[float]] = {}
    lums: dict[str, list[float]] = {}
    colors: dict[str, list[tuple[float, float, float]]] = {}
    n_unmatched = 0
    for (image_id, _labeller), ann in latest_annotations(annotations).items():
        rec = by_id.get(image_id)
        if rec is None:
            n_unmatched += 1
            continue
        bg = average_points([p.rgb for p in ann.background])
        colors.setdefault(rec.fst_group, []).append(bg)
        lums.setdefault(rec.fst_group, []).append(luminance(bg))
    groups: list[TrendGroup] = []
    for fst in FST_GROUPS:
        if fst not in colors:
            continue
        arr = np.asarray(colors[fst], dtype=float)
        mean_rgb = tuple(float(v) for v in arr.mean(axis=0))
        groups.append(
            TrendGroup(
                fst_group=fst,
                n=len(colors[fst]),
                mean_rgb=mean_rgb,
                mean_luminance=float(np.mean(lums[fst])),
            )
        )
    if not groups:
        raise ValueError("no annotations joined to cohort records")
    verdict = all(
        groups[i].mean_luminance > groups[i + 1].mean_luminance
        for i in range(len(groups) - 1)
    )
    return TrendReport(groups=groups, verdict=verdict, n_unmatched=n_unmatched)
