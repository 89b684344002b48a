"""Cohort operations: contrast scoring, median grouping, cross-tabs, splits."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .contrast import (
    DEFAULT_LUMINANCE_FLOOR,
    ContrastScore,
    average_points,
    contrast_ratio,
    is_abnormal_score,
)
from .prng import stream_for
from .records import (
    FST_GROUPS,
    GROUP_EXCLUDED,
    GROUP_HIGH,
    GROUP_LOW,
    PHASE_EVAL,
    PHASE_TRAIN,
    ImageRecord,
    PointAnnotation,
    SplitAssignment,
)

DEFAULT_TRAIN_FRACTION = 0.8


def annotation_score(annotation: PointAnnotation) -> ContrastScore:
    """Contrast score of one annotation: averaged foreground vs background."""
    fg = average_points([p.rgb for p in annotation.foreground])
    bg = average_points([p.rgb for p in annotation.background])
    return contrast_ratio(fg, bg)


def latest_annotations(
    annotations: Iterable[PointAnnotation],
) -> dict[tuple[str, str], PointAnnotation]:
    """Latest-wins view of an append-only log, keyed by (image, labeller).

    Log order is authoritative: the last entry for a key replaces earlier ones.
    """
    latest: dict[tuple[str, str], PointAnnotation] = {}
    for ann in annotations:
        latest[(ann.image_id, ann.labeller_id)] = ann
    return latest


@dataclass(frozen=True)
class ScoreError:
    image_id: str
    message: str


@dataclass
class ScoredCohort:
    """Result of scoring a cohort against one labeller's annotations."""

    records: list[ImageRecord]
    errors: list[ScoreError]
    exclusions: list[ImageRecord] = field(default_factory=list)

    @property
    def scored(self) -> list[ImageRecord]:
        return [r for r in self.records if r.contrast_score is not None]


def score_cohort(
    records: Sequence[ImageRecord],
    annotations: Iterable[PointAnnotation],
    labeller_id: str,
    l_min: float = DEFAULT_LUMINANCE_FLOOR,
) -> ScoredCohort:
    """Score every record from the designated labeller's latest annotation.

    Records without an annotation produce a per-record error entry and stay
    unscored; the operation continues for the others. Scores whose darker
    luminance falls below ``l_min`` are marked excluded immediately (the
    abnormal-score filter fires at scoring time, ahead of grouping).
    """
    latest = latest_annotations(annotations)
    out: list[ImageRecord] = []
    errors: list[ScoreError] = []
    exclusions: list[ImageRecord] = []
    for record in records:
        ann = latest.get((record.image_id, labeller_id))
        if ann is None:
            errors.append(
                ScoreError(record.image_id, f"no annotation by labeller {labeller_id!r}")
            )
            out.append(record)
            continue
        scored = record.with_score(annotation_score(ann))
        if is_abnormal_score(scored.contrast_score, l_min):
            scored.contrast_group = GROUP_EXCLUDED
            exclusions.append(scored)
        out.append(scored)
    return ScoredCohort(records=out, errors=errors, exclusions=exclusions)


@dataclass
class GroupingResult:
    """Median grouping outcome: updated records plus the manifest facts."""

    records: list[ImageRecord]
    cutoff: float
    n_high: int
    n_low: int
    n_excluded: int


def split_by_median(records: Sequence[ImageRecord]) -> GroupingResult:
    """Assign high/low contrast groups by a cutoff at the median score.

    The median is computed over included (scored, non-excluded) records only;
    ties go to low (a record is high iff score > median). Excluded records are
    left untouched.
    """
    included = [
        r
        for r in records
        if r.contrast_score is not None and r.contrast_group != GROUP_EXCLUDED
    ]
    if not included:
        raise ValueError("no included scored records to group")
    cutoff = float(np.median([r.contrast_score.value for r in included]))
    n_high = n_low = 0
    for r in included:
        if r.contrast_score.value > cutoff:
            r.contrast_group = GROUP_HIGH
            n_high += 1
        else:
            r.contrast_group = GROUP_LOW
            n_low += 1
    n_excluded = sum(1 for r in records if r.contrast_group == GROUP_EXCLUDED)
    return GroupingResult(
        records=list(records),
        cutoff=cutoff,
        n_high=n_high,
        n_low=n_low,
        n_excluded=n_excluded,
    )


@dataclass
class CrossTab:
    """Counts per (contrast group, FST group) with row and column totals."""

    counts: dict[tuple[str, str], int]
    row_totals: dict[str, int]
    col_totals: dict[str, int]
    total: int
    fst_groups: tuple[str, ...] = FST_GROUPS
    contrast_groups: tuple[str, ...] = (GROUP_HIGH, GROUP_LOW)

    def to_text(self, title: str = "Images by contrast & skin tones") -> str:
        cols = list(self.fst_groups) + ["Total"]
        width = max(8, max(len(c) for c in cols) + 2)
        lines = [title]
        header = f"{'':<10}" + "".join(f"{c:>{width}}" for c in cols)
        lines.append(header)
        for group in self.contrast_groups:
            cells = [self.counts.get((group, fst), 0) for fst in self.fst_groups]
            row = f"{group.capitalize():<10}" + "".join(f"{c:>{width}}" for c in cells)
            row += f"{self.row_totals.get(group, 0):>{width}}"
            lines.append(row)
        footer = f"{'Total':<10}" + "".join(
            f"{self.col_totals.get(fst, 0):>{width}}" for fst in self.fst_groups
        )
        footer += f"{self.total:>{width}}"
        lines.append(footer)
        return "\n".join(lines)


def cross_tab(records: Sequence[ImageRecord]) -> CrossTab:
    """Tabulate grouped records by (contrast group, FST group).

    Excluded and ungrouped records are not counted; totals are consistent by
    construction (sums of the same cells).
    """
    counts: dict[tuple[str, str], int] = {}
    for r in records:
        if r.contrast_group not in (GROUP_HIGH, GROUP_LOW):
            continue
        key = (r.contrast_group, r.fst_group)
        counts[key] = counts.get(key, 0) + 1
    row_totals = {
        g: sum(v for (cg, _), v in counts.items() if cg == g)
        for g in (GROUP_HIGH, GROUP_LOW)
    }
    col_totals = {
        fst: sum(v for (_, f), v in counts.items() if f == fst) for fst in FST_GROUPS
    }
    return CrossTab(
        counts=counts,
        row_totals=row_totals,
        col_totals=col_totals,
        total=sum(counts.values()),
    )


def stratum_key(record: ImageRecord) -> str:
    """Stratification key: malignant x FST group x contrast group."""
    return f"{int(record.malignant)}|{record.fst_group}|{record.contrast_group}"


def train_count(n: int, fraction: float) -> int:
    """Train-set size for a stratum of ``n``: round half up, both phases kept
    nonempty for n >= 2."""
    k = int(np.floor(n * fraction + 0.5))
    if n >= 2:
        k = min(max(k, 1), n - 1)
    return k


@dataclass
class SplitResult:
    assignments: list[SplitAssignment]
    warnings: list[str] = field(default_factory=list)


def make_splits(
    records: Sequence[ImageRecord],
    seeds: Sequence[int],
    train_fraction: float = DEFAULT_TRAIN_FRACTION,
) -> SplitResult:
    """Deterministic stratified train/eval splits, one assignment set per seed.

    Strata are (malignant x FST group x contrast group) over grouped records;
    excluded records are never assigned. Image ids are sorted before the
    seeded shuffle, so the result is independent of input ordering. Strata
    with fewer than 2 records go wholly to train with a warning.
    """
    if not (0.0 < train_fraction < 1.0):
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    strata: dict[str, list[str]] = {}
    for r in records:
        if r.contrast_group not in (GROUP_HIGH, GROUP_LOW):
            continue
        strata.setdefault(stratum_key(r), []).append(r.image_id)
    if not strata:
        raise ValueError("no grouped records to split")
    assignments: list[SplitAssignment] = []
    warnings: list[str] = []
    for seed in seeds:
        for key in sorted(strata):
            ids = sorted(strata[key])
            n = len(ids)
            if n < 2:
                warnings.append(
                    f"seed {seed}: stratum {key!r} has {n} record(s); assigned to train"
                )
                assignments.extend(
                    SplitAssignment(image_id=i, seed=seed, phase=PHASE_TRAIN)
                    for i in ids
                )
                continue
            stream = stream_for(seed, key)
            stream.shuffle(ids)
            k = train_count(n, train_fraction)
            assignments.extend(
                SplitAssignment(image_id=i, seed=seed, phase=PHASE_TRAIN)
                for i in ids[:k]
            )
            assignments.extend(
                SplitAssignment(image_id=i, seed=seed, phase=PHASE_EVAL)
                for i in ids[k:]
            )
    assignments.sort(key=lambda a: (a.seed, a.image_id))
    return SplitResult(assignments=assignments, warnings=warnings)
