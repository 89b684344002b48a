"""File formats for the pipeline stages, plus atomic writes and run manifests.

All formats are documented in docs/FORMATS.md. CSV bodies are written with
repr-style shortest round-trip floats so reruns are byte-identical; run
metadata (timestamps, digests) lives in sidecar ``.manifest.json`` files,
never in the data files themselves.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional, Sequence

from ._version import __version__
from .audit import AuditReport, AuditRow, TrendReport
from .contrast import ContrastScore
from .records import (
    ANNOTATION_SCHEMA_VERSION,
    CONTRAST_GROUPS,
    FST_GROUPS,
    PREDICTION_PHASES,
    SPLIT_PHASES,
    ImageRecord,
    PointAnnotation,
    PointPick,
    PredictionRecord,
    SplitAssignment,
)

COHORT_HEADER = ["image_id", "file_path", "fst_group", "malignant"]
SCORES_HEADER = [
    "image_id",
    "fst_group",
    "malignant",
    "contrast_score",
    "l_lighter",
    "l_darker",
    "excluded",
]
GROUPS_HEADER = ["image_id", "contrast_score", "contrast_group", "cutoff"]
SPLITS_HEADER = ["image_id", "seed", "phase"]
PREDICTIONS_HEADER = ["image_id", "model_id", "seed", "phase", "malignant_prob"]
REPORT_HEADER = [
    "model_id",
    "phase",
    "axis",
    "subgroup",
    "mean_auc",
    "std_auc",
    "n_images",
    "n_seeds",
]
TREND_HEADER = ["fst_group", "n", "mean_r", "mean_g", "mean_b", "mean_luminance"]


class FileFormatError(ValueError):
    """A pipeline file does not match its documented format."""


def _fmt(value: float) -> str:
    return repr(float(value))


def atomic_write_text(path: Path | str, text: str) -> None:
    """Write via a temp file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sha256_of(path: Path | str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(
    output_path: Path | str,
    command: str,
    inputs: Sequence[Path | str],
    config: dict,
) -> Path:
    """Sidecar ``<output>.manifest.json`` with input digests and config."""
    output_path = Path(output_path)
    manifest = {
        "command": command,
        "tool_version": __version__,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "inputs": {str(p): sha256_of(p) for p in inputs},
        "config": config,
        "output": output_path.name,
    }
    manifest_path = output_path.with_name(output_path.name + ".manifest.json")
    atomic_write_text(manifest_path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest_path


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _read_csv(path: Path | str, expected_header: Sequence[str]) -> list[tuple[int, dict]]:
    """Read a CSV into (line_number, row_dict) pairs, validating the header."""
    path = Path(path)
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise FileFormatError(f"{path}: empty file") from None
        if [h.strip() for h in header[: len(expected_header)]] != list(expected_header):
            raise FileFormatError(
                f"{path}:1: expected header {','.join(expected_header)!r}, "
                f"got {','.join(header)!r}"
            )
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < len(expected_header):
                raise FileFormatError(
                    f"{path}:{line_no}: expected {len(expected_header)} fields, "
                    f"got {len(row)}"
                )
            rows.append((line_no, dict(zip(expected_header, row))))
        return rows


def read_cohort_csv(path: Path | str) -> list[ImageRecord]:
    """Cohort metadata: image_id,file_path,fst_group,malignant."""
    records = []
    seen: set[str] = set()
    for line_no, row in _read_csv(path, COHORT_HEADER):
        if row["fst_group"] not in FST_GROUPS:
            raise FileFormatError(
                f"{path}:{line_no}: fst_group {row['fst_group']!r} "
                f"not in {FST_GROUPS}"
            )
        if row["malignant"] not in ("0", "1"):
            raise FileFormatError(
                f"{path}:{line_no}: malignant must be 0 or 1, got {row['malignant']!r}"
            )
        if row["image_id"] in seen:
            raise FileFormatError(f"{path}:{line_no}: duplicate image_id {row['image_id']!r}")
        seen.add(row["image_id"])
        records.append(
            ImageRecord(
                image_id=row["image_id"],
                file_path=row["file_path"],
                fst_group=row["fst_group"],
                malignant=row["malignant"] == "1",
            )
        )
    return records


def write_cohort_csv(path: Path | str, records: Sequence[ImageRecord]) -> None:
    rows = [
        [r.image_id, r.file_path, r.fst_group, "1" if r.malignant else "0"]
        for r in records
    ]
    atomic_write_text(path, _csv_text(COHORT_HEADER, rows))


def annotation_to_dict(ann: PointAnnotation) -> dict:
    return {
        "schema_version": ann.schema_version,
        "image_id": ann.image_id,
        "labeller_id": ann.labeller_id,
        "foreground": [{"x": p.x, "y": p.y, "rgb": list(p.rgb)} for p in ann.foreground],
        "background": [{"x": p.x, "y": p.y, "rgb": list(p.rgb)} for p in ann.background],
        "lighting_flag": ann.lighting_flag,
        "checklist": ann.checklist,
        "created_at": ann.created_at,
    }


def _pick_from_dict(data: dict, where: str) -> PointPick:
    try:
        rgb = data["rgb"]
        return PointPick(x=int(data["x"]), y=int(data["y"]), rgb=(int(rgb[0]), int(rgb[1]), int(rgb[2])))
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise FileFormatError(f"{where}: malformed point pick {data!r}") from exc


def annotation_from_dict(data: dict, where: str = "annotation") -> PointAnnotation:
    version = data.get("schema_version")
    if version != ANNOTATION_SCHEMA_VERSION:
        raise FileFormatError(
            f"{where}: unsupported schema_version {version!r} "
            f"(supported: {ANNOTATION_SCHEMA_VERSION})"
        )
    try:
        return PointAnnotation(
            image_id=str(data["image_id"]),
            labeller_id=str(data["labeller_id"]),
            foreground=tuple(_pick_from_dict(p, where) for p in data["foreground"]),
            background=tuple(_pick_from_dict(p, where) for p in data["background"]),
            lighting_flag=bool(data["lighting_flag"]),
            created_at=str(data.get("created_at", "")),
            checklist={str(k): bool(v) for k, v in data.get("checklist", {}).items()},
        )
    except KeyError as exc:
        raise FileFormatError(f"{where}: missing field {exc}") from exc


def read_annotations_jsonl(path: Path | str) -> list[PointAnnotation]:
    """Annotation log: one JSON object per line, schema_version 1."""
    path = Path(path)
    annotations = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FileFormatError(f"{path}:{line_no}: invalid JSON: {exc}") from exc
            annotations.append(annotation_from_dict(data, where=f"{path}:{line_no}"))
    return annotations


def append_annotation_jsonl(path: Path | str, ann: PointAnnotation) -> None:
    """Append one annotation to the log, flushed before return."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", encoding="utf-8") as handle:
        handle.write(json.dumps(annotation_to_dict(ann), sort_keys=True) + "\n")
        handle.flush()
        os.fsync(handle.fileno())


def write_annotations_jsonl(path: Path | str, annotations: Sequence[PointAnnotation]) -> None:
    text = "".join(
        json.dumps(annotation_to_dict(a), sort_keys=True) + "\n" for a in annotations
    )
    atomic_write_text(path, text)


@dataclass
class ScoreRow:
    """One scores.csv row; carries cohort fields so later stages can re-join."""

    image_id: str
    fst_group: str
    malignant: bool
    score: ContrastScore
    excluded: bool


def write_scores_csv(path: Path | str, rows: Sequence[ScoreRow]) -> None:
    csv_rows = [
        [
            r.image_id,
            r.fst_group,
            "1" if r.malignant else "0",
            _fmt(r.score.value),
            _fmt(r.score.lighter),
            _fmt(r.score.darker),
            "1" if r.excluded else "0",
        ]
        for r in rows
    ]
    atomic_write_text(path, _csv_text(SCORES_HEADER, csv_rows))


def read_scores_csv(path: Path | str) -> list[ScoreRow]:
    rows = []
    for line_no, row in _read_csv(path, SCORES_HEADER):
        if row["fst_group"] not in FST_GROUPS:
            raise FileFormatError(
                f"{path}:{line_no}: fst_group {row['fst_group']!r} not in {FST_GROUPS}"
            )
        try:
            score = ContrastScore(
                value=float(row["contrast_score"]),
                lighter=float(row["l_lighter"]),
                darker=float(row["l_darker"]),
            )
        except ValueError as exc:
            raise FileFormatError(f"{path}:{line_no}: bad numeric field: {exc}") from exc
        rows.append(
            ScoreRow(
                image_id=row["image_id"],
                fst_group=row["fst_group"],
                malignant=row["malignant"] == "1",
                score=score,
                excluded=row["excluded"] == "1",
            )
        )
    return rows


def write_groups_csv(
    path: Path | str, records: Sequence[ImageRecord], cutoff: float
) -> None:
    """Grouping manifest: image_id,contrast_score,contrast_group,cutoff."""
    csv_rows = []
    for r in records:
        if r.contrast_group is None or r.contrast_score is None:
            continue
        csv_rows.append(
            [r.image_id, _fmt(r.contrast_score.value), r.contrast_group, _fmt(cutoff)]
        )
    atomic_write_text(path, _csv_text(GROUPS_HEADER, csv_rows))


def read_groups_csv(path: Path | str) -> tuple[dict[str, str], dict[str, float], float]:
    """Return (group by image, score by image, cutoff)."""
    groups: dict[str, str] = {}
    scores: dict[str, float] = {}
    cutoff: Optional[float] = None
    for line_no, row in _read_csv(path, GROUPS_HEADER):
        if row["contrast_group"] not in CONTRAST_GROUPS:
            raise FileFormatError(
                f"{path}:{line_no}: contrast_group {row['contrast_group']!r} "
                f"not in {CONTRAST_GROUPS}"
            )
        groups[row["image_id"]] = row["contrast_group"]
        scores[row["image_id"]] = float(row["contrast_score"])
        row_cutoff = float(row["cutoff"])
        if cutoff is None:
            cutoff = row_cutoff
        elif cutoff != row_cutoff:
            raise FileFormatError(f"{path}:{line_no}: inconsistent cutoff values")
    if cutoff is None:
        raise FileFormatError(f"{path}: no grouped rows")
    return groups, scores, cutoff


def write_splits_csv(path: Path | str, assignments: Sequence[SplitAssignment]) -> None:
    csv_rows = [[a.image_id, str(a.seed), a.phase] for a in assignments]
    atomic_write_text(path, _csv_text(SPLITS_HEADER, csv_rows))


def read_splits_csv(path: Path | str) -> list[SplitAssignment]:
    assignments = []
    for line_no, row in _read_csv(path, SPLITS_HEADER):
        if row["phase"] not in SPLIT_PHASES:
            raise FileFormatError(
                f"{path}:{line_no}: phase {row['phase']!r} not in {SPLIT_PHASES}"
            )
        assignments.append(
            SplitAssignment(
                image_id=row["image_id"], seed=int(row["seed"]), phase=row["phase"]
            )
        )
    return assignments


def read_predictions_csv(path: Path | str) -> list[PredictionRecord]:
    """Predictions: image_id,model_id,seed,phase,malignant_prob."""
    records = []
    seen: set[tuple[str, str, int, str]] = set()
    for line_no, row in _read_csv(path, PREDICTIONS_HEADER):
        if row["phase"] not in PREDICTION_PHASES:
            raise FileFormatError(
                f"{path}:{line_no}: phase {row['phase']!r} not in {PREDICTION_PHASES}"
            )
        try:
            seed = int(row["seed"])
            prob = float(row["malignant_prob"])
        except ValueError as exc:
            raise FileFormatError(f"{path}:{line_no}: bad numeric field: {exc}") from exc
        if not 0.0 <= prob <= 1.0:
            raise FileFormatError(
                f"{path}:{line_no}: malignant_prob {prob} outside [0, 1]"
            )
        key = (row["image_id"], row["model_id"], seed, row["phase"])
        if key in seen:
            raise FileFormatError(
                f"{path}:{line_no}: duplicate prediction key {key!r}"
            )
        seen.add(key)
        records.append(
            PredictionRecord(
                image_id=row["image_id"],
                model_id=row["model_id"],
                seed=seed,
                phase=row["phase"],
                malignant_prob=prob,
            )
        )
    return records


def write_predictions_csv(path: Path | str, records: Sequence[PredictionRecord]) -> None:
    csv_rows = [
        [r.image_id, r.model_id, str(r.seed), r.phase, _fmt(r.malignant_prob)]
        for r in records
    ]
    atomic_write_text(path, _csv_text(PREDICTIONS_HEADER, csv_rows))


def report_csv_text(report: AuditReport, with_ci: bool = False) -> str:
    header = list(REPORT_HEADER) + (["ci_lo", "ci_hi"] if with_ci else [])

    def cells(row: AuditRow) -> list[str]:
        out = [
            row.model_id,
            row.phase,
            row.axis,
            row.subgroup,
            _fmt(row.mean_auc) if row.mean_auc is not None else "",
            _fmt(row.std_auc) if row.std_auc is not None else "",
            str(row.n_images) if row.n_images is not None else "",
            str(row.n_seeds) if row.n_seeds is not None else "",
        ]
        if with_ci:
            out += (
                [_fmt(row.ci.lo), _fmt(row.ci.hi)] if row.ci is not None else ["", ""]
            )
        return out

    return _csv_text(header, (cells(r) for r in report.rows))


def write_report_csv(path: Path | str, report: AuditReport, with_ci: bool = False) -> None:
    atomic_write_text(path, report_csv_text(report, with_ci=with_ci))


def write_trend_csv(path: Path | str, report: TrendReport) -> None:
    csv_rows = [
        [
            g.fst_group,
            str(g.n),
            _fmt(g.mean_rgb[0]),
            _fmt(g.mean_rgb[1]),
            _fmt(g.mean_rgb[2]),
            _fmt(g.mean_luminance),
        ]
        for g in report.groups
    ]
    atomic_write_text(path, _csv_text(TREND_HEADER, csv_rows))
