"""HTTP annotation service: serves cohort images, validates and persists picks.

Pixel truth lives server-side: colors are re-read from the stored image at the
submitted coordinates, so client-sent colors are advisory only. Persistence is
a single append-only JSON Lines log with latest-wins read semantics; appends
are serialized through a lock and fsynced, so a restart never loses or
reorders accepted annotations.
"""

from __future__ import annotations

import mimetypes
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import FileResponse
from PIL import Image
from pydantic import BaseModel, Field

from .cohort import annotation_score
from .fileio import (
    annotation_to_dict,
    append_annotation_jsonl,
    read_annotations_jsonl,
    read_cohort_csv,
)
from .records import POINTS_PER_REGION, ImageRecord, PointAnnotation, PointPick

DEFAULT_PAGE_SIZE = 50
MAX_PAGE_SIZE = 500


def sample_rgb(image: Image.Image, x: int, y: int, patch_size: int = 1) -> tuple[int, int, int]:
    """Read the sRGB value at (x, y); patch_size > 1 takes a per-channel
    median over an odd square window clipped to the image bounds."""
    if patch_size == 1:
        r, g, b = image.getpixel((x, y))[:3]
        return (r, g, b)
    half = patch_size // 2
    xs = range(max(0, x - half), min(image.width, x + half + 1))
    ys = range(max(0, y - half), min(image.height, y + half + 1))
    channels: tuple[list[int], list[int], list[int]] = ([], [], [])
    for yy in ys:
        for xx in xs:
            px = image.getpixel((xx, yy))
            for c in range(3):
                channels[c].append(px[c])
    def median(values: list[int]) -> int:
        values = sorted(values)
        return values[len(values) // 2]
    return (median(channels[0]), median(channels[1]), median(channels[2]))


class PickIn(BaseModel):
    x: int
    y: int
    # Advisory only; the server re-reads the pixel at (x, y).
    rgb: Optional[list[int]] = None


class AnnotationIn(BaseModel):
    schema_version: int = 1
    image_id: str
    labeller_id: str
    foreground: list[PickIn]
    background: list[PickIn]
    lighting_flag: bool
    checklist: dict[str, bool] = Field(default_factory=dict)


class ServiceState:
    """Cohort, image access, and the append-only annotation log."""

    def __init__(
        self,
        cohort_path: Path | str,
        image_root: Path | str,
        log_path: Path | str,
        patch_size: int = 1,
    ) -> None:
        if patch_size < 1 or patch_size % 2 == 0:
            raise ValueError(f"patch_size must be odd and >= 1, got {patch_size}")
        self.image_root = Path(image_root)
        self.log_path = Path(log_path)
        self.patch_size = patch_size
        self.records: dict[str, ImageRecord] = {
            r.image_id: r for r in read_cohort_csv(cohort_path)
        }
        self.image_ids = sorted(self.records)
        self.lock = threading.Lock()
        self.latest: dict[tuple[str, str], PointAnnotation] = {}
        self.log_entries = 0
        if self.log_path.exists():
            for ann in read_annotations_jsonl(self.log_path):
                self.latest[(ann.image_id, ann.labeller_id)] = ann
                self.log_entries += 1
        self._dims: dict[str, tuple[int, int]] = {}

    def image_path(self, image_id: str) -> Path:
        record = self.records[image_id]
        path = Path(record.file_path)
        if not path.is_absolute():
            path = self.image_root / path
        return path

    def dimensions(self, image_id: str) -> tuple[int, int]:
        if image_id not in self._dims:
            with Image.open(self.image_path(image_id)) as img:
                self._dims[image_id] = (img.width, img.height)
        return self._dims[image_id]

    def annotated_by(self, image_id: str) -> list[str]:
        return sorted(
            labeller for (img, labeller) in self.latest if img == image_id
        )

    def store(self, ann: PointAnnotation) -> None:
        """Append to the log and update the latest-wins view, atomically."""
        with self.lock:
            append_annotation_jsonl(self.log_path, ann)
            self.latest[(ann.image_id, ann.labeller_id)] = ann
            self.log_entries += 1


def create_app(
    cohort_path: Path | str,
    image_root: Path | str,
    log_path: Path | str,
    patch_size: int = 1,
    ui_dir: Optional[Path | str] = None,
) -> FastAPI:
    state = ServiceState(cohort_path, image_root, log_path, patch_size=patch_size)
    app = FastAPI(title="dermcontrast annotation service")
    app.state.service = state

    @app.get("/api/health")
    def health() -> dict:
        return {
            "status": "ok",
            "images": len(state.records),
            "annotations": state.log_entries,
        }

    @app.get("/api/images")
    def list_images(
        labeller: Optional[str] = None,
        filter: str = Query("all", pattern="^(annotated|pending|all)$"),
        page: int = Query(1, ge=1),
        page_size: int = Query(DEFAULT_PAGE_SIZE, ge=1, le=MAX_PAGE_SIZE),
    ) -> dict:
        ids = state.image_ids
        if filter != "all":
            if labeller is None:
                # Annotation status is per labeller; without one, nothing is
                # pending or annotated.
                ids = []
            else:
                done = {
                    img for (img, lab) in state.latest if lab == labeller
                }
                if filter == "annotated":
                    ids = [i for i in ids if i in done]
                else:
                    ids = [i for i in ids if i not in done]
        total = len(ids)
        start = (page - 1) * page_size
        items = []
        for image_id in ids[start : start + page_size]:
            entry = {
                "image_id": image_id,
                "file": f"/api/images/{image_id}/file",
            }
            if labeller is not None:
                entry["annotated"] = (image_id, labeller) in state.latest
            items.append(entry)
        return {"page": page, "page_size": page_size, "total": total, "items": items}

    @app.get("/api/images/{image_id}")
    def image_metadata(image_id: str) -> dict:
        if image_id not in state.records:
            raise HTTPException(status_code=404, detail=f"unknown image {image_id!r}")
        width, height = state.dimensions(image_id)
        return {
            "image_id": image_id,
            "width": width,
            "height": height,
            "annotated_by": state.annotated_by(image_id),
            "file": f"/api/images/{image_id}/file",
        }

    @app.get("/api/images/{image_id}/file")
    def image_file(image_id: str) -> FileResponse:
        if image_id not in state.records:
            raise HTTPException(status_code=404, detail=f"unknown image {image_id!r}")
        path = state.image_path(image_id)
        if not path.exists():
            raise HTTPException(
                status_code=404, detail=f"image file missing for {image_id!r}"
            )
        content_type = mimetypes.guess_type(path.name)[0] or "application/octet-stream"
        return FileResponse(path, media_type=content_type)

    @app.post("/api/annotations")
    def submit_annotation(body: AnnotationIn) -> dict:
        if body.image_id not in state.records:
            raise HTTPException(
                status_code=404, detail=f"unknown image {body.image_id!r}"
            )
        for name, picks in (("foreground", body.foreground), ("background", body.background)):
            if len(picks) != POINTS_PER_REGION:
                raise HTTPException(
                    status_code=422,
                    detail=(
                        f"exactly {POINTS_PER_REGION} {name} points required, "
                        f"got {len(picks)}"
                    ),
                )
        width, height = state.dimensions(body.image_id)
        for pick in body.foreground + body.background:
            if not (0 <= pick.x < width and 0 <= pick.y < height):
                raise HTTPException(
                    status_code=422,
                    detail=(
                        f"coordinate ({pick.x}, {pick.y}) outside "
                        f"{width}x{height} image"
                    ),
                )
        fg_coords = {(p.x, p.y) for p in body.foreground}
        bg_coords = {(p.x, p.y) for p in body.background}
        if fg_coords & bg_coords:
            raise HTTPException(
                status_code=422,
                detail="foreground and background coordinates must be disjoint",
            )
        with Image.open(state.image_path(body.image_id)) as img:
            rgb_img = img.convert("RGB")
            def read(pick: PickIn) -> PointPick:
                return PointPick(
                    x=pick.x,
                    y=pick.y,
                    rgb=sample_rgb(rgb_img, pick.x, pick.y, state.patch_size),
                )
            annotation = PointAnnotation(
                image_id=body.image_id,
                labeller_id=body.labeller_id,
                foreground=tuple(read(p) for p in body.foreground),
                background=tuple(read(p) for p in body.background),
                lighting_flag=body.lighting_flag,
                created_at=datetime.now(timezone.utc).isoformat(),
                checklist=dict(body.checklist),
            )
        annotation.validate(width=width, height=height)
        replaced = (body.image_id, body.labeller_id) in state.latest
        state.store(annotation)
        score = annotation_score(annotation)
        return {
            "annotation": annotation_to_dict(annotation),
            "replaced_previous": replaced,
            "score": {
                "value": score.value,
                "lighter": score.lighter,
                "darker": score.darker,
            },
        }

    @app.get("/api/scores")
    def get_scores(labeller: Optional[str] = None) -> dict:
        entries = []
        for (image_id, lab), ann in sorted(state.latest.items()):
            if labeller is not None and lab != labeller:
                continue
            entries.append(
                {
                    "image_id": image_id,
                    "labeller_id": lab,
                    "contrast_score": annotation_score(ann).value,
                }
            )
        return {"labeller": labeller, "scores": entries}

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        # Mounted last so /api routes keep precedence; html=True serves the
        # annotation UI's index.html at /.
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
