from __future__ import annotations

import itertools

import pytest

from dermcontrast.records import ImageRecord, PointAnnotation, PointPick

_coord_counter = itertools.count()


def make_annotation(
    image_id: str,
    labeller_id: str,
    fg_rgbs,
    bg_rgbs,
    created_at: str = "2025-01-01T00:00:00+00:00",
) -> PointAnnotation:
    """Annotation with the given colors and auto-generated disjoint coordinates."""

    def picks(rgbs, offset):
        return tuple(
            PointPick(x=offset + i, y=next(_coord_counter) % 97, rgb=tuple(rgb))
            for i, rgb in enumerate(rgbs)
        )

    return PointAnnotation(
        image_id=image_id,
        labeller_id=labeller_id,
        foreground=picks(fg_rgbs, 0),
        background=picks(bg_rgbs, 10),
        lighting_flag=True,
        created_at=created_at,
        checklist={
            "avoid_ulceration": True,
            "avoid_adjacent": True,
            "matched_lighting": True,
        },
    )


def grey_annotation(image_id: str, labeller_id: str, fg: int, bg: int) -> PointAnnotation:
    """All three picks per region at one grey level each."""
    return make_annotation(
        image_id, labeller_id, [(fg, fg, fg)] * 3, [(bg, bg, bg)] * 3
    )


def make_record(
    image_id: str,
    fst_group: str = "I-II",
    malignant: bool = False,
    file_path: str = "",
) -> ImageRecord:
    return ImageRecord(
        image_id=image_id,
        file_path=file_path or f"{image_id}.png",
        fst_group=fst_group,
        malignant=malignant,
    )


@pytest.fixture
def tmp_out(tmp_path):
    out = tmp_path / "out"
    out.mkdir()
    return out
