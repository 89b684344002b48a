"""Domain records shared by the cohort, statistics, service and CLI layers."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .contrast import ContrastScore
from .errors import ProtocolViolation

FST_GROUPS = ("I-II", "III-IV", "V-VI")

GROUP_HIGH = "high"
GROUP_LOW = "low"
GROUP_EXCLUDED = "excluded"
CONTRAST_GROUPS = (GROUP_HIGH, GROUP_LOW, GROUP_EXCLUDED)

PHASE_TRAIN = "finetune_train"
PHASE_EVAL = "finetune_eval"
SPLIT_PHASES = (PHASE_TRAIN, PHASE_EVAL)

PREDICTION_PHASES = ("ood_eval", "finetune_eval")

ANNOTATION_SCHEMA_VERSION = 1

POINTS_PER_REGION = 3


@dataclass(frozen=True)
class PointPick:
    """One picked pixel: its coordinates and the sRGB value sampled there."""

    x: int
    y: int
    rgb: tuple[int, int, int]


@dataclass(frozen=True)
class PointAnnotation:
    """One labeller's six picked points (3 foreground, 3 background) on one image."""

    image_id: str
    labeller_id: str
    foreground: tuple[PointPick, ...]
    background: tuple[PointPick, ...]
    lighting_flag: bool
    created_at: str
    checklist: dict[str, bool] = field(default_factory=dict)
    schema_version: int = ANNOTATION_SCHEMA_VERSION

    def validate(self, width: Optional[int] = None, height: Optional[int] = None) -> None:
        """Check protocol invariants; image bounds only when dimensions given."""
        if len(self.foreground) != POINTS_PER_REGION:
            raise ProtocolViolation(
                f"exactly {POINTS_PER_REGION} foreground points required, "
                f"got {len(self.foreground)}"
            )
        if len(self.background) != POINTS_PER_REGION:
            raise ProtocolViolation(
                f"exactly {POINTS_PER_REGION} background points required, "
                f"got {len(self.background)}"
            )
        fg_coords = {(p.x, p.y) for p in self.foreground}
        bg_coords = {(p.x, p.y) for p in self.background}
        overlap = fg_coords & bg_coords
        if overlap:
            raise ProtocolViolation(
                f"foreground and background coordinates overlap at {sorted(overlap)}"
            )
        if width is not None and height is not None:
            for p in self.foreground + self.background:
                if not (0 <= p.x < width and 0 <= p.y < height):
                    raise ProtocolViolation(
                        f"coordinate ({p.x}, {p.y}) outside {width}x{height} image"
                    )


@dataclass
class ImageRecord:
    """One cohort row: identity, skin-tone group, label, and contrast state."""

    image_id: str
    file_path: str
    fst_group: str
    malignant: bool
    contrast_score: Optional[ContrastScore] = None
    contrast_group: Optional[str] = None

    def with_score(self, score: ContrastScore) -> "ImageRecord":
        return replace(self, contrast_score=score)


@dataclass(frozen=True)
class SplitAssignment:
    """Phase assignment of one image under one seed."""

    image_id: str
    seed: int
    phase: str


@dataclass(frozen=True)
class PredictionRecord:
    """Externally produced model output for one image under one seed."""

    image_id: str
    model_id: str
    seed: int
    phase: str
    malignant_prob: float
