"""Lesion-skin color contrast scoring and subgroup performance auditing.

The package scores dermatology images from human-picked foreground (lesion)
and background (perilesional skin) points using the WCAG contrast formula,
partitions a cohort into high/low contrast groups at the median score, and
quantifies model-performance gaps across contrast and skin-tone subgroups
from externally produced prediction files.
"""

from ._version import __version__
from .audit import (
    AXES,
    AXIS_CONTRAST,
    AXIS_CROSS,
    AXIS_FST,
    AuditReport,
    AuditRow,
    BootstrapSpec,
    ConsistencyReport,
    ScoreSummary,
    TrendReport,
    background_trend,
    compute_gap,
    consistency_report,
    subgroup_audit,
)
from .cohort import (
    CrossTab,
    GroupingResult,
    ScoredCohort,
    SplitResult,
    annotation_score,
    cross_tab,
    latest_annotations,
    make_splits,
    score_cohort,
    split_by_median,
)
from .contrast import (
    DEFAULT_LUMINANCE_FLOOR,
    ContrastScore,
    average_points,
    contrast_ratio,
    is_abnormal_score,
    linearize,
    luminance,
    relative_luminance,
    srgb_channel_to_linear,
)
from .errors import InputDomainError, ProtocolViolation, UndefinedMetricError
from .records import (
    CONTRAST_GROUPS,
    FST_GROUPS,
    GROUP_EXCLUDED,
    GROUP_HIGH,
    GROUP_LOW,
    ImageRecord,
    PointAnnotation,
    PointPick,
    PredictionRecord,
    SplitAssignment,
)
from .stats import (
    BootstrapInterval,
    TTestResult,
    auc,
    betainc_reg,
    bootstrap_auc_ci,
    class_weights,
    paired_ttest,
    student_t_two_sided_p,
)

__all__ = [
    "__version__",
    "AXES",
    "AXIS_CONTRAST",
    "AXIS_CROSS",
    "AXIS_FST",
    "AuditReport",
    "AuditRow",
    "BootstrapInterval",
    "BootstrapSpec",
    "ConsistencyReport",
    "ContrastScore",
    "CrossTab",
    "CONTRAST_GROUPS",
    "DEFAULT_LUMINANCE_FLOOR",
    "FST_GROUPS",
    "GROUP_EXCLUDED",
    "GROUP_HIGH",
    "GROUP_LOW",
    "GroupingResult",
    "ImageRecord",
    "InputDomainError",
    "PointAnnotation",
    "PointPick",
    "PredictionRecord",
    "ProtocolViolation",
    "ScoreSummary",
    "ScoredCohort",
    "SplitAssignment",
    "SplitResult",
    "TTestResult",
    "TrendReport",
    "UndefinedMetricError",
    "annotation_score",
    "auc",
    "average_points",
    "background_trend",
    "betainc_reg",
    "bootstrap_auc_ci",
    "class_weights",
    "compute_gap",
    "consistency_report",
    "contrast_ratio",
    "cross_tab",
    "is_abnormal_score",
    "latest_annotations",
    "linearize",
    "luminance",
    "make_splits",
    "paired_ttest",
    "relative_luminance",
    "score_cohort",
    "split_by_median",
    "srgb_channel_to_linear",
    "student_t_two_sided_p",
    "subgroup_audit",
]
