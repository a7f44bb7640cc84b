"""Open-set community-distortion metrics and threshold calibration."""

from oscd._core import (
    OscdError,
    __version__,
    aupr,
    auroc,
    build_threshold_grid,
    confusion_at,
    energy_score,
    fpr_at_unknown_recall,
    msp_score,
    oscd,
    oscd_directional,
    paired_t_test,
    pearson,
    pielou,
    prototype_distance_score,
    richness,
    shannon,
    simpson,
    softmax,
    spearman,
    student_t_cdf,
    topk_overlap,
)

__all__ = [
    "OscdError",
    "__version__",
    "aupr",
    "auroc",
    "build_threshold_grid",
    "confusion_at",
    "energy_score",
    "fpr_at_unknown_recall",
    "msp_score",
    "oscd",
    "oscd_directional",
    "paired_t_test",
    "pearson",
    "pielou",
    "prototype_distance_score",
    "richness",
    "shannon",
    "simpson",
    "softmax",
    "spearman",
    "student_t_cdf",
    "topk_overlap",
]
