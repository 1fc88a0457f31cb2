from .compare import DEFAULT_TOLERANCES, compare, render_table
from .metrics import METRIC_NAMES, QualityReport, evaluate, mask_iou, psnr_region

__all__ = [
    "DEFAULT_TOLERANCES",
    "compare",
    "render_table",
    "METRIC_NAMES",
    "QualityReport",
    "evaluate",
    "mask_iou",
    "psnr_region",
]
