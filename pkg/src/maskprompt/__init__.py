"""Two-stage click-prompt generation for promptable lesion segmentation.

Stage 1 places one positive click at the snapped centroid of each ground-truth
component.  Stage 2 decomposes a prediction against the ground truth into
true-positive, false-positive, and false-negative regions and spreads a
budgeted number of clicks evenly over each region with a Lloyd-relaxed
centroidal tessellation; clicks on missed or correct tissue are positive,
clicks on spurious tissue are negative.

All placement runs in exact integer arithmetic with row-major tie-breaking,
so identical inputs give byte-identical prompt files on every platform.
"""

from .batch import BatchResult, format_report_table, run_batch
from .cvt import (
    BRUTE_FORCE_MAX_AREA,
    BRUTE_FORCE_MAX_CLICKS,
    ClickBudgetPolicy,
    CvtClicker,
    CvtState,
    brute_force_cvt,
    click_budget,
    cvt_energy,
    lloyd_relax,
    seed_clicks,
)
from .dataset import (
    DatasetEntry,
    DatasetManifest,
    DatasetWarning,
    ManifestFormatError,
    load_manifest,
    merge_masks,
    save_manifest,
    scan_dataset,
    split_dataset,
)
from .masks import (
    PixelBox,
    bounding_box,
    load_mask,
    resize_mask,
    save_mask,
    snapped_centroid,
)
from .metrics import (
    MetricReport,
    bbox_iou,
    bce_loss,
    dice_coeff,
    dice_loss,
    evaluate_pair,
    mask_iou,
)
from .overlay import click_overlay, error_overlay, save_overlay
from .prompts import (
    ClickPrompt,
    EmptyMaskWarning,
    PromptFormatError,
    PromptSet,
    Stage1Prompter,
    Stage2Prompter,
    parse_prompts,
    serialize_prompts,
    stage1_prompts,
    stage2_prompts,
)
from .regions import (
    FN,
    FP,
    GT,
    TP,
    ErrorDecomposition,
    Region,
    decompose_errors,
    label_components,
    regions_of,
)
from .synthetic import make_corpus

__version__ = "0.1.0"

__all__ = [
    "BRUTE_FORCE_MAX_AREA",
    "BRUTE_FORCE_MAX_CLICKS",
    "BatchResult",
    "ClickBudgetPolicy",
    "ClickPrompt",
    "CvtClicker",
    "CvtState",
    "DatasetEntry",
    "DatasetManifest",
    "DatasetWarning",
    "EmptyMaskWarning",
    "ErrorDecomposition",
    "FN",
    "FP",
    "GT",
    "ManifestFormatError",
    "MetricReport",
    "PixelBox",
    "PromptFormatError",
    "PromptSet",
    "Region",
    "Stage1Prompter",
    "Stage2Prompter",
    "TP",
    "bbox_iou",
    "bce_loss",
    "bounding_box",
    "brute_force_cvt",
    "click_budget",
    "click_overlay",
    "cvt_energy",
    "decompose_errors",
    "dice_coeff",
    "dice_loss",
    "error_overlay",
    "evaluate_pair",
    "format_report_table",
    "label_components",
    "lloyd_relax",
    "load_manifest",
    "load_mask",
    "make_corpus",
    "mask_iou",
    "merge_masks",
    "parse_prompts",
    "regions_of",
    "resize_mask",
    "run_batch",
    "save_manifest",
    "save_mask",
    "save_overlay",
    "scan_dataset",
    "seed_clicks",
    "serialize_prompts",
    "snapped_centroid",
    "split_dataset",
    "stage1_prompts",
    "stage2_prompts",
    "__version__",
]
