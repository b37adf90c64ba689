"""Angle-based joint and individual variation explained (AJIVE).

Splits several data blocks measured on the same objects into a joint part
shared by all blocks, an individual part per block, and residual noise.

>>> from ajive import MultiBlockDataset, ajive
>>> result = ajive(dataset, ranks=[2, 3], seed=0)   # doctest: +SKIP
"""

from .blocks import (
    DataBlock,
    DatasetError,
    MultiBlockDataset,
    ReadOptions,
    center_rows,
    load_dataset,
    load_manifest,
    read_matrix,
    write_manifest,
    write_matrix,
)
from .bounds import (
    BoundCutoffs,
    BoundDistribution,
    BoundKind,
    combine_wedin_multiblock,
    combine_wedin_two_block,
    cutoff,
    random_direction_angle,
    random_direction_ssv,
    resample_wedin_block,
    wedin_oracle,
)
from .decompose import AjiveDecomposition, BlockDecomposition, finalize, recheck_joint, verify_outputs, write_decomposition
from .extract import RankSpec, SignalEstimate, initial_extract, scree
from .linalg import Subspace, SvdConvergenceError, TruncatedSvd, principal_angles, subspace_distance
from .pipeline import ajive, diagnose, extract_all
from .segment import SegmentationDiagnostics, Verdict, run_step2, segment_joint, simulate_step2, stack_scores

__version__ = "0.1.0"

__all__ = [
    "DataBlock",
    "DatasetError",
    "MultiBlockDataset",
    "ReadOptions",
    "center_rows",
    "load_dataset",
    "load_manifest",
    "read_matrix",
    "write_manifest",
    "write_matrix",
    "BoundCutoffs",
    "BoundDistribution",
    "BoundKind",
    "combine_wedin_multiblock",
    "combine_wedin_two_block",
    "cutoff",
    "random_direction_angle",
    "random_direction_ssv",
    "resample_wedin_block",
    "wedin_oracle",
    "AjiveDecomposition",
    "BlockDecomposition",
    "finalize",
    "recheck_joint",
    "verify_outputs",
    "write_decomposition",
    "RankSpec",
    "SignalEstimate",
    "initial_extract",
    "scree",
    "Subspace",
    "SvdConvergenceError",
    "TruncatedSvd",
    "principal_angles",
    "subspace_distance",
    "ajive",
    "diagnose",
    "extract_all",
    "SegmentationDiagnostics",
    "Verdict",
    "run_step2",
    "segment_joint",
    "simulate_step2",
    "stack_scores",
]
