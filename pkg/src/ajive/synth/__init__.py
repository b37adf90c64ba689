"""Synthetic data, coverage simulation and baseline methods."""

from .baselines import ConcatSvdResult, PlsResult, baseline_concat_svd, baseline_pls
from .coverage import CoverageTable, coverage_simulation
from .truth import BlockTruth, GroundTruth, ToyConfig, make_toy, random_model, toy_scores

__all__ = [
    "BlockTruth",
    "GroundTruth",
    "ToyConfig",
    "make_toy",
    "random_model",
    "toy_scores",
    "CoverageTable",
    "coverage_simulation",
    "ConcatSvdResult",
    "PlsResult",
    "baseline_concat_svd",
    "baseline_pls",
]
