"""Variable selection with the bag of little bootstraps."""

from .core import (
    BINOMIAL,
    GAUSSIAN,
    GROUP_LASSO,
    LASSO,
    FitResult,
    GroupedDataset,
    GroupStructure,
    PenaltyConfig,
)
from .engine import BlbvsConfig, BlbvsReport, aggregate_votes, aggregate_xi, run_blbvs, run_bootvs
from .group_lasso import GroupLassoRegressor, LogisticGroupLasso
from .lasso import WeightedLasso
from .selectors import BLBVSSelector, BootVSSelector
from .simgen import SimSpec, generate, selection_accuracy

__all__ = [
    "BINOMIAL", "GAUSSIAN", "GROUP_LASSO", "LASSO",
    "BLBVSSelector", "BootVSSelector", "BlbvsConfig", "BlbvsReport",
    "FitResult", "GroupLassoRegressor", "GroupStructure", "GroupedDataset",
    "LogisticGroupLasso", "PenaltyConfig", "SimSpec", "WeightedLasso",
    "aggregate_votes", "aggregate_xi", "generate", "run_blbvs", "run_bootvs",
    "selection_accuracy",
]
__version__ = "0.1.0"
