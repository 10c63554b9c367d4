"""Offline evaluation of CTR predictions with revenue-aware ranking metrics."""

from ._kernels import BACKEND
from .bucketing import (
    BidBuckets,
    BucketGrid,
    LevelBidTable,
    NormParams,
    build_grid,
    build_level_table,
    pcpm_bucket,
)
from .dp import RewardResult, compute_csauc_dp, compute_csauc_streaming
from .errors import CsaucError
from .evaluate import EvalConfig, evaluate, evaluate_file
from .grouping import GroupPolicy, GroupWeight, gauc, gcsauc
from .metrics import auc_rank, copc, ropr
from .model import MetricsReport, Sample, SampleBatch, TiePolicy, validate_record
from .oracle import auc_pairwise, csauc_exact, csauc_exact_on_grid

__version__ = "0.1.0"
