"""Bucketed dynamic program for csAUC.

Levels are swept in ascending order. For all strictly lower levels two dense
accumulators are kept per pCPM bucket: the sample count and the sum of
T-values (0 for negatives, the level bid for positives). A cell ``(v, c)``
holding ``n`` samples then collects, in one pass:

* ``n * bid(v) * #lower samples in buckets < c``   (wins)
* ``n * sum of lower T-values in buckets > c``     (losses)
* the tie term for bucket ``c`` per :class:`~csauc.model.TiePolicy`.

Runtime is O(cells + levels * occupied buckets); empty buckets are compressed
away before the sweep, which changes no partial sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _kernels
from .bucketing import BucketGrid, GridBuilder, LevelBidTable, NormParams
from .errors import NoRankedPairs
from .model import SampleBatch, TiePolicy


@dataclass(frozen=True)
class RewardResult:
    reward_rank: float
    reward_max: float
    n_pairs: int

    @property
    def csauc(self) -> float:
        if self.reward_max <= 0:
            raise NoRankedPairs("no pair with a strict level difference")
        # the ratio is at most 1 exactly; clamp rounding overshoot
        return min(1.0, self.reward_rank / self.reward_max)

    def as_dict(self) -> dict:
        return {
            "csauc": self.csauc,
            "reward_rank": self.reward_rank,
            "reward_max": self.reward_max,
            "n_pairs": self.n_pairs,
        }


def finish_reward(reward_rank, reward_max, n_pairs) -> RewardResult:
    if not reward_max > 0:
        raise NoRankedPairs("no positive sample has a strictly lower-level partner")
    return RewardResult(float(reward_rank), float(reward_max), int(n_pairs))


def compute_csauc_dp(
    grid: BucketGrid,
    tie_policy=TiePolicy.HALF,
    compensated: bool = False,
    compress: bool = True,
    backend=None,
) -> RewardResult:
    """Run the reward sweep over ``grid``.

    ``backend`` picks the kernel set explicitly (``"numba"`` or ``"numpy"``);
    by default the process-wide choice is used. Raises
    :class:`NoRankedPairs` when ``reward_max`` is zero.
    """
    tie = TiePolicy.parse(tie_policy)
    bucket = grid.bucket
    n_buckets = grid.norm.n_buckets
    if compress:
        occupied, bucket = np.unique(grid.bucket, return_inverse=True)
        n_buckets = occupied.shape[0]
    rank, rmax, pairs = _kernels.get(backend).dp_sweep(
        np.ascontiguousarray(grid.level, dtype=np.int64),
        np.ascontiguousarray(bucket, dtype=np.int64),
        np.ascontiguousarray(grid.count, dtype=np.int64),
        np.ascontiguousarray(grid.level_table.bids, dtype=np.float64),
        int(n_buckets),
        tie is TiePolicy.FULL,
        bool(compensated),
    )
    return finish_reward(rank, rmax, pairs)


def compute_csauc_streaming(
    batches: Iterable[SampleBatch],
    norm: NormParams,
    level_table: LevelBidTable,
    tie_policy=TiePolicy.HALF,
    compensated: bool = False,
) -> RewardResult:
    """Bucket a batch stream on the fly, then sweep; raw samples are not kept."""
    builder = GridBuilder(level_table, norm)
    for batch in batches:
        builder.add(batch)
    return compute_csauc_dp(builder.finish(), tie_policy, compensated=compensated)
