"""Quadratic reference implementations used as ground truth.

Nothing here shares code with the bucketed sweep: pairs are enumerated one by
one and paid according to the revenue rule directly.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .bucketing import BucketGrid
from .dp import RewardResult, finish_reward
from .errors import InputTooLarge, NoPosNegPairs
from .model import TiePolicy, as_batch

ORACLE_CAP = 20_000


def _check_size(n, force):
    if n > ORACLE_CAP and not force:
        raise InputTooLarge(f"{n} samples exceed the oracle cap of {ORACLE_CAP}; pass force=True to override")


def csauc_exact(samples, tie_policy=TiePolicy.HALF, force: bool = False, backend=None) -> RewardResult:
    """Enumerate every (high-level, low-level) pair on exact pCPM values.

    Levels are the distinct positive bids above the negative level. A strict
    pCPM win pays the high sample's bid, a strict loss pays the low sample's
    T-value, and an exact tie pays per ``tie_policy``.
    """
    batch = as_batch(samples)
    _check_size(len(batch), force)
    tie = TiePolicy.parse(tie_policy)
    label = np.ascontiguousarray(batch.label, dtype=np.int64)
    bid = np.ascontiguousarray(batch.bid)
    pcpm = np.ascontiguousarray(batch.pctr * batch.bid)
    return finish_reward(*_kernels.get(backend).pairwise_samples(label, bid, pcpm, tie is TiePolicy.FULL))


def csauc_exact_on_grid(grid: BucketGrid, tie_policy=TiePolicy.HALF, backend=None) -> RewardResult:
    """Cell-pair enumeration over a grid, with bucket indices as the score."""
    tie = TiePolicy.parse(tie_policy)
    return finish_reward(
        *_kernels.get(backend).pairwise_cells(
            np.ascontiguousarray(grid.level, dtype=np.int64),
            np.ascontiguousarray(grid.bucket, dtype=np.int64),
            np.ascontiguousarray(grid.count, dtype=np.int64),
            np.ascontiguousarray(grid.level_table.bids, dtype=np.float64),
            tie is TiePolicy.FULL,
        )
    )


def auc_pairwise(samples, force: bool = False, backend=None) -> float:
    """Fraction of (positive, negative) pairs ordered correctly by pCTR; ties count half."""
    batch = as_batch(samples)
    _check_size(len(batch), force)
    credit, n_pairs = _kernels.get(backend).auc_pairs(np.ascontiguousarray(batch.label, dtype=np.int64), batch.pctr)
    if n_pairs == 0:
        raise NoPosNegPairs("AUC needs at least one positive and one negative")
    return credit / n_pairs
