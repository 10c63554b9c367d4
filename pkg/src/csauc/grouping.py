"""Grouped metrics: gcsAUC and GAUC.

Samples are partitioned by group key; each group gets its own bid levels and
its own Min-Max range, since pairs never cross groups. Groups without a
rankable pair are skipped and counted.
"""

from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .bucketing import DEFAULT_PCPM_BUCKETS, NormParams, build_grid, build_level_table
from .dp import compute_csauc_dp
from .errors import AllGroupsSkipped, MissingGroupKey, NoPosNegPairs, NoRankedPairs
from .metrics import auc_rank
from .model import SampleBatch, TiePolicy, as_batch


class GroupWeight(enum.Enum):
    REWARD_MAX = "rewardmax"
    COUNT = "count"
    UNIFORM = "uniform"

    @classmethod
    def parse(cls, value) -> "GroupWeight":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


@dataclass(frozen=True)
class GroupPolicy:
    weight: GroupWeight = GroupWeight.REWARD_MAX
    min_group_size: int = 2


@dataclass
class GroupedResult:
    value: float
    skipped_groups: int
    n_groups: int
    per_group: list = field(default_factory=list)  # (key, value, weight)
    reward_max: float = 0.0


def thread_count() -> int:
    raw = os.environ.get("CSAUC_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def partition(batch: SampleBatch):
    """Yield ``(key, sub_batch)`` in sorted key order."""
    if batch.groups is None:
        raise MissingGroupKey("samples carry no group key")
    missing = pd.isna(batch.groups)
    if missing.any():
        raise MissingGroupKey(f"{int(missing.sum())} samples lack a group key")
    codes, keys = pd.factorize(batch.groups, sort=True)
    order = np.argsort(codes, kind="stable")
    bounds = np.searchsorted(codes[order], np.arange(len(keys) + 1))
    for g, key in enumerate(keys):
        yield key, batch.take(order[bounds[g] : bounds[g + 1]])


def _map(fn, items):
    threads = thread_count()
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _reduce(results, n_groups, what) -> GroupedResult:
    # entries: (key, value, weight, weighted numerator, reward_max)
    kept = [r for r in results if r is not None]
    skipped = n_groups - len(kept)
    total_w = sum(r[2] for r in kept)
    if not kept or not total_w > 0:
        raise AllGroupsSkipped(f"no group yields a {what} value ({skipped} skipped)")
    if len(kept) == 1:
        value = kept[0][1]
    else:
        value = min(1.0, max(0.0, sum(r[3] for r in kept) / total_w))
    return GroupedResult(
        value=value,
        skipped_groups=skipped,
        n_groups=n_groups,
        per_group=[(k, v, w) for k, v, w, _, _ in kept],
        reward_max=sum(r[4] for r in kept),
    )


def gcsauc(
    samples,
    policy: GroupPolicy = GroupPolicy(),
    tie_policy=TiePolicy.HALF,
    pcpm_buckets: int = DEFAULT_PCPM_BUCKETS,
    bid_buckets="exact",
) -> GroupedResult:
    """Weighted mean of per-group csAUC.

    With ``REWARD_MAX`` weights this equals the pooled ratio of captured to
    attainable within-group revenue.
    """
    batch = as_batch(samples)
    groups = list(partition(batch))
    weight = GroupWeight.parse(policy.weight)

    def one(item):
        key, g = item
        if len(g) < policy.min_group_size:
            return None
        levels = build_level_table(g, bid_buckets)
        grid = build_grid(g, levels, NormParams.fit(g.pcpm, pcpm_buckets))
        try:
            res = compute_csauc_dp(grid, tie_policy)
        except NoRankedPairs:
            return None
        if weight is GroupWeight.REWARD_MAX:
            return key, res.csauc, res.reward_max, res.reward_rank, res.reward_max
        w = float(len(g)) if weight is GroupWeight.COUNT else 1.0
        return key, res.csauc, w, res.csauc * w, res.reward_max

    return _reduce(_map(one, groups), len(groups), "csauc")


def gauc(samples, policy: GroupPolicy = GroupPolicy(weight=GroupWeight.COUNT)) -> GroupedResult:
    """Weighted mean of per-group AUC; groups lacking either class are skipped.

    ``REWARD_MAX`` weighting uses the group's positive-negative pair count.
    """
    batch = as_batch(samples)
    groups = list(partition(batch))
    weight = GroupWeight.parse(policy.weight)

    def one(item):
        key, g = item
        if len(g) < policy.min_group_size:
            return None
        try:
            value = auc_rank(g)
        except NoPosNegPairs:
            return None
        n_pos = g.n_positive
        if weight is GroupWeight.REWARD_MAX:
            w = float(n_pos * (len(g) - n_pos))
        elif weight is GroupWeight.COUNT:
            w = float(len(g))
        else:
            w = 1.0
        return key, value, w, value * w, 0.0

    return _reduce(_map(one, groups), len(groups), "auc")

