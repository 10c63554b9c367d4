"""Compute a :class:`MetricsReport` from a file or an in-memory batch."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

from .bucketing import (
    DEFAULT_PCPM_BUCKETS,
    BidBuckets,
    NormParams,
    build_grid,
    build_level_table,
    level_table_from_bids,
)
from .dp import compute_csauc_dp, compute_csauc_streaming
from .errors import EmptyInput, InvalidParameter, ZeroPredictedClicks, ZeroPredictedRevenue
from .grouping import GroupPolicy, GroupWeight, gauc, gcsauc
from .ingest import InputSpec, SampleStream, two_pass_plan
from .metrics import auc_rank, copc, ropr
from .model import METRIC_NAMES, MetricsReport, SampleBatch, TiePolicy, as_batch

GROUPED = ("gcsauc", "gauc")
RANKED = ("auc",) + GROUPED


@dataclass(frozen=True)
class EvalConfig:
    metrics: tuple = ("auc", "csauc", "copc", "ropr")
    tie_policy: TiePolicy = TiePolicy.HALF
    pcpm_buckets: int = DEFAULT_PCPM_BUCKETS
    bid_buckets: BidBuckets = BidBuckets()
    group_weight: Optional[GroupWeight] = None  # None: rewardmax for gcsauc, count for gauc
    min_group_size: int = 2
    per_group: bool = False
    compensated: bool = False

    def __post_init__(self):
        unknown = [m for m in self.metrics if m not in METRIC_NAMES]
        if unknown:
            raise InvalidParameter(f"unknown metrics {unknown}; choose from {list(METRIC_NAMES)}")
        if not self.metrics:
            raise InvalidParameter("no metrics requested")

    @property
    def needs_groups(self) -> bool:
        return any(m in GROUPED for m in self.metrics)


def parse_metrics(text: str) -> tuple:
    names = tuple(dict.fromkeys(m.strip().lower() for m in text.split(",") if m.strip()))
    unknown = [m for m in names if m not in METRIC_NAMES]
    if unknown:
        raise InvalidParameter(f"unknown metrics {unknown}; choose from {list(METRIC_NAMES)}")
    return names


def evaluate_batch(batch: SampleBatch, cfg: EvalConfig, skipped_rows: Optional[Counter] = None) -> MetricsReport:
    if len(batch) == 0:
        raise EmptyInput("no valid samples in input")
    out = dict(n_samples=len(batch), n_positive=batch.n_positive, skipped_rows=dict(skipped_rows or {}))
    m = cfg.metrics
    if "auc" in m:
        out["auc"] = auc_rank(batch)
    if "csauc" in m:
        levels = build_level_table(batch, cfg.bid_buckets)
        grid = build_grid(batch, levels, NormParams.fit(batch.pcpm, cfg.pcpm_buckets))
        res = compute_csauc_dp(grid, cfg.tie_policy, compensated=cfg.compensated)
        out["csauc"] = res.csauc
        out["reward_max"] = res.reward_max
    if "copc" in m:
        out["copc"] = copc(batch)
    if "ropr" in m:
        out["ropr"] = ropr(batch)

    per_group = [] if cfg.per_group else None
    skipped = 0
    for name in GROUPED:
        if name not in m:
            continue
        if name == "gcsauc":
            policy = GroupPolicy(cfg.group_weight or GroupWeight.REWARD_MAX, cfg.min_group_size)
            res = gcsauc(batch, policy, cfg.tie_policy, cfg.pcpm_buckets, cfg.bid_buckets)
            out.setdefault("reward_max", res.reward_max)
        else:
            policy = GroupPolicy(cfg.group_weight or GroupWeight.COUNT, cfg.min_group_size)
            res = gauc(batch, policy)
        out[name] = res.value
        out["n_groups"] = res.n_groups
        skipped = max(skipped, res.skipped_groups)
        if per_group is not None:
            per_group += [{"metric": name, "key": str(k), "value": v, "weight": w} for k, v, w in res.per_group]
    out["skipped_groups"] = skipped
    out["per_group"] = per_group
    return MetricsReport(**out)


def evaluate_stream(stream: SampleStream, cfg: EvalConfig) -> MetricsReport:
    """Two passes over a re-readable source; raw samples are never pooled.

    Only valid when no rank-based metric is requested.
    """
    if any(x in RANKED for x in cfg.metrics):
        raise InvalidParameter("rank-based metrics need the buffered path")
    plan = two_pass_plan(stream)
    out = dict(n_samples=plan.n_samples, n_positive=plan.n_positive, skipped_rows=dict(plan.errors))
    if "csauc" in cfg.metrics:
        levels = level_table_from_bids(plan.pos_bids, plan.pos_bid_counts, cfg.bid_buckets)
        norm = NormParams(plan.min_pcpm, plan.max_pcpm, cfg.pcpm_buckets)
        res = compute_csauc_streaming(stream.batches(), norm, levels, cfg.tie_policy, compensated=cfg.compensated)
        out["csauc"] = res.csauc
        out["reward_max"] = res.reward_max
    if "copc" in cfg.metrics:
        if not plan.sum_pctr > 0:
            raise ZeroPredictedClicks("sum of pctr is zero")
        out["copc"] = plan.sum_label / plan.sum_pctr
    if "ropr" in cfg.metrics:
        if not plan.sum_pctr_bid > 0:
            raise ZeroPredictedRevenue("sum of pctr * bid is zero")
        # a uniform bid cancels; match the buffered path's copc-equal answer
        out["ropr"] = plan.sum_label / plan.sum_pctr if plan.uniform_bid else plan.sum_label_bid / plan.sum_pctr_bid
    return MetricsReport(**out)


def evaluate_file(spec: InputSpec, cfg: EvalConfig) -> MetricsReport:
    """Evaluate one input, streaming when the source and metrics allow it."""
    stream = SampleStream(spec)
    if spec.seekable and not any(x in RANKED for x in cfg.metrics):
        return evaluate_stream(stream, cfg)
    batch = stream.read_all()
    return evaluate_batch(batch, cfg, stream.errors)


def evaluate(samples, metrics: Sequence[str] = ("auc", "csauc", "copc", "ropr"), **kwargs) -> MetricsReport:
    """Library convenience over :func:`evaluate_batch`."""
    return evaluate_batch(as_batch(samples), EvalConfig(metrics=tuple(metrics), **kwargs))
