"""Two-level bucketing: bid levels by pCPM buckets, stored as sparse counts.

First level: level 0 holds every negative sample, levels ``1..K`` hold
positives ordered by bid. Second level: Min-Max normalized pCPM scaled onto
``n_buckets`` integer buckets. The resulting ``(level, bucket, count)``
triples feed the reward sweep in :mod:`csauc.dp`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import InvalidParameter, LevelLookupMiss, NoSamples
from .model import SampleBatch, as_batch

DEFAULT_PCPM_BUCKETS = 100_001


@dataclass(frozen=True)
class BidBuckets:
    """Bid quantization: ``exact``, ``width`` (fixed interval) or ``quantile``."""

    kind: str = "exact"
    param: float = 0.0

    def __post_init__(self):
        if self.kind not in ("exact", "width", "quantile"):
            raise InvalidParameter(f"unknown bid bucketing {self.kind!r}")
        if self.kind == "width" and not self.param > 0:
            raise InvalidParameter("bucket width must be positive")
        if self.kind == "quantile" and (int(self.param) != self.param or self.param < 1):
            raise InvalidParameter("quantile count must be a positive integer")

    @classmethod
    def parse(cls, text) -> "BidBuckets":
        if isinstance(text, cls):
            return text
        m = re.fullmatch(r"\s*(exact|width|quantile)\s*(?::\s*([0-9.eE+-]+))?\s*", str(text))
        if not m:
            raise InvalidParameter(f"cannot parse bid bucketing {text!r}; use exact | width:W | quantile:K")
        kind, arg = m.group(1), m.group(2)
        if kind == "exact":
            if arg is not None:
                raise InvalidParameter("exact takes no argument")
            return cls()
        if arg is None:
            raise InvalidParameter(f"{kind} needs an argument")
        try:
            return cls(kind, float(arg))
        except ValueError:
            raise InvalidParameter(f"bad {kind} argument {arg!r}") from None

    def __str__(self):
        return "exact" if self.kind == "exact" else f"{self.kind}:{self.param:g}"


@dataclass(frozen=True, eq=False)
class LevelBidTable:
    """Representative bid per level; ``bids[0]`` is the T-value of negatives (0).

    ``edges`` are the per-level lookup keys: the exact bids (``exact``), the
    occupied interval indices (``width``) or the smallest member bid of each
    level (``quantile``).
    """

    bids: np.ndarray
    edges: np.ndarray
    quantization: BidBuckets = BidBuckets()
    origin: float = 0.0
    max_bid: float = 0.0

    @property
    def n_levels(self) -> int:
        return int(self.bids.shape[0])

    def positive_level(self, bid: np.ndarray) -> np.ndarray:
        bid = np.asarray(bid, dtype=np.float64)
        q = self.quantization
        if q.kind == "exact":
            key = bid
        elif q.kind == "width":
            key = _width_index(bid, self.origin, q.param)
        else:
            key = bid
        if q.kind == "quantile":
            idx = np.searchsorted(self.edges, key, side="right") - 1
            ok = (idx >= 0) & (bid <= self.max_bid)
        else:
            idx = np.searchsorted(self.edges, key, side="left")
            idx_c = np.minimum(idx, max(self.edges.shape[0] - 1, 0))
            ok = (idx < self.edges.shape[0]) & (self.edges[idx_c] == key) if self.edges.shape[0] else np.zeros(bid.shape, bool)
            idx = idx_c
        if not np.all(ok):
            bad = bid[~ok][0]
            raise LevelLookupMiss(f"positive bid {bad!r} is not covered by the level table")
        return idx + 1

    def level_of(self, label: np.ndarray, bid: np.ndarray) -> np.ndarray:
        label = np.asarray(label)
        levels = np.zeros(label.shape[0], dtype=np.int64)
        pos = label == 1
        if pos.any():
            levels[pos] = self.positive_level(np.asarray(bid)[pos])
        return levels

    def __repr__(self):
        return f"LevelBidTable({self.quantization}, bids={self.bids.tolist()})"


def _width_index(bid, origin, width):
    return np.floor((bid - origin) / width).astype(np.int64)


def level_table_from_bids(
    pos_bids: np.ndarray, counts: Optional[np.ndarray] = None, quantization="exact"
) -> LevelBidTable:
    """Build the level table from distinct positive bids and their multiplicities."""
    q = BidBuckets.parse(quantization)
    pos_bids = np.asarray(pos_bids, dtype=np.float64)
    if counts is None:
        pos_bids, counts = np.unique(pos_bids, return_counts=True)
    else:
        order = np.argsort(pos_bids, kind="stable")
        pos_bids, counts = pos_bids[order], np.asarray(counts, dtype=np.int64)[order]
    if pos_bids.shape[0] == 0:
        return LevelBidTable(np.zeros(1), np.empty(0), q)
    max_bid = float(pos_bids[-1])
    if q.kind == "exact":
        return LevelBidTable(np.concatenate(([0.0], pos_bids)), pos_bids.copy(), q, max_bid=max_bid)

    if q.kind == "width":
        origin = float(pos_bids[0])
        group = _width_index(pos_bids, origin, q.param)
    else:
        k = int(q.param)
        total = counts.sum()
        smaller = np.cumsum(counts) - counts
        group = np.minimum(k - 1, (k * smaller) // total)
        origin = 0.0
    keys, first = np.unique(group, return_index=True)
    last = np.concatenate((first[1:], [group.shape[0]])) - 1
    if q.kind == "width":
        reps = 0.5 * (pos_bids[first] + pos_bids[last])
        edges = keys
    else:
        sums = np.add.reduceat(pos_bids * counts, first)
        reps = sums / np.add.reduceat(counts, first)
        edges = pos_bids[first]
    return LevelBidTable(np.concatenate(([0.0], reps)), edges, q, origin=origin, max_bid=max_bid)


def build_level_table(samples, quantization="exact") -> LevelBidTable:
    """Level table over the positive bids of ``samples``."""
    batch = as_batch(samples)
    if len(batch) == 0:
        raise NoSamples("cannot build a level table from zero samples")
    return level_table_from_bids(batch.bid[batch.label == 1], quantization=quantization)


@dataclass(frozen=True)
class NormParams:
    min_pcpm: float
    max_pcpm: float
    n_buckets: int = DEFAULT_PCPM_BUCKETS

    def __post_init__(self):
        if not self.min_pcpm <= self.max_pcpm:
            raise InvalidParameter(f"min_pcpm {self.min_pcpm} exceeds max_pcpm {self.max_pcpm}")
        if int(self.n_buckets) != self.n_buckets or self.n_buckets < 1:
            raise InvalidParameter("n_buckets must be a positive integer")

    @classmethod
    def fit(cls, pcpm, n_buckets: int = DEFAULT_PCPM_BUCKETS) -> "NormParams":
        pcpm = np.asarray(pcpm, dtype=np.float64)
        if pcpm.size == 0:
            raise NoSamples("cannot normalize zero samples")
        return cls(float(pcpm.min()), float(pcpm.max()), n_buckets)


def pcpm_bucket(pcpm, norm: NormParams):
    """Min-Max normalize and floor onto ``[0, n_buckets - 1]``.

    Works on scalars and arrays. A degenerate range maps everything to 0.
    """
    arr = np.asarray(pcpm, dtype=np.float64)
    span = norm.max_pcpm - norm.min_pcpm
    if span > 0:
        scaled = np.floor((arr - norm.min_pcpm) / span * (norm.n_buckets - 1))
        out = np.clip(scaled, 0, norm.n_buckets - 1).astype(np.int64)
    else:
        out = np.zeros(arr.shape, dtype=np.int64)
    return int(out) if out.ndim == 0 else out


@dataclass(eq=False)
class BucketGrid:
    """Sparse count grid, cells sorted by (level, bucket)."""

    level: np.ndarray
    bucket: np.ndarray
    count: np.ndarray
    level_table: LevelBidTable
    norm: NormParams

    @property
    def ls(self) -> np.ndarray:
        return np.bincount(self.level, weights=self.count, minlength=self.level_table.n_levels).astype(np.int64)

    @property
    def n_samples(self) -> int:
        return int(self.count.sum())

    @property
    def n_cells(self) -> int:
        return int(self.level.shape[0])

    def cells(self) -> dict:
        return {
            (int(v), int(c)): int(n) for v, c, n in zip(self.level.tolist(), self.bucket.tolist(), self.count.tolist())
        }

    def triples(self):
        """``(level_1, level_2, cnt_num)`` rows."""
        return list(zip(self.level.tolist(), self.bucket.tolist(), self.count.tolist()))

    def merge(self, other: "BucketGrid") -> "BucketGrid":
        if other.norm != self.norm or not np.array_equal(other.level_table.bids, self.level_table.bids):
            raise InvalidParameter("cannot merge grids built with different bucketing")
        return _grid_from_keys(
            np.concatenate((self._keys(), other._keys())),
            np.concatenate((self.count, other.count)),
            self.level_table,
            self.norm,
        )

    def _keys(self):
        return self.level * self.norm.n_buckets + self.bucket


def _grid_from_keys(keys, weights, level_table, norm) -> BucketGrid:
    if weights is None:
        uniq, count = np.unique(keys, return_counts=True)
    else:
        uniq, inv = np.unique(keys, return_inverse=True)
        count = np.bincount(inv, weights=weights, minlength=uniq.shape[0]).astype(np.int64)
    level, bucket = np.divmod(uniq, norm.n_buckets)
    return BucketGrid(level, bucket, count.astype(np.int64), level_table, norm)


def build_grid(samples, level_table: LevelBidTable, norm: NormParams) -> BucketGrid:
    batch = as_batch(samples)
    if len(batch) == 0:
        raise NoSamples("cannot build a grid from zero samples")
    levels = level_table.level_of(batch.label, batch.bid)
    keys = levels * norm.n_buckets + pcpm_bucket(batch.pcpm, norm)
    return _grid_from_keys(keys, None, level_table, norm)


class GridBuilder:
    """Incremental grid construction over a batch stream.

    Partial grids are merged cell-wise every ``merge_every`` batches so memory
    stays proportional to the number of occupied cells.
    """

    def __init__(self, level_table: LevelBidTable, norm: NormParams, merge_every: int = 8):
        self.level_table = level_table
        self.norm = norm
        self.merge_every = merge_every
        self._parts: list[BucketGrid] = []
        self._grid: Optional[BucketGrid] = None

    def add(self, batch: SampleBatch) -> None:
        if len(batch) == 0:
            return
        self._parts.append(build_grid(batch, self.level_table, self.norm))
        if len(self._parts) >= self.merge_every:
            self._flush()

    def _flush(self):
        parts = self._parts if self._grid is None else [self._grid, *self._parts]
        self._parts = []
        if not parts:
            return
        self._grid = _grid_from_keys(
            np.concatenate([p._keys() for p in parts]),
            np.concatenate([p.count for p in parts]),
            self.level_table,
            self.norm,
        )

    def finish(self) -> BucketGrid:
        self._flush()
        if self._grid is None:
            raise NoSamples("no samples were streamed into the grid")
        return self._grid


def build_grid_streaming(batches: Iterable[SampleBatch], level_table, norm) -> BucketGrid:
    builder = GridBuilder(level_table, norm)
    for batch in batches:
        builder.add(batch)
    return builder.finish()
