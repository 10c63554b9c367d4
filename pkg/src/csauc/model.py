"""Domain types: single samples, columnar batches, tie policy and the report."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    NonBinaryLabel,
    NonFiniteValue,
    NonPositiveBid,
    PctrOutOfRange,
)


class TiePolicy(enum.Enum):
    """Payment rule for a pair whose pCPMs fall in the same bucket."""

    HALF = "half"
    FULL = "full"

    @classmethod
    def parse(cls, value) -> "TiePolicy":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


@dataclass(frozen=True)
class Sample:
    label: int
    bid: float
    pctr: float
    group_key: Optional[str] = None

    @property
    def pcpm(self) -> float:
        return self.pctr * self.bid


def validate_record(label, bid, pctr, group_key=None) -> Sample:
    """Turn one raw record into a :class:`Sample` or raise the first violation.

    Checks run in a fixed order (finiteness, label, bid, pctr) so that every
    record maps to exactly one error.
    """
    try:
        label_f, bid_f, pctr_f = float(label), float(bid), float(pctr)
    except (TypeError, ValueError) as exc:
        raise NonFiniteValue("record", (label, bid, pctr), f"unparseable record: {exc}") from None
    for name, v in (("label", label_f), ("bid", bid_f), ("pctr", pctr_f)):
        if not math.isfinite(v):
            raise NonFiniteValue(name, v)
    if label_f not in (0.0, 1.0):
        raise NonBinaryLabel("label", label)
    if bid_f <= 0.0:
        raise NonPositiveBid("bid", bid)
    if not 0.0 <= pctr_f <= 1.0:
        raise PctrOutOfRange("pctr", pctr)
    return Sample(int(label_f), bid_f, pctr_f, None if group_key is None else str(group_key))


# Row error codes used by the vectorized validator; 0 means valid.
ROW_OK = 0
ROW_PARSE = 1
ROW_NONFINITE = 2
ROW_LABEL = 3
ROW_BID = 4
ROW_PCTR = 5

ROW_ERROR_NAMES = {
    ROW_PARSE: "RowParseError",
    ROW_NONFINITE: "NonFiniteValue",
    ROW_LABEL: "NonBinaryLabel",
    ROW_BID: "NonPositiveBid",
    ROW_PCTR: "PctrOutOfRange",
}


def classify_rows(label: np.ndarray, bid: np.ndarray, pctr: np.ndarray) -> np.ndarray:
    """Vectorized :func:`validate_record`: one error code per row, same priority."""
    code = np.zeros(label.shape[0], dtype=np.int8)
    with np.errstate(invalid="ignore"):
        nonfinite = ~(np.isfinite(label) & np.isfinite(bid) & np.isfinite(pctr))
        bad_label = (label != 0.0) & (label != 1.0)
        bad_bid = ~(bid > 0.0)
        bad_pctr = ~((pctr >= 0.0) & (pctr <= 1.0))
    # assign lowest priority first so higher-priority codes overwrite
    code[bad_pctr] = ROW_PCTR
    code[bad_bid] = ROW_BID
    code[bad_label] = ROW_LABEL
    code[nonfinite] = ROW_NONFINITE
    return code


@dataclass
class SampleBatch:
    """Columnar block of validated samples.

    ``groups`` is either ``None`` or an object array of group keys aligned with
    the numeric columns.
    """

    label: np.ndarray
    bid: np.ndarray
    pctr: np.ndarray
    groups: Optional[np.ndarray] = None

    def __post_init__(self):
        self.label = np.asarray(self.label, dtype=np.int8)
        self.bid = np.asarray(self.bid, dtype=np.float64)
        self.pctr = np.asarray(self.pctr, dtype=np.float64)
        if self.groups is not None:
            self.groups = np.asarray(self.groups, dtype=object)

    def __len__(self) -> int:
        return int(self.label.shape[0])

    @property
    def pcpm(self) -> np.ndarray:
        return self.pctr * self.bid

    @property
    def n_positive(self) -> int:
        return int(np.count_nonzero(self.label))

    def take(self, idx) -> "SampleBatch":
        return SampleBatch(
            self.label[idx],
            self.bid[idx],
            self.pctr[idx],
            None if self.groups is None else self.groups[idx],
        )

    def samples(self):
        groups = self.groups if self.groups is not None else [None] * len(self)
        for y, b, p, g in zip(self.label.tolist(), self.bid.tolist(), self.pctr.tolist(), groups):
            yield Sample(y, b, p, g)

    @classmethod
    def from_samples(cls, samples: Sequence[Sample]) -> "SampleBatch":
        samples = list(samples)
        has_groups = any(s.group_key is not None for s in samples)
        return cls(
            np.array([s.label for s in samples], dtype=np.int8),
            np.array([s.bid for s in samples], dtype=np.float64),
            np.array([s.pctr for s in samples], dtype=np.float64),
            np.array([s.group_key for s in samples], dtype=object) if has_groups else None,
        )

    @classmethod
    def concat(cls, batches: Sequence["SampleBatch"]) -> "SampleBatch":
        batches = list(batches)
        if not batches:
            return cls(np.empty(0), np.empty(0), np.empty(0))
        groups = None
        if all(b.groups is not None for b in batches):
            groups = np.concatenate([b.groups for b in batches])
        return cls(
            np.concatenate([b.label for b in batches]),
            np.concatenate([b.bid for b in batches]),
            np.concatenate([b.pctr for b in batches]),
            groups,
        )


def as_batch(samples) -> SampleBatch:
    """Accept a SampleBatch or any iterable of Samples."""
    if isinstance(samples, SampleBatch):
        return samples
    return SampleBatch.from_samples(samples)


METRIC_NAMES = ("auc", "csauc", "gcsauc", "gauc", "copc", "ropr")


@dataclass
class MetricsReport:
    auc: Optional[float] = None
    csauc: Optional[float] = None
    gcsauc: Optional[float] = None
    gauc: Optional[float] = None
    copc: Optional[float] = None
    ropr: Optional[float] = None
    n_samples: int = 0
    n_positive: int = 0
    n_groups: int = 0
    reward_max: float = 0.0
    skipped_groups: int = 0
    skipped_rows: dict = field(default_factory=dict)
    per_group: Optional[list] = None

    def __post_init__(self):
        for name in ("auc", "csauc", "gcsauc", "gauc"):
            v = getattr(self, name)
            if v is not None and not (0.0 <= v <= 1.0):
                raise ValueError(f"{name}={v} outside [0, 1]")
        for name in ("copc", "ropr"):
            v = getattr(self, name)
            if v is not None and v < 0.0:
                raise ValueError(f"{name}={v} is negative")
        if self.n_positive > self.n_samples:
            raise ValueError("n_positive exceeds n_samples")

    def to_json(self, precision: int = 6) -> str:
        """Serialize with fixed key order and fixed-point floats."""

        def num(v):
            if v is None:
                return "null"
            if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
                return str(int(v))
            return f"{float(v):.{precision}f}"

        parts = []
        for name in METRIC_NAMES:
            v = getattr(self, name)
            if v is not None:
                parts.append(f'"{name}": {num(v)}')
        parts += [
            f'"n_samples": {num(self.n_samples)}',
            f'"n_positive": {num(self.n_positive)}',
            f'"n_groups": {num(self.n_groups)}',
            f'"reward_max": {num(self.reward_max)}',
            f'"skipped_groups": {num(self.skipped_groups)}',
        ]
        rows = ", ".join(f'"{k}": {num(v)}' for k, v in sorted(self.skipped_rows.items()))
        parts.append(f'"skipped_rows": {{{rows}}}')
        if self.per_group is not None:
            items = []
            for entry in self.per_group:
                fields = ", ".join(
                    f"{json.dumps(k)}: {json.dumps(v) if isinstance(v, str) else num(v)}"
                    for k, v in entry.items()
                )
                items.append("{" + fields + "}")
            parts.append('"per_group": [' + ", ".join(items) + "]")
        return "{" + ", ".join(parts) + "}"

    def to_text(self, precision: int = 6) -> str:
        lines = []
        for name in METRIC_NAMES:
            v = getattr(self, name)
            if v is not None:
                lines.append(f"{name:<16}{v:.{precision}f}")
        lines += [
            f"{'n_samples':<16}{self.n_samples}",
            f"{'n_positive':<16}{self.n_positive}",
            f"{'n_groups':<16}{self.n_groups}",
            f"{'reward_max':<16}{self.reward_max:.{precision}f}",
            f"{'skipped_groups':<16}{self.skipped_groups}",
        ]
        for k, v in sorted(self.skipped_rows.items()):
            lines.append(f"{'skipped:' + k:<16}{v}")
        if self.per_group:
            lines.append("")
            lines.append(f"{'metric':<8}{'group':<20}{'value':>12}{'weight':>16}")
            for e in self.per_group:
                lines.append(
                    f"{e['metric']:<8}{e['key']:<20}{e['value']:>12.{precision}f}{e['weight']:>16.{precision}f}"
                )
        return "\n".join(lines)
