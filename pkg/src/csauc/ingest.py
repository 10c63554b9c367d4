"""Streaming readers for CSV, TSV and JSONL prediction logs.

Input is read in blocks of lines. Each block is parsed with a fast all-float
path first; only blocks containing malformed values fall back to per-cell
coercion so that bad rows can be counted by category. Rows that fail
validation are dropped and tallied, or raise in strict mode.
"""

from __future__ import annotations

import io
import itertools
import json
import os
import sys
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np
import pandas as pd

from .errors import (
    EmptyInput,
    InputFileNotFound,
    InvalidParameter,
    MalformedHeader,
    NonBinaryLabel,
    NonFiniteValue,
    NonPositiveBid,
    PctrOutOfRange,
    RowParseError,
)
from .model import (
    ROW_BID,
    ROW_ERROR_NAMES,
    ROW_LABEL,
    ROW_NONFINITE,
    ROW_OK,
    ROW_PARSE,
    ROW_PCTR,
    Sample,
    SampleBatch,
    classify_rows,
)

FORMATS = ("csv", "tsv", "jsonl")
DEFAULT_COLUMNS = {"label": "label", "bid": "bid", "pctr": "pctr", "group": "group"}
DEFAULT_CHUNK = 500_000

_ROW_EXC = {
    ROW_NONFINITE: NonFiniteValue,
    ROW_LABEL: NonBinaryLabel,
    ROW_BID: NonPositiveBid,
    ROW_PCTR: PctrOutOfRange,
}
_NAN_LITERALS = {"nan", "+nan", "-nan"}


def infer_format(path: str) -> str:
    low = str(path).lower()
    if low.endswith(".tsv") or low.endswith(".tab"):
        return "tsv"
    if low.endswith(".jsonl") or low.endswith(".ndjson") or low.endswith(".json"):
        return "jsonl"
    return "csv"


@dataclass
class InputSpec:
    """Where and how to read samples.

    ``column_map`` maps ``label``/``bid``/``pctr``/``group`` to header names
    or zero-based column indices. ``group`` is loaded only when
    ``use_group`` is set; a missing group column then raises
    :class:`MalformedHeader`.
    """

    path: str
    format: Optional[str] = None
    has_header: bool = True
    column_map: dict = field(default_factory=dict)
    use_group: bool = False
    strict: bool = False
    chunk_size: int = DEFAULT_CHUNK

    def __post_init__(self):
        self.path = str(self.path)
        if self.format is None:
            self.format = infer_format(self.path)
        self.format = self.format.lower()
        if self.format not in FORMATS:
            raise InvalidParameter(f"unknown input format {self.format!r}")
        cmap = dict(DEFAULT_COLUMNS) if self.has_header or self.format == "jsonl" else {"label": 0, "bid": 1, "pctr": 2, "group": 3}
        cmap.update({k: v for k, v in self.column_map.items() if v is not None})
        unknown = set(cmap) - set(DEFAULT_COLUMNS)
        if unknown:
            raise InvalidParameter(f"unknown column roles {sorted(unknown)}")
        self.column_map = cmap

    @property
    def seekable(self) -> bool:
        return self.path != "-"

    def roles(self):
        return ("label", "bid", "pctr", "group") if self.use_group else ("label", "bid", "pctr")


class SampleStream:
    """Re-iterable stream of validated samples from one :class:`InputSpec`.

    ``errors`` holds the per-category tally of dropped rows from the most
    recent complete pass. Standard input is buffered on first read so that a
    second pass sees the same rows.
    """

    def __init__(self, spec: InputSpec):
        self.spec = spec
        self.errors: Counter = Counter()
        self.n_rows = 0
        self._buffer: Optional[list] = None
        if spec.seekable and not os.path.exists(spec.path):
            raise InputFileNotFound(f"no such file: {spec.path}")

    def batches(self) -> Iterator[SampleBatch]:
        if self._buffer is not None:
            yield from self._buffer
            return
        if not self.spec.seekable:
            tally = Counter()
            self._buffer = list(_read(self.spec, sys.stdin, tally))
            self.errors = tally
            self.n_rows = sum(len(b) for b in self._buffer)
            yield from self._buffer
            return
        tally = Counter()
        rows = 0
        with open(self.spec.path, "r", newline="", encoding="utf-8") as fh:
            for batch in _read(self.spec, fh, tally):
                rows += len(batch)
                yield batch
        self.errors = tally
        self.n_rows = rows

    def __iter__(self) -> Iterator[Sample]:
        for batch in self.batches():
            yield from batch.samples()

    def read_all(self) -> SampleBatch:
        return SampleBatch.concat(list(self.batches()))


def stream_samples(spec: InputSpec) -> SampleStream:
    return SampleStream(spec)


def read_samples(path, **kwargs) -> SampleBatch:
    """Convenience: read a whole file into one batch."""
    return SampleStream(InputSpec(path, **kwargs)).read_all()


def _read(spec: InputSpec, fh, tally: Counter) -> Iterator[SampleBatch]:
    if spec.format == "jsonl":
        yield from _read_jsonl(spec, fh, tally)
    else:
        yield from _read_delimited(spec, fh, tally)


# -- delimited -----------------------------------------------------------------


def _resolve_columns(spec: InputSpec, header: Optional[list]):
    """Return {role: column position}."""
    out = {}
    for role in spec.roles():
        ref = spec.column_map[role]
        if header is None:
            try:
                out[role] = int(ref)
            except (TypeError, ValueError):
                raise MalformedHeader(f"headerless input needs a column index for {role}, got {ref!r}") from None
            continue
        if isinstance(ref, int):
            if ref >= len(header):
                raise MalformedHeader(f"column index {ref} for {role} out of range")
            out[role] = ref
        elif ref in header:
            out[role] = header.index(ref)
        else:
            raise MalformedHeader(f"header {header} lacks column {ref!r} for {role}")
    return out


def _read_delimited(spec: InputSpec, fh, tally: Counter) -> Iterator[SampleBatch]:
    sep = "\t" if spec.format == "tsv" else ","
    header = None
    line_no = 0
    if spec.has_header:
        first = fh.readline()
        if not first:
            return
        line_no = 1
        header = [h.strip() for h in first.rstrip("\r\n").split(sep)]
    cols = _resolve_columns(spec, header)
    n_fields = len(header) if header is not None else None

    while True:
        lines = list(itertools.islice(fh, spec.chunk_size))
        if not lines:
            break
        if n_fields is None:
            n_fields = lines[0].count(sep) + 1
            if max(cols.values()) >= n_fields:
                raise MalformedHeader(f"input has {n_fields} columns; column map needs {max(cols.values()) + 1}")
        # blank lines are skipped; rows with the wrong field count never reach the parser
        counts = [line.count(sep) if line.strip() else -1 for line in lines]
        ragged = [k for k, c in enumerate(counts) if c >= 0 and c != n_fields - 1]
        if ragged and spec.strict:
            line = line_no + ragged[0] + 1
            raise RowParseError(f"line {line}: expected {n_fields} fields", row=line)
        if ragged:
            tally["RowParseError"] += len(ragged)
        if ragged or -1 in counts:
            index = np.array([k for k, c in enumerate(counts) if c == n_fields - 1], dtype=np.int64)
            kept = [lines[k] for k in index.tolist()]
        else:
            kept, index = lines, None
        if kept:
            batch = _parse_block("".join(kept), sep, n_fields, cols, spec, tally, line_no, index)
            if batch is not None:
                yield batch
        line_no += len(lines)


def _parse_block(text, sep, n_fields, cols, spec, tally, first_line, index=None) -> Optional[SampleBatch]:
    names = list(range(n_fields))
    numeric = [cols["label"], cols["bid"], cols["pctr"]]
    usecols = sorted(set(cols.values()))
    dtypes = {c: np.float64 for c in numeric}
    if "group" in cols:
        dtypes[cols["group"]] = str
    common = dict(
        sep=sep,
        header=None,
        names=names,
        usecols=usecols,
        skip_blank_lines=True,
        keep_default_na=False,
        na_values=[],
        engine="c",
    )
    try:
        df = pd.read_csv(io.StringIO(text), dtype=dtypes, **common)
        codes_from_parse = None
    except (ValueError, pd.errors.ParserError):
        df, codes_from_parse = _parse_block_slow(text, common, cols)

    label = df[cols["label"]].to_numpy(np.float64)
    bid = df[cols["bid"]].to_numpy(np.float64)
    pctr = df[cols["pctr"]].to_numpy(np.float64)
    groups = None
    if "group" in cols:
        groups = df[cols["group"]].to_numpy(object)
    code = classify_rows(label, bid, pctr)
    if codes_from_parse is not None:
        code[codes_from_parse] = ROW_PARSE
    rows = df.index.to_numpy() if index is None else index[df.index.to_numpy()]
    return _finish(label, bid, pctr, groups, code, spec, tally, first_line, rows)


def _parse_block_slow(text, common, cols):
    """Per-cell coercion for blocks that the fast path rejected."""
    df = pd.read_csv(io.StringIO(text), dtype=str, **common)
    parse_fail = np.zeros(len(df), dtype=bool)
    for role in ("label", "bid", "pctr"):
        raw = df[cols[role]].fillna("")
        vals = pd.to_numeric(raw, errors="coerce").to_numpy(np.float64)
        nan = np.isnan(vals)
        if nan.any():
            literal = raw[nan].str.strip().str.lower().isin(_NAN_LITERALS).to_numpy()
            fail = nan.copy()
            fail[nan] = ~literal
            parse_fail |= fail
        df[cols[role]] = vals
    if "group" in cols:
        df[cols["group"]] = df[cols["group"]].fillna("")
    return df, parse_fail


def _finish(label, bid, pctr, groups, code, spec, tally, first_line, row_index) -> Optional[SampleBatch]:
    bad = code != ROW_OK
    if bad.any():
        if spec.strict:
            k = int(np.flatnonzero(bad)[0])
            line = first_line + int(row_index[k]) + 1
            c = int(code[k])
            if c == ROW_PARSE:
                raise RowParseError(f"line {line}: unparseable value", row=line)
            field_name = {ROW_NONFINITE: "record", ROW_LABEL: "label", ROW_BID: "bid", ROW_PCTR: "pctr"}[c]
            row = (float(label[k]), float(bid[k]), float(pctr[k]))
            value = {ROW_LABEL: row[0], ROW_BID: row[1], ROW_PCTR: row[2]}.get(c, row)
            raise _ROW_EXC[c](field_name, value, f"line {line}: invalid {field_name} {value!r}")
        kinds, counts = np.unique(code[bad], return_counts=True)
        for kind, cnt in zip(kinds.tolist(), counts.tolist()):
            tally[ROW_ERROR_NAMES[kind]] += cnt
        keep = ~bad
        label, bid, pctr = label[keep], bid[keep], pctr[keep]
        if groups is not None:
            groups = groups[keep]
    if label.shape[0] == 0:
        return None
    return SampleBatch(label, bid, pctr, groups)


# -- jsonl ---------------------------------------------------------------------


def _read_jsonl(spec: InputSpec, fh, tally: Counter) -> Iterator[SampleBatch]:
    cmap = spec.column_map
    roles = spec.roles()
    line_no = 0
    while True:
        lines = list(itertools.islice(fh, spec.chunk_size))
        if not lines:
            break
        cols = {r: [] for r in roles}
        parse_fail = []
        index = []
        for k, line in enumerate(lines):
            if not line.strip():
                continue
            index.append(k)
            try:
                obj = json.loads(line)
                vals = [float(obj[cmap[r]]) for r in ("label", "bid", "pctr")]
                grp = None
                if spec.use_group:
                    grp = obj[cmap["group"]]
                    if grp is None:
                        raise KeyError(cmap["group"])
                    grp = str(grp)
                ok = True
            except (ValueError, KeyError, TypeError) as exc:
                if spec.strict:
                    raise RowParseError(f"line {line_no + k + 1}: {exc}", row=line_no + k + 1) from None
                vals, grp, ok = [np.nan, np.nan, np.nan], "", False
            for r, v in zip(("label", "bid", "pctr"), vals):
                cols[r].append(v)
            if spec.use_group:
                cols["group"].append(grp)
            parse_fail.append(not ok)
        label = np.asarray(cols["label"], dtype=np.float64)
        bid = np.asarray(cols["bid"], dtype=np.float64)
        pctr = np.asarray(cols["pctr"], dtype=np.float64)
        groups = np.asarray(cols["group"], dtype=object) if spec.use_group else None
        code = classify_rows(label, bid, pctr)
        code[np.asarray(parse_fail, dtype=bool)] = ROW_PARSE
        batch = _finish(label, bid, pctr, groups, code, spec, tally, line_no, np.asarray(index, dtype=np.int64))
        line_no += len(lines)
        if batch is not None:
            yield batch


# -- first pass ----------------------------------------------------------------


@dataclass
class PassOneStats:
    n_samples: int
    n_positive: int
    min_pcpm: float
    max_pcpm: float
    pos_bids: np.ndarray
    pos_bid_counts: np.ndarray
    n_groups: int = 0
    group_keys: Optional[set] = None
    errors: Counter = field(default_factory=Counter)
    sum_label: float = 0.0
    sum_pctr: float = 0.0
    sum_label_bid: float = 0.0
    sum_pctr_bid: float = 0.0
    uniform_bid: bool = False


def two_pass_plan(source) -> PassOneStats:
    """Scan once for global pCPM extrema, distinct positive bids and groups.

    ``source`` is an :class:`InputSpec`, a :class:`SampleStream`, or any
    iterable of :class:`SampleBatch`. Raises :class:`EmptyInput` when no
    valid sample is found.
    """
    if isinstance(source, InputSpec):
        source = SampleStream(source)
    batches = source.batches() if isinstance(source, SampleStream) else iter(source)

    n = n_pos = 0
    lo, hi = np.inf, -np.inf
    bid_lo, bid_hi = np.inf, -np.inf
    bid_counts: Counter = Counter()
    keys = None
    sums = np.zeros(4)
    for b in batches:
        if len(b) == 0:
            continue
        n += len(b)
        lab = b.label.astype(np.float64)
        sums += (lab.sum(), b.pctr.sum(), np.dot(lab, b.bid), np.dot(b.pctr, b.bid))
        pcpm = b.pcpm
        lo = min(lo, float(pcpm.min()))
        hi = max(hi, float(pcpm.max()))
        bid_lo = min(bid_lo, float(b.bid.min()))
        bid_hi = max(bid_hi, float(b.bid.max()))
        pos = b.label == 1
        n_pos += int(pos.sum())
        u, c = np.unique(b.bid[pos], return_counts=True)
        bid_counts.update(dict(zip(u.tolist(), c.tolist())))
        if b.groups is not None:
            keys = set() if keys is None else keys
            keys.update(pd.unique(b.groups).tolist())
    if n == 0:
        raise EmptyInput("no valid samples in input")
    bids = np.array(sorted(bid_counts), dtype=np.float64)
    counts = np.array([bid_counts[x] for x in bids.tolist()], dtype=np.int64)
    return PassOneStats(
        n_samples=n,
        n_positive=n_pos,
        min_pcpm=lo,
        max_pcpm=hi,
        pos_bids=bids,
        pos_bid_counts=counts,
        n_groups=len(keys) if keys is not None else 0,
        group_keys=keys,
        errors=Counter(source.errors) if isinstance(source, SampleStream) else Counter(),
        sum_label=float(sums[0]),
        sum_pctr=float(sums[1]),
        sum_label_bid=float(sums[2]),
        sum_pctr_bid=float(sums[3]),
        uniform_bid=bid_lo == bid_hi,
    )
