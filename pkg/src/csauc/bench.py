"""Timing harness: bucketed sweep (both kernel backends) against the pair oracle."""

from __future__ import annotations

import csv
import statistics
import time
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .bucketing import NormParams, build_grid, build_level_table
from .dp import compute_csauc_dp
from .model import SampleBatch, TiePolicy
from .oracle import csauc_exact_on_grid

BENCH_ORACLE_CAP = 5_000


@dataclass
class BenchRow:
    n: int
    l1: int
    l2: int
    cells: int
    backend: str
    grid_time: float
    dp_time: float
    oracle_time: Optional[float]
    csauc_dp: float
    csauc_oracle: Optional[float]
    agree: Optional[bool]


def random_batch(n: int, levels: int, seed: int, pos_rate: float = 0.3) -> SampleBatch:
    """Uniform pCTRs; positive bids drawn from ``levels`` distinct integers."""
    rng = np.random.default_rng(seed)
    label = (rng.random(n) < pos_rate).astype(np.int8)
    bid = rng.integers(1, levels + 1, size=n).astype(np.float64)
    pctr = rng.random(n)
    return SampleBatch(label, bid, pctr)


def _median_time(fn, repeats):
    times, out = [], None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), out


def bench_scaling(
    sizes: Sequence[int],
    levels: Sequence[int],
    buckets: Sequence[int],
    seed: int = 0,
    repeats: int = 5,
    oracle_cap: int = BENCH_ORACLE_CAP,
    backends: Optional[Sequence[str]] = None,
    tie_policy=TiePolicy.HALF,
):
    """One row per (n, levels, buckets, backend); medians over ``repeats`` runs.

    The sweep runs without bucket compression so its cost reflects the full
    ``levels * buckets`` accumulator scan.
    """
    backends = list(backends or _kernels.backends())
    rows = []
    for n in sizes:
        for l1 in levels:
            batch = random_batch(n, l1, seed)
            for l2 in buckets:
                table = build_level_table(batch)
                norm = NormParams.fit(batch.pcpm, l2)
                grid_time, grid = _median_time(lambda: build_grid(batch, table, norm), repeats)
                oracle_time = oracle_val = None
                if n <= oracle_cap:
                    oracle_time, ores = _median_time(lambda: csauc_exact_on_grid(grid, tie_policy), repeats)
                    oracle_val = ores.csauc
                for be in backends:
                    # warm-up triggers JIT compilation outside the timed runs
                    compute_csauc_dp(grid, tie_policy, compress=False, backend=be)
                    dp_time, res = _median_time(
                        lambda: compute_csauc_dp(grid, tie_policy, compress=False, backend=be), repeats
                    )
                    agree = None
                    if oracle_val is not None:
                        agree = abs(res.csauc - oracle_val) <= 1e-9 * max(1.0, abs(oracle_val))
                    rows.append(
                        BenchRow(n, table.n_levels, l2, grid.n_cells, be, grid_time, dp_time, oracle_time, res.csauc, oracle_val, agree)
                    )
    return rows


def write_rows(rows, fh) -> None:
    fields = list(BenchRow.__dataclass_fields__)
    w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        d = asdict(r)
        for k in ("grid_time", "dp_time", "oracle_time"):
            if d[k] is not None:
                d[k] = f"{d[k]:.6f}"
        for k in ("csauc_dp", "csauc_oracle"):
            if d[k] is not None:
                d[k] = f"{d[k]:.12f}"
        w.writerow({k: ("" if v is None else v) for k, v in d.items()})
