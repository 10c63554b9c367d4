import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csauc.bucketing import (
    BidBuckets,
    GridBuilder,
    NormParams,
    build_grid,
    build_level_table,
    level_table_from_bids,
    pcpm_bucket,
)
from csauc.errors import InvalidParameter, LevelLookupMiss, NoSamples
from csauc.model import SampleBatch

from helpers import FIVE_PCTR, five_ads


def test_exact_levels_five_ads():
    table = build_level_table(five_ads("Seq2"))
    np.testing.assert_array_equal(table.bids, [0, 2, 3, 4, 100])
    np.testing.assert_array_equal(table.level_of(np.array([0, 1, 1, 1, 1]), np.array([999, 2, 3, 4, 100.0])), [0, 1, 2, 3, 4])


def test_single_positive_level():
    b = SampleBatch([1, 1, 0], [5.0, 5.0, 7.0], [0.1, 0.2, 0.3])
    np.testing.assert_array_equal(build_level_table(b).bids, [0.0, 5.0])


def test_fixed_width_midpoints():
    bids = np.arange(1, 101, dtype=float)
    b = SampleBatch(np.ones(100), bids, np.full(100, 0.5))
    table = build_level_table(b, "width:10")
    np.testing.assert_allclose(table.bids[1:], np.arange(5.5, 100, 10.0))
    levels = table.level_of(b.label, b.bid)
    np.testing.assert_array_equal(levels, np.repeat(np.arange(1, 11), 10))


def test_quantile_levels_ordered_with_member_means():
    bids = np.array([1, 1, 2, 3, 10, 10, 11, 50], dtype=float)
    table = level_table_from_bids(bids, quantization="quantile:4")
    assert np.all(np.diff(table.bids[1:]) > 0)
    levels = table.positive_level(bids)
    for v in np.unique(levels):
        assert table.bids[v] == pytest.approx(bids[levels == v].mean())
    assert np.all(np.diff(levels) >= 0)


def test_lookup_miss():
    table = level_table_from_bids(np.array([2.0, 3.0]))
    with pytest.raises(LevelLookupMiss):
        table.positive_level(np.array([2.5]))
    with pytest.raises(LevelLookupMiss):
        table.level_of(np.array([1]), np.array([10.0]))
    # negatives never need a level lookup
    np.testing.assert_array_equal(table.level_of(np.array([0]), np.array([10.0])), [0])


@pytest.mark.parametrize("text", ["width:0", "quantile:1.5", "bogus", "exact:3", "width"])
def test_bid_bucket_parse_errors(text):
    with pytest.raises(InvalidParameter):
        BidBuckets.parse(text)


def test_bid_bucket_parse():
    assert BidBuckets.parse("exact") == BidBuckets()
    assert BidBuckets.parse("width:2.5") == BidBuckets("width", 2.5)
    assert BidBuckets.parse("quantile:4") == BidBuckets("quantile", 4)


def test_pcpm_bucket_extremes_and_midpoint():
    norm = NormParams(1.0, 3.0)
    assert pcpm_bucket(1.0, norm) == 0
    assert pcpm_bucket(3.0, norm) == 100_000
    assert pcpm_bucket(2.0, norm) == 50_000


def test_pcpm_bucket_degenerate_range():
    norm = NormParams(2.0, 2.0, 11)
    np.testing.assert_array_equal(pcpm_bucket(np.array([2.0, 2.0]), norm), [0, 0])


def test_norm_params_validation():
    with pytest.raises(InvalidParameter):
        NormParams(2.0, 1.0)
    with pytest.raises(InvalidParameter):
        NormParams(0.0, 1.0, 0)
    with pytest.raises(NoSamples):
        NormParams.fit([])


finite = st.floats(0, 1e6, allow_nan=False)


@given(st.lists(finite, min_size=2, max_size=50), st.integers(2, 200_001))
def test_pcpm_bucket_monotone_and_in_range(values, n_buckets):
    v = np.sort(np.array(values))
    b = pcpm_bucket(v, NormParams.fit(v, n_buckets))
    assert np.all(np.diff(b) >= 0)
    assert b.min() >= 0 and b.max() <= n_buckets - 1


@settings(max_examples=50)
@given(st.integers(0, 2**31 - 1), st.sampled_from([0.5, 3.0, 1000.0, 0.1]))
def test_bucket_scale_invariance(seed, lam):
    rng = np.random.default_rng(seed)
    v = rng.random(200) * 50
    base = pcpm_bucket(v, NormParams.fit(v))
    scaled = pcpm_bucket(v * lam, NormParams.fit(v * lam))
    np.testing.assert_array_equal(base, scaled)


def test_grid_five_ads_all_distinct():
    b = five_ads("Seq2")
    grid = build_grid(b, build_level_table(b), NormParams.fit(b.pcpm))
    assert grid.n_cells == 5
    assert set(grid.cells().values()) == {1}
    np.testing.assert_array_equal(grid.ls, [1, 1, 1, 1, 1])
    assert len(grid.triples()) == 5


def test_grid_counts_duplicates():
    b = SampleBatch([1, 1], [2.0, 2.0], [0.3, 0.3])
    grid = build_grid(b, build_level_table(b), NormParams.fit(b.pcpm))
    assert grid.cells() == {(1, 0): 2}


def test_grid_empty():
    b = five_ads("Seq1")
    with pytest.raises(NoSamples):
        build_grid(b.take(np.array([], dtype=int)), build_level_table(b), NormParams(0, 1))
    with pytest.raises(NoSamples):
        build_level_table([])


@settings(max_examples=40)
@given(st.integers(0, 2**31 - 1))
def test_grid_totals_and_merge(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 400))
    b = SampleBatch(rng.integers(0, 2, n), rng.integers(1, 6, n).astype(float), rng.random(n))
    table = build_level_table(b)
    norm = NormParams.fit(b.pcpm, int(rng.integers(1, 1000)))
    grid = build_grid(b, table, norm)
    assert grid.n_samples == n == grid.ls.sum()
    assert grid.bucket.max() < norm.n_buckets
    for v, total in enumerate(grid.ls):
        assert grid.count[grid.level == v].sum() == total
    # cells sorted by (level, bucket)
    keys = grid.level * norm.n_buckets + grid.bucket
    assert np.all(np.diff(keys) > 0)
    # sharded construction merges to the same grid
    cut = int(rng.integers(0, n + 1))
    parts = [b.take(np.arange(cut)), b.take(np.arange(cut, n))]
    builder = GridBuilder(table, norm, merge_every=1)
    for p in parts:
        builder.add(p)
    merged = builder.finish()
    assert merged.cells() == grid.cells()
    if 0 < cut < n:
        g1, g2 = (build_grid(p, table, norm) for p in parts)
        assert g1.merge(g2).cells() == g2.merge(g1).cells() == grid.cells()


def test_exact_level_order_matches_bid_order():
    b = five_ads("Seq5")
    table = build_level_table(b)
    lv = table.level_of(b.label, b.bid)
    pos = b.label == 1
    order_by_bid = np.argsort(b.bid[pos])
    assert np.all(np.diff(lv[pos][order_by_bid]) > 0)


def test_all_seq_constructions_have_distinct_buckets():
    for seq in FIVE_PCTR:
        b = five_ads(seq)
        buckets = pcpm_bucket(b.pcpm, NormParams.fit(b.pcpm))
        assert len(set(buckets.tolist())) == 5, seq
