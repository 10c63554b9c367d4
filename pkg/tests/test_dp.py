import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csauc.bucketing import NormParams, build_grid, build_level_table
from csauc.dp import RewardResult, compute_csauc_dp, compute_csauc_streaming
from csauc.errors import NoRankedPairs, NoSamples
from csauc.model import SampleBatch, TiePolicy
from csauc.oracle import csauc_exact_on_grid

from helpers import FIVE_PCTR, FIVE_REWARD, random_batch, reference_csauc, five_ads


def grid_of(batch, n_buckets=100_001, quant="exact"):
    return build_grid(batch, build_level_table(batch, quant), NormParams.fit(batch.pcpm, n_buckets))


@pytest.mark.parametrize("seq", sorted(FIVE_PCTR))
def test_five_ads_rewards(seq, backend):
    res = compute_csauc_dp(grid_of(five_ads(seq)), backend=backend)
    assert res.reward_rank == FIVE_REWARD[seq]
    assert res.reward_max == 420
    assert res.n_pairs == 10
    assert res.csauc == pytest.approx(FIVE_REWARD[seq] / 420, abs=1e-15)


def test_single_tied_pair_half_credit(backend):
    b = SampleBatch([1, 0], [7.0, 7.0], [0.3, 0.3])
    assert compute_csauc_dp(grid_of(b), "half", backend=backend).csauc == 0.5
    assert compute_csauc_dp(grid_of(b), "full", backend=backend).csauc == 1.0


def test_tie_between_positives_pays_symmetric_expectation(backend):
    # high bid 10 ties with low bid 4: half credit pays (10 + 4) / 2 out of 10
    b = SampleBatch([1, 1], [10.0, 4.0], [0.2, 0.5])
    res = compute_csauc_dp(grid_of(b), backend=backend)
    assert res.reward_rank == 7.0 and res.reward_max == 10.0


def test_no_ranked_pairs(backend):
    all_neg = SampleBatch([0, 0], [1.0, 2.0], [0.1, 0.2])
    with pytest.raises(NoRankedPairs):
        compute_csauc_dp(grid_of(all_neg), backend=backend)
    same_bid = SampleBatch([1, 1], [3.0, 3.0], [0.1, 0.2])
    with pytest.raises(NoRankedPairs):
        compute_csauc_dp(grid_of(same_bid), backend=backend)


def test_reward_result_ratio():
    assert RewardResult(125.0, 420.0, 10).csauc == 125 / 420
    with pytest.raises(NoRankedPairs):
        RewardResult(0.0, 0.0, 0).csauc


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from([1, 3, 17, 1001, 100_001]), st.booleans())
def test_matches_cell_oracle(seed, n_buckets, ties):
    rng = np.random.default_rng(seed)
    b = random_batch(rng, tie_pctr=ties)
    grid = grid_of(b, n_buckets)
    for tie in TiePolicy:
        try:
            want = csauc_exact_on_grid(grid, tie)
        except NoRankedPairs:
            with pytest.raises(NoRankedPairs):
                compute_csauc_dp(grid, tie)
            continue
        for compress in (True, False):
            got = compute_csauc_dp(grid, tie, compress=compress)
            assert got.reward_max == pytest.approx(want.reward_max, rel=1e-12)
            assert got.reward_rank == pytest.approx(want.reward_rank, rel=1e-9, abs=1e-9)
            assert got.n_pairs == want.n_pairs


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_matches_reference_when_buckets_distinct(seed):
    rng = np.random.default_rng(seed)
    b = random_batch(rng, n=int(rng.integers(2, 80)))
    grid = grid_of(b)
    # only meaningful when bucketing preserved the exact pCPM order
    if grid.n_cells != len(np.unique(b.pcpm)) or len(np.unique(grid.bucket)) != len(np.unique(b.pcpm)):
        return
    num, den = reference_csauc(b.label.tolist(), b.bid.tolist(), b.pcpm.tolist())
    if den == 0:
        return
    assert compute_csauc_dp(grid).csauc == pytest.approx(num / den, rel=1e-9)


def test_quantized_levels_stay_in_unit_interval():
    rng = np.random.default_rng(5)
    for _ in range(50):
        n = 200
        b = SampleBatch(rng.integers(0, 2, n), rng.uniform(0.5, 80, n).round(2), rng.random(n))
        for q in ("width:7", "quantile:5"):
            grid = grid_of(b, 1001, q)
            res = compute_csauc_dp(grid)
            assert 0.0 <= res.reward_rank <= res.reward_max * (1 + 1e-12)
            assert res.csauc == pytest.approx(csauc_exact_on_grid(grid).csauc, rel=1e-9)


def test_compensated_flag_agrees():
    rng = np.random.default_rng(11)
    b = random_batch(rng, n=300)
    grid = grid_of(b)
    plain = compute_csauc_dp(grid)
    comp = compute_csauc_dp(grid, compensated=True)
    assert comp.csauc == pytest.approx(plain.csauc, rel=1e-12)


def test_streaming_is_bit_identical():
    rng = np.random.default_rng(3)
    b = random_batch(rng, n=300)
    table = build_level_table(b)
    norm = NormParams.fit(b.pcpm)
    parts = [b.take(np.arange(i, min(i + 37, 300))) for i in range(0, 300, 37)]
    direct = compute_csauc_dp(build_grid(b, table, norm))
    streamed = compute_csauc_streaming(iter(parts), norm, table)
    assert streamed == direct


def test_streaming_errors():
    b = five_ads("Seq1")
    table, norm = build_level_table(b), NormParams.fit(b.pcpm)
    with pytest.raises(NoSamples):
        compute_csauc_streaming(iter([]), norm, table)
    negs = SampleBatch([0, 0], [1.0, 2.0], [0.1, 0.2])
    with pytest.raises(NoRankedPairs):
        compute_csauc_streaming(iter([negs]), NormParams.fit(negs.pcpm), build_level_table(negs))


def test_large_sweep_is_fast(backend):
    import time

    rng = np.random.default_rng(0)
    n = 200_000
    b = SampleBatch(rng.integers(0, 2, n), rng.integers(1, 101, n).astype(float), rng.random(n))
    grid = grid_of(b)
    assert grid.level_table.n_levels == 101
    compute_csauc_dp(grid, compress=False, backend=backend)  # compile
    t0 = time.perf_counter()
    compute_csauc_dp(grid, compress=False, backend=backend)
    assert time.perf_counter() - t0 < 1.0
