import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csauc.errors import NoPosNegPairs, ZeroPredictedClicks, ZeroPredictedRevenue
from csauc.metrics import auc_rank, copc, ropr
from csauc.model import SampleBatch
from csauc.oracle import auc_pairwise

from helpers import five_ads


def test_auc_examples(backend):
    assert auc_rank(SampleBatch([1, 0], [1, 1.0], [0.9, 0.1]), backend=backend) == 1.0
    assert auc_rank(SampleBatch([1, 0], [1, 1.0], [0.5, 0.5]), backend=backend) == 0.5
    assert auc_rank(five_ads("Seq6"), backend=backend) == 0.5
    assert auc_rank(five_ads("Seq5"), backend=backend) == 0.75


def test_auc_needs_both_classes():
    with pytest.raises(NoPosNegPairs):
        auc_rank(SampleBatch([0, 0], [1, 1.0], [0.5, 0.2]))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_auc_rank_equals_pairwise(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 500))
    label = rng.integers(0, 2, n)
    if label.min() == label.max():
        label[0] = 1 - label[0]
    levels = int(rng.integers(1, 8))
    pctr = rng.choice(rng.random(levels), size=n) if rng.random() < 0.5 else rng.random(n)
    b = SampleBatch(label, np.ones(n), pctr)
    assert auc_rank(b) == pytest.approx(auc_pairwise(b), abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_auc_invariant_under_increasing_transform(seed):
    rng = np.random.default_rng(seed)
    n = 100
    label = rng.integers(0, 2, n)
    label[:2] = (0, 1)
    pctr = rng.choice(np.linspace(0.01, 0.99, 9), n)
    b = SampleBatch(label, np.ones(n), pctr)
    t = SampleBatch(label, np.ones(n), np.sqrt(pctr) * 0.5)
    assert auc_rank(b) == auc_rank(t)


def test_copc_examples():
    assert copc(SampleBatch([1, 0, 1], [1, 1, 1.0], [0.5, 0.25, 0.25])) == 2.0
    assert copc(SampleBatch([1], [3.0], [1.0])) == 1.0
    assert copc(SampleBatch([0, 0], [3.0, 4.0], [0.2, 0.1])) == 0.0
    with pytest.raises(ZeroPredictedClicks):
        copc(SampleBatch([1], [3.0], [0.0]))


def test_ropr_examples():
    assert ropr(SampleBatch([1, 0], [100.0, 999.0], [0.5, 0.4])) == 100 / (50 + 399.6)
    assert ropr(SampleBatch([0, 0], [3.0, 4.0], [0.2, 0.1])) == 0.0
    with pytest.raises(ZeroPredictedRevenue):
        ropr(SampleBatch([1], [3.0], [0.0]))


@settings(max_examples=100)
@given(st.integers(0, 2**31 - 1), st.floats(0.5, 500))
def test_uniform_bid_ropr_equals_copc(seed, bid):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 300))
    b = SampleBatch(rng.integers(0, 2, n), np.full(n, bid), rng.uniform(0.01, 1, n))
    assert abs(ropr(b) - copc(b)) <= 1e-15 * max(1.0, copc(b))


def test_pctr_scaling():
    rng = np.random.default_rng(1)
    b = SampleBatch(rng.integers(0, 2, 50), rng.integers(1, 9, 50).astype(float), rng.uniform(0.1, 1, 50))
    s = SampleBatch(b.label, b.bid, b.pctr * 0.25)
    assert copc(s) == pytest.approx(copc(b) / 0.25, rel=1e-12)
    assert ropr(s) == pytest.approx(ropr(b) / 0.25, rel=1e-12)
