"""Shared constructions and a plain-Python reference for the tests."""

import numpy as np

from csauc.model import SampleBatch

# Five-ad worked example: samples A..E; E is the only negative.
FIVE_BIDS = np.array([100.0, 4.0, 3.0, 2.0, 999.0])
FIVE_LABELS = np.array([1, 1, 1, 1, 0])

# pCTRs realizing each sequence's pCPM order (first = highest pCPM).
# Seq5 and Seq6 also put pCTR itself in the sequence order.
FIVE_PCTR = {
    "Seq1": (0.01, 0.4, 0.6, 0.95, 1e-6),  # D > C > B > A > E
    "Seq2": (0.5, 0.9, 0.9, 0.9, 1e-6),  # A > B > C > D > E
    "Seq3": (0.5, 0.6, 0.9, 0.9, 1e-6),  # A > C > B > D > E
    "Seq4": (0.5, 0.9, 0.5, 0.9, 1e-6),  # A > B > D > C > E
    "Seq5": (0.0005, 0.95, 0.9, 0.85, 0.001),  # B > C > D > E > A
    "Seq6": (0.95, 0.9, 0.002, 0.001, 0.003),  # A > B > E > C > D
}
FIVE_ORDER = {
    "Seq1": "DCBAE",
    "Seq2": "ABCDE",
    "Seq3": "ACBDE",
    "Seq4": "ABDCE",
    "Seq5": "BCDEA",
    "Seq6": "ABECD",
}
# captured revenue out of 420, by hand from the pair rule; the oracle confirms
FIVE_REWARD = {"Seq1": 125, "Seq2": 420, "Seq3": 419, "Seq4": 419, "Seq5": 29, "Seq6": 415}
FIVE_ROUNDED = {"Seq1": 0.2976, "Seq2": 1.0, "Seq3": 0.9976, "Seq4": 0.9976, "Seq5": 0.069, "Seq6": 0.988}


def five_ads(seq, group=None) -> SampleBatch:
    groups = None if group is None else np.array([group] * 5, dtype=object)
    return SampleBatch(FIVE_LABELS, FIVE_BIDS, np.array(FIVE_PCTR[seq]), groups)


def reference_csauc(label, bid, pcpm, full_ties=False):
    """Plain-Python pair enumeration straight from the revenue rule."""
    num = den = 0.0
    n = len(label)
    for h in range(n):
        if label[h] != 1:
            continue
        for l in range(n):
            if not (label[l] == 0 or bid[l] < bid[h]):
                continue
            t = bid[l] if label[l] == 1 else 0.0
            if pcpm[h] > pcpm[l]:
                num += bid[h]
            elif pcpm[h] < pcpm[l]:
                num += t
            else:
                num += bid[h] if full_ties else 0.5 * (bid[h] + t)
            den += bid[h]
    return num, den


def random_batch(rng, n=None, n_bids=8, tie_pctr=False, pos_rate=None) -> SampleBatch:
    n = int(rng.integers(2, 301)) if n is None else n
    pos_rate = rng.uniform(0.1, 0.9) if pos_rate is None else pos_rate
    label = (rng.random(n) < pos_rate).astype(np.int8)
    bid_set = rng.choice(np.arange(1, 50), size=int(rng.integers(1, n_bids + 1)), replace=False).astype(float)
    bid = rng.choice(bid_set, size=n)
    if tie_pctr:
        pctr = rng.choice(np.linspace(0.05, 0.95, int(rng.integers(1, 6))), size=n)
    else:
        pctr = rng.random(n)
    return SampleBatch(label, bid, pctr)
