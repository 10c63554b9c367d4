"""Pure-numpy kernels. Same signatures as the numba versions in ``_numba``."""

import math

import numpy as np


def dp_sweep(cell_level, cell_bucket, cell_count, level_bid, n_buckets, tie_full, compensated):
    """Level-ordered reward sweep over a sorted sparse grid.

    Cells must be sorted by (level, bucket). Returns
    ``(reward_rank, reward_max, n_pairs)``.
    """
    n_levels = level_bid.shape[0]
    cnt_low = np.zeros(n_buckets, dtype=np.int64)
    tsum_low = np.zeros(n_buckets, dtype=np.float64)
    bounds = np.searchsorted(cell_level, np.arange(n_levels + 1), side="left")

    rank_terms = []
    reward_rank = 0.0
    reward_max = 0.0
    n_pairs = 0
    total_below = 0
    for v in range(n_levels):
        lo, hi = bounds[v], bounds[v + 1]
        if lo == hi:
            continue
        c = cell_bucket[lo:hi]
        n = cell_count[lo:hi]
        ls_v = int(n.sum())
        bid = float(level_bid[v])
        if v >= 1 and total_below > 0:
            below = np.concatenate(([0], np.cumsum(cnt_low)))[c]
            above = np.concatenate((np.cumsum(tsum_low[::-1])[::-1][1:], [0.0]))[c]
            nf = n.astype(np.float64)
            terms = nf * bid * below + nf * above
            if tie_full:
                terms += nf * bid * cnt_low[c]
            else:
                terms += nf * 0.5 * (bid * cnt_low[c] + tsum_low[c])
            if compensated:
                rank_terms.append(terms)
            else:
                reward_rank += float(terms.sum())
            reward_max += ls_v * bid * total_below
            n_pairs += ls_v * total_below
        cnt_low[c] += n
        tsum_low[c] += n * bid
        total_below += ls_v
    if compensated:
        reward_rank = math.fsum(np.concatenate(rank_terms).tolist()) if rank_terms else 0.0
    return reward_rank, reward_max, n_pairs


def pairwise_samples(label, bid, pcpm, tie_full):
    """Brute-force csAUC sums over raw samples; levels are exact bids."""
    tvalue = np.where(label == 1, bid, 0.0)
    reward_rank = 0.0
    reward_max = 0.0
    n_pairs = 0
    for h in np.flatnonzero(label == 1):
        bh = bid[h]
        low = (label == 0) | (bid < bh)
        m = int(np.count_nonzero(low))
        if m == 0:
            continue
        ph = pcpm[h]
        pl = pcpm[low]
        tl = tvalue[low]
        win = pl < ph
        lose = pl > ph
        tie = ~(win | lose)
        paid = np.where(win, bh, 0.0) + np.where(lose, tl, 0.0)
        if tie_full:
            paid += np.where(tie, bh, 0.0)
        else:
            paid += np.where(tie, 0.5 * (bh + tl), 0.0)
        reward_rank += float(paid.sum())
        reward_max += bh * m
        n_pairs += m
    return reward_rank, reward_max, n_pairs


def pairwise_cells(cell_level, cell_bucket, cell_count, level_bid, tie_full):
    """Brute-force csAUC sums over grid cells weighted by count products."""
    tvalue = level_bid[cell_level]
    cnt = cell_count.astype(np.float64)
    reward_rank = 0.0
    reward_max = 0.0
    n_pairs = 0
    for i in range(cell_level.shape[0]):
        v = cell_level[i]
        if v == 0:
            continue
        low = cell_level < v
        if not low.any():
            continue
        bh = level_bid[v]
        w = cnt[i] * cnt[low]
        cl = cell_bucket[low]
        tl = tvalue[low]
        ci = cell_bucket[i]
        paid = np.where(cl < ci, bh, 0.0) + np.where(cl > ci, tl, 0.0)
        tie = cl == ci
        if tie_full:
            paid += np.where(tie, bh, 0.0)
        else:
            paid += np.where(tie, 0.5 * (bh + tl), 0.0)
        reward_rank += float((w * paid).sum())
        reward_max += float(w.sum()) * bh
        n_pairs += int(cell_count[i]) * int(cell_count[low].sum())
    return reward_rank, reward_max, n_pairs


def auc_sorted(label, score):
    """Mid-rank AUC over samples already sorted ascending by score.

    Returns ``(auc, n_pos, n_neg)``; auc is nan when a class is missing.
    """
    n = score.shape[0]
    n_pos = int(np.count_nonzero(label))
    n_neg = n - n_pos
    if n_pos == 0 or n_neg == 0:
        return math.nan, n_pos, n_neg
    starts = np.flatnonzero(np.concatenate(([True], score[1:] != score[:-1])))
    ends = np.concatenate((starts[1:], [n]))
    mid = (starts + ends + 1) * 0.5
    pos_per_group = np.add.reduceat(label.astype(np.int64), starts)
    rank_sum = float(np.dot(pos_per_group, mid))
    auc = (rank_sum - n_pos * (n_pos + 1) / 2.0) / (float(n_pos) * n_neg)
    return auc, n_pos, n_neg


def auc_pairs(label, score):
    """Brute-force pos/neg pair AUC: ``(concordant + 0.5 * ties, n_pairs)``."""
    pos = score[label == 1]
    neg = score[label == 0]
    credit = 0.0
    for p in pos:
        credit += float(np.count_nonzero(neg < p)) + 0.5 * float(np.count_nonzero(neg == p))
    return credit, pos.shape[0] * neg.shape[0]
