"""numba-compiled kernels mirroring ``_numpy`` one for one."""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def dp_sweep(cell_level, cell_bucket, cell_count, level_bid, n_buckets, tie_full, compensated):
    n_levels = level_bid.shape[0]
    n_cells = cell_level.shape[0]
    cnt_low = np.zeros(n_buckets, dtype=np.int64)
    tsum_low = np.zeros(n_buckets, dtype=np.float64)
    below = np.zeros(n_buckets, dtype=np.int64)
    above = np.zeros(n_buckets, dtype=np.float64)

    reward_rank = 0.0
    comp = 0.0
    reward_max = 0.0
    n_pairs = 0
    total_below = 0
    i = 0
    for v in range(n_levels):
        lo = i
        while i < n_cells and cell_level[i] == v:
            i += 1
        hi = i
        if lo == hi:
            continue
        bid = level_bid[v]
        ls_v = 0
        for k in range(lo, hi):
            ls_v += cell_count[k]
        if v >= 1 and total_below > 0:
            acc = 0
            for c in range(n_buckets):
                below[c] = acc
                acc += cnt_low[c]
            tacc = 0.0
            for c in range(n_buckets - 1, -1, -1):
                above[c] = tacc
                tacc += tsum_low[c]
            for k in range(lo, hi):
                c = cell_bucket[k]
                n = float(cell_count[k])
                term = n * bid * below[c] + n * above[c]
                if tie_full:
                    term += n * bid * cnt_low[c]
                else:
                    term += n * 0.5 * (bid * cnt_low[c] + tsum_low[c])
                if compensated:
                    t = reward_rank + term
                    if abs(reward_rank) >= abs(term):
                        comp += (reward_rank - t) + term
                    else:
                        comp += (term - t) + reward_rank
                    reward_rank = t
                else:
                    reward_rank += term
            reward_max += ls_v * bid * total_below
            n_pairs += ls_v * total_below
        for k in range(lo, hi):
            c = cell_bucket[k]
            cnt_low[c] += cell_count[k]
            tsum_low[c] += cell_count[k] * bid
        total_below += ls_v
    return reward_rank + comp, reward_max, n_pairs


@njit(cache=True)
def pairwise_samples(label, bid, pcpm, tie_full):
    n = label.shape[0]
    reward_rank = 0.0
    reward_max = 0.0
    n_pairs = 0
    for h in range(n):
        if label[h] != 1:
            continue
        bh = bid[h]
        ph = pcpm[h]
        for j in range(n):
            if label[j] == 1 and not bid[j] < bh:
                continue
            tl = bid[j] if label[j] == 1 else 0.0
            pl = pcpm[j]
            if ph > pl:
                reward_rank += bh
            elif ph < pl:
                reward_rank += tl
            elif tie_full:
                reward_rank += bh
            else:
                reward_rank += 0.5 * (bh + tl)
            reward_max += bh
            n_pairs += 1
    return reward_rank, reward_max, n_pairs


@njit(cache=True)
def pairwise_cells(cell_level, cell_bucket, cell_count, level_bid, tie_full):
    m = cell_level.shape[0]
    reward_rank = 0.0
    reward_max = 0.0
    n_pairs = 0
    for i in range(m):
        v = cell_level[i]
        if v == 0:
            continue
        bh = level_bid[v]
        ci = cell_bucket[i]
        for j in range(m):
            if not cell_level[j] < v:
                continue
            w = float(cell_count[i]) * float(cell_count[j])
            tl = level_bid[cell_level[j]]
            cj = cell_bucket[j]
            if ci > cj:
                paid = bh
            elif ci < cj:
                paid = tl
            elif tie_full:
                paid = bh
            else:
                paid = 0.5 * (bh + tl)
            reward_rank += w * paid
            reward_max += w * bh
            n_pairs += cell_count[i] * cell_count[j]
    return reward_rank, reward_max, n_pairs


@njit(cache=True)
def auc_sorted(label, score):
    n = score.shape[0]
    n_pos = 0
    for k in range(n):
        n_pos += label[k]
    n_neg = n - n_pos
    if n_pos == 0 or n_neg == 0:
        return math.nan, n_pos, n_neg
    rank_sum = 0.0
    start = 0
    while start < n:
        end = start + 1
        while end < n and score[end] == score[start]:
            end += 1
        pos = 0
        for k in range(start, end):
            pos += label[k]
        rank_sum += pos * (start + end + 1) * 0.5
        start = end
    auc = (rank_sum - n_pos * (n_pos + 1) / 2.0) / (float(n_pos) * n_neg)
    return auc, n_pos, n_neg


@njit(cache=True)
def auc_pairs(label, score):
    n = label.shape[0]
    credit = 0.0
    n_pairs = 0
    for i in range(n):
        if label[i] != 1:
            continue
        for j in range(n):
            if label[j] != 0:
                continue
            if score[i] > score[j]:
                credit += 1.0
            elif score[i] == score[j]:
                credit += 0.5
            n_pairs += 1
    return credit, n_pairs
