"""AUC (rank statistic), COPC and ROPR."""

from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .errors import NoPosNegPairs, ZeroPredictedClicks, ZeroPredictedRevenue
from .model import as_batch


def auc_rank(samples, backend=None) -> float:
    """Mann-Whitney AUC with mid-ranks for tied pCTRs."""
    batch = as_batch(samples)
    order = np.argsort(batch.pctr, kind="stable")
    auc, n_pos, n_neg = _kernels.get(backend).auc_sorted(
        np.ascontiguousarray(batch.label[order], dtype=np.int64), np.ascontiguousarray(batch.pctr[order])
    )
    if math.isnan(auc):
        raise NoPosNegPairs(f"AUC needs both classes (positives={n_pos}, negatives={n_neg})")
    return float(auc)


def copc(samples) -> float:
    """Observed clicks over predicted clicks."""
    batch = as_batch(samples)
    predicted = float(batch.pctr.sum())
    if not predicted > 0:
        raise ZeroPredictedClicks("sum of pctr is zero")
    return float(batch.label.sum()) / predicted


def ropr(samples) -> float:
    """Observed revenue over predicted revenue (bid-weighted COPC).

    A uniform bid cancels out of the ratio, so that case returns the COPC
    ratio directly instead of accumulating rounding from the products.
    """
    batch = as_batch(samples)
    bid = batch.bid
    if len(bid) and bid.min() == bid.max():
        predicted = float(batch.pctr.sum())
        if not predicted > 0:
            raise ZeroPredictedRevenue("sum of pctr * bid is zero")
        return float(batch.label.sum()) / predicted
    predicted = float(np.dot(batch.pctr, bid))
    if not predicted > 0:
        raise ZeroPredictedRevenue("sum of pctr * bid is zero")
    return float(np.dot(batch.label.astype(np.float64), bid)) / predicted
