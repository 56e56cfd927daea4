"""External clustering scores against ground truth."""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..core import WoceError, validate_partition


def _labels(x) -> np.ndarray:
    return validate_partition(x).labels


def contingency(a, b) -> np.ndarray:
    la, lb = _labels(a), _labels(b)
    if la.shape != lb.shape:
        raise WoceError(f"label vectors differ in length: {la.size} vs {lb.size}")
    table = np.zeros((la.max() + 1, lb.max() + 1), dtype=np.int64)
    np.add.at(table, (la, lb), 1)
    return table


def accuracy_hungarian(pred, truth) -> float:
    """Fraction correct after the best one-to-one cluster-to-class matching."""
    table = contingency(pred, truth)
    size = max(table.shape)
    square = np.zeros((size, size), dtype=np.int64)
    square[: table.shape[0], : table.shape[1]] = table
    rows, cols = linear_sum_assignment(-square)
    return float(square[rows, cols].sum() / table.sum())


def nmi(a, b) -> float:
    """Normalized mutual information in the Fred-Jain form.

    ``-2 sum n_ab log(n_ab n / (n_a n_b)) / (sum n_a log(n_a/n) + sum n_b log(n_b/n))``
    """
    table = contingency(a, b).astype(float)
    n = table.sum()
    na = table.sum(axis=1)
    nb = table.sum(axis=0)
    denom = np.sum(na * np.log(na / n)) + np.sum(nb * np.log(nb / n))
    if denom == 0:
        # both partitions are a single cluster
        return 1.0
    nz = table > 0
    outer = np.outer(na, nb)
    num = -2.0 * np.sum(table[nz] * np.log(table[nz] * n / outer[nz]))
    return float(min(max(num / denom, 0.0), 1.0))

