"""Lance-Williams agglomerative clustering on a precomputed distance matrix."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .core import Partition, WoceError, validate_partition

LINKAGES = ("single", "average", "complete", "ward")

# relative slack under which two candidate merge heights count as tied
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class Dendrogram:
    """Merge history over n leaves.

    ``merges[s] = (a, b, height)`` joins the clusters currently held in slots
    ``a < b``; the merged cluster takes slot ``a`` and slot ``b`` retires.
    Slot numbers start out as leaf indices.
    """

    n: int
    merges: Tuple[Tuple[int, int, float], ...]


def _lw_update(method, d_ka, d_kb, d_ab, n_a, n_b, n_k):
    if method == "single":
        return np.minimum(d_ka, d_kb)
    if method == "complete":
        return np.maximum(d_ka, d_kb)
    if method == "average":
        return (n_a * d_ka + n_b * d_kb) / (n_a + n_b)
    if method == "ward":
        tot = n_a + n_b + n_k
        return ((n_a + n_k) * d_ka + (n_b + n_k) * d_kb - n_k * d_ab) / tot
    raise WoceError(f"unknown linkage {method!r}")


def lance_williams(dist, method: str = "average", stop_at: int = 1) -> Dendrogram:
    """Greedy agglomeration until ``stop_at`` clusters remain.

    Ties (within a relative 1e-12) go to the lexicographically smallest slot
    pair. For ``ward`` the input is taken as plain distances and the update
    runs on their squares; reported heights are square roots.
    """
    d = np.array(dist, dtype=float, copy=True)
    n = d.shape[0]
    if d.ndim != 2 or d.shape[1] != n:
        raise WoceError(f"distance matrix must be square, got {d.shape}")
    if method not in LINKAGES:
        raise WoceError(f"unknown linkage {method!r}")
    if not 1 <= stop_at <= n:
        raise WoceError(f"stop_at must lie in [1, {n}], got {stop_at}")
    if method == "ward":
        d = d**2
    np.fill_diagonal(d, np.inf)
    sizes = np.ones(n)
    active = np.ones(n, dtype=bool)
    merges = []
    for _ in range(n - stop_at):
        lo = d.min()
        tol = TIE_RTOL * max(abs(lo), 1.0)
        flat = int(np.flatnonzero(d.ravel() <= lo + tol)[0])
        a, b = divmod(flat, n)
        if a > b:
            a, b = b, a
        height = float(np.sqrt(max(lo, 0.0))) if method == "ward" else float(lo)
        merges.append((a, b, height))
        new = _lw_update(method, d[a], d[b], d[a, b], sizes[a], sizes[b], sizes)
        active[b] = False
        new[~active] = np.inf
        new[a] = np.inf
        d[a, :] = new
        d[:, a] = new
        d[b, :] = np.inf
        d[:, b] = np.inf
        sizes[a] += sizes[b]
    return Dendrogram(n, tuple(merges))


def cut_dendrogram(dend: Dendrogram, k: int) -> Partition:
    """Apply the first ``n - k`` merges and return the ``k`` resulting clusters."""
    n = dend.n
    if not 1 <= k <= n:
        raise WoceError(f"k must lie in [1, {n}], got {k}")
    if n - k > len(dend.merges):
        raise WoceError(f"dendrogram holds {len(dend.merges)} merges, cannot reach k={k}")
    owner = np.arange(n)  # slot currently holding each leaf
    for a, b, _ in dend.merges[: n - k]:
        owner[owner == b] = a
    return validate_partition(owner, n)
