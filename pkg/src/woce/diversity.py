"""Uniformity diversity score and partition weights for the consensus step."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .core import Partition, ReferenceSet, WoceError, cluster_sizes

WEIGHT_MODES = ("minmax", "clamped", "raw", "uniform")
UNIFORMITY_MODES = ("batch", "incremental")


@dataclass(frozen=True)
class UniformityBreakdown:
    eta: float
    xi: float
    theta: float
    raw: float
    final: float


@dataclass(frozen=True, eq=False)
class WeightVector:
    weights: np.ndarray
    mode: str

    def __len__(self):
        return len(self.weights)


def _size_terms(p: Partition, log=math.log) -> List[float]:
    """``n_i * log(n_i / n)`` for every cluster of ``p``."""
    n = p.n
    return [int(s) * log(int(s) / n) for s in cluster_sizes(p)]


def eta(p: Partition, log=math.log) -> float:
    n = p.n
    return max(int(s) * log(n / int(s)) for s in cluster_sizes(p))


def xi(p: Partition, log=math.log) -> float:
    return max(_size_terms(p, log))


def theta(p: Partition, e: ReferenceSet, exclude_self: bool = False, log=math.log) -> float:
    """Largest ``n_j log(n_j / n)`` over every cluster of every partition in ``e``.

    ``p`` only enters through ``n``, and through ``exclude_self``, which
    drops members equal to ``p`` (falling back to the full set if nothing
    would remain).
    """
    if e is None or not e.partitions:
        raise WoceError("theta needs a non-empty reference set")
    members = e.partitions
    if exclude_self:
        others = tuple(q for q in members if q != p)
        members = others or members
    if any(q.n != p.n for q in members):
        raise WoceError("partition and reference set cover different instance counts")
    return max(max(_size_terms(q, log)) for q in members)


def raw_uniformity(eta_v: float, xi_v: float, theta_v: float) -> float:
    denom = xi_v + theta_v
    if denom == 0:
        return 1.0 if eta_v == 0 else 0.0
    return 1.0 - (-2.0 * eta_v) / denom


def uniformity(p: Partition, e: ReferenceSet, exclude_self: bool = False,
               log=math.log) -> UniformityBreakdown:
    """Score ``p`` against reference set ``e``.

    ``final`` is the raw score clipped to [0, 1]; rescaling across a whole
    reference set happens in :func:`weight_vector`.
    """
    h = eta(p, log)
    x = xi(p, log)
    t = theta(p, e, exclude_self, log)
    raw = raw_uniformity(h, x, t)
    return UniformityBreakdown(h, x, t, raw, min(max(raw, 0.0), 1.0))


def score_reference_set(e: ReferenceSet, mode: str = "batch",
                        exclude_self: bool = False) -> ReferenceSet:
    """Return a copy of ``e`` carrying the raw uniformity of each member.

    ``batch`` scores every partition against the whole set. ``incremental``
    scores partition t against partitions 0..t-1 only, and the first
    partition, facing an empty set, scores 1.0.
    """
    return e.with_uniformities([b.raw for b in uniformity_breakdowns(e, mode, exclude_self)])


def uniformity_breakdowns(e: ReferenceSet, mode: str = "batch",
                          exclude_self: bool = False) -> List[UniformityBreakdown]:
    if mode not in UNIFORMITY_MODES:
        raise WoceError(f"unknown uniformity mode {mode!r}")
    out = []
    for t, p in enumerate(e.partitions):
        if mode == "batch":
            out.append(uniformity(p, e, exclude_self))
        elif t == 0:
            out.append(UniformityBreakdown(eta(p), xi(p), 0.0, 1.0, 1.0))
        else:
            prior = ReferenceSet(e.partitions[:t])
            out.append(uniformity(p, prior))
    return out


def weight_vector(e: ReferenceSet, mode: str = "minmax",
                  raws: Optional[np.ndarray] = None) -> WeightVector:
    """Turn raw uniformities into per-partition consensus weights."""
    if mode not in WEIGHT_MODES:
        raise WoceError(f"unknown weight mode {mode!r}")
    if mode == "uniform":
        return WeightVector(np.ones(e.T), mode)
    if raws is None:
        raws = e.uniformities
    if raws is None:
        raise WoceError("reference set has not been scored; call score_reference_set first")
    raws = np.asarray(raws, dtype=float)
    if raws.shape != (e.T,):
        raise WoceError(f"{raws.shape[0]} uniformities for {e.T} partitions")
    if mode == "raw":
        w = raws.copy()
    elif mode == "clamped":
        w = np.clip(raws, 0.0, 1.0)
    else:
        lo, hi = raws.min(), raws.max()
        w = np.ones_like(raws) if hi == lo else (raws - lo) / (hi - lo)
    return WeightVector(w, mode)
