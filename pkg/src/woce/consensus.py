"""Weighted evidence accumulation, average-linkage consensus and the full pipeline."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .core import (
    CoAssociationMatrix,
    ConstraintSet,
    DataMatrix,
    Partition,
    ReferenceSet,
    WoceError,
)
from .diversity import (
    UniformityBreakdown,
    WeightVector,
    uniformity_breakdowns,
    weight_vector,
)
from .generators import build_schedule, generate_reference_set
from .linkage import Dendrogram, cut_dendrogram, lance_williams
from .preprocess import constraint_projection

__all__ = [
    "Dendrogram",
    "WoceResult",
    "average_linkage",
    "cut_dendrogram",
    "eac_matrix",
    "run_eac",
    "run_woce",
    "weac_matrix",
]

logger = logging.getLogger(__name__)


def weac_matrix(e: ReferenceSet, w) -> CoAssociationMatrix:
    """Co-association where partition t adds its weight to every pair it co-clusters.

    Every generator labels every instance, so each pair is observed in all
    ``T`` partitions and ``T`` is the denominator throughout.
    """
    weights = np.asarray(w.weights if isinstance(w, WeightVector) else w, dtype=float)
    if weights.shape != (e.T,):
        raise WoceError(f"{weights.size} weights for {e.T} partitions")
    if not np.any(weights):
        warnings.warn("all partition weights are zero; the co-association matrix is empty",
                      RuntimeWarning, stacklevel=2)
    n = e.n
    acc = np.zeros((n, n))
    for p, rho in zip(e.partitions, weights):
        same = p.labels[:, None] == p.labels[None, :]
        acc += rho * same
    max_weight = max(1.0, float(weights.max()))
    return CoAssociationMatrix(acc / e.T, e.T, max_weight)


def eac_matrix(e: ReferenceSet) -> CoAssociationMatrix:
    """Plain evidence accumulation: co-clustering counts over ``T``."""
    n = e.n
    counts = np.zeros((n, n), dtype=np.int64)
    for p in e.partitions:
        counts += p.labels[:, None] == p.labels[None, :]
    return CoAssociationMatrix(counts.astype(float) / e.T, e.T, 1.0)


def average_linkage(pi: CoAssociationMatrix) -> Dendrogram:
    """UPGMA on distances ``max_weight - c(i, j)``."""
    c = pi.entries
    if not np.allclose(c, c.T, rtol=0, atol=1e-12):
        raise WoceError("co-association matrix is not symmetric")
    return lance_williams(pi.max_weight - c, "average")


@dataclass(frozen=True, eq=False)
class WoceResult:
    partition: Partition
    reference: ReferenceSet
    coassociation: CoAssociationMatrix
    weights: WeightVector
    breakdowns: List[UniformityBreakdown]
    mapped: DataMatrix


def run_woce(xhat, cs: Optional[ConstraintSet] = None, k: int = 2, d: int = 0,
             T: int = 20, seed: int = 0, weight_mode: str = "minmax",
             uniformity_mode: str = "batch") -> WoceResult:
    """Map and project the data, build and score the ensemble, then aggregate."""
    if k < 2:
        raise WoceError(f"k must be >= 2, got {k}")
    cs = cs or ConstraintSet()
    z = constraint_projection(xhat, cs, d)
    if k > z.n:
        raise WoceError(f"k={k} exceeds the {z.n} instances")
    ref = generate_reference_set(z, build_schedule(k, T, seed))
    breakdowns = uniformity_breakdowns(ref, uniformity_mode)
    ref = ref.with_uniformities([b.raw for b in breakdowns])
    weights = weight_vector(ref, weight_mode)
    pi = weac_matrix(ref, weights)
    final = cut_dendrogram(average_linkage(pi), k)
    return WoceResult(final, ref, pi, weights, breakdowns, z)


def run_eac(xhat, k: int = 2, T: int = 20, seed: int = 0) -> WoceResult:
    """Evidence-accumulation baseline.

    Same generator bank and schedule as :func:`run_woce`, applied to the data
    as given (no decorrelating map, no constraints), with unit weights.
    """
    if k < 2:
        raise WoceError(f"k must be >= 2, got {k}")
    z = xhat if isinstance(xhat, DataMatrix) else DataMatrix(xhat)
    ref = generate_reference_set(z, build_schedule(k, T, seed))
    breakdowns = uniformity_breakdowns(ref)
    ref = ref.with_uniformities([b.raw for b in breakdowns])
    pi = eac_matrix(ref)
    final = cut_dendrogram(average_linkage(pi), k)
    return WoceResult(final, ref, pi, weight_vector(ref, "uniform"), breakdowns, z)
