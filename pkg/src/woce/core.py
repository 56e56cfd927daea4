"""Shared data types: data matrices, partitions, constraints, reference sets."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np


class WoceError(ValueError):
    """Base class for invalid-input errors raised by this package."""


class DegenerateConstraintsError(WoceError):
    pass


class InfeasibleConstraintsError(WoceError):
    pass


class NumericalError(RuntimeError):
    """An iterative numerical routine failed to converge."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """n instances (rows) by m features (columns)."""

    values: np.ndarray
    feature_names: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.ndim != 2:
            raise WoceError(f"data must be 2-D, got shape {v.shape}")
        n, m = v.shape
        if n < 2 or m < 1:
            raise WoceError(f"need n >= 2 instances and m >= 1 features, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise WoceError("data contains NaN or Inf")
        if self.feature_names is not None:
            names = tuple(str(s) for s in self.feature_names)
            if len(names) != m:
                raise WoceError(f"{len(names)} feature names for {m} features")
            object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "values", _readonly(v))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class Partition:
    """Hard assignment of n instances to k clusters labelled 0..k-1.

    Construct through :func:`validate_partition` to get canonical labels.
    """

    labels: np.ndarray
    k: int

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash((self.k, self.labels.tobytes()))


def validate_partition(labels, n: Optional[int] = None) -> Partition:
    """Renumber ``labels`` to 0..k-1 in order of first appearance.

    >>> validate_partition([2, 0, 2, 1]).labels.tolist()
    [0, 1, 0, 2]
    """
    if isinstance(labels, Partition):
        labels = labels.labels
    raw = np.asarray(labels)
    if raw.ndim != 1:
        raise WoceError(f"labels must be 1-D, got shape {raw.shape}")
    if n is not None and raw.shape[0] != n:
        raise WoceError(f"labels have length {raw.shape[0]}, expected {n}")
    if raw.shape[0] == 0:
        raise WoceError("empty label vector")
    if raw.dtype.kind == "f" and not np.all(np.isfinite(raw)):
        raise WoceError("labels contain non-finite values")
    _, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
    # np.unique sorts by value; re-rank the groups by first occurrence
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    canon = rank[inverse.ravel()].astype(np.int64)
    return Partition(_readonly(canon), int(order.size))


def cluster_sizes(p: Partition) -> np.ndarray:
    return np.bincount(p.labels, minlength=p.k)


def _as_pairs(pairs) -> Tuple[Tuple[int, int], ...]:
    return tuple((int(i), int(j)) for i, j in pairs)


@dataclass(frozen=True)
class ConstraintSet:
    """Must-link and cannot-link pairs over zero-based instance indices."""

    must: Tuple[Tuple[int, int], ...] = ()
    cannot: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "must", _as_pairs(self.must))
        object.__setattr__(self, "cannot", _as_pairs(self.cannot))
        for i, j in self.must + self.cannot:
            if i == j:
                raise WoceError(f"constraint pair ({i}, {j}) links an instance to itself")
            if i < 0 or j < 0:
                raise WoceError(f"negative index in constraint pair ({i}, {j})")
        both = {frozenset(p) for p in self.must} & {frozenset(p) for p in self.cannot}
        if both:
            i, j = sorted(next(iter(both)))
            raise WoceError(f"pair ({i}, {j}) is both must-link and cannot-link")

    @property
    def n_must(self) -> int:
        return len(self.must)

    @property
    def n_cannot(self) -> int:
        return len(self.cannot)

    def is_empty(self) -> bool:
        return not self.must and not self.cannot

    def check_bounds(self, n: int) -> None:
        for i, j in self.must + self.cannot:
            if i >= n or j >= n:
                raise WoceError(f"constraint pair ({i}, {j}) out of range for n={n}")


@dataclass(frozen=True, eq=False)
class ReferenceSet:
    """Ordered ensemble of partitions, optionally scored with raw uniformities."""

    partitions: Tuple[Partition, ...]
    uniformities: Optional[np.ndarray] = None
    names: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        parts = tuple(self.partitions)
        if not parts:
            raise WoceError("reference set must contain at least one partition")
        n = parts[0].n
        if any(p.n != n for p in parts):
            raise WoceError("all partitions must label the same number of instances")
        object.__setattr__(self, "partitions", parts)
        if self.uniformities is not None:
            u = np.asarray(self.uniformities, dtype=float)
            if u.shape != (len(parts),):
                raise WoceError(f"{u.shape[0]} uniformities for {len(parts)} partitions")
            object.__setattr__(self, "uniformities", _readonly(u))
        if self.names and len(self.names) != len(parts):
            raise WoceError("names must match the number of partitions")
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def T(self) -> int:
        return len(self.partitions)

    @property
    def n(self) -> int:
        return self.partitions[0].n

    def with_uniformities(self, values: Sequence[float]) -> "ReferenceSet":
        return ReferenceSet(self.partitions, np.asarray(values, dtype=float), self.names)


@dataclass(frozen=True, eq=False)
class CoAssociationMatrix:
    """Symmetric n x n consensus matrix.

    ``beta`` is the number of partitions each pair was observed in and
    ``max_weight`` the largest partition weight, used to turn the matrix
    into linkage distances.
    """

    entries: np.ndarray
    beta: int
    max_weight: float = 1.0

    def __post_init__(self):
        c = np.asarray(self.entries, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise WoceError(f"co-association matrix must be square, got {c.shape}")
        object.__setattr__(self, "entries", _readonly(c))

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def to_csv(self, path) -> None:
        np.savetxt(path, self.entries, delimiter=",", fmt="%.17g")
