"""Decorrelating feature mapping and pairwise-constraint projection.

Data are stored instances-by-features, so the mapped data are ``X @ Q``
rather than the column-major ``Q.T @ X``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .core import (
    ConstraintSet,
    DataMatrix,
    DegenerateConstraintsError,
    NumericalError,
    WoceError,
)

logger = logging.getLogger(__name__)

POSITIVE_EIGENVALUE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    vectors: np.ndarray  # columns are eigenvectors
    values: np.ndarray  # descending
    source: np.ndarray


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    W: np.ndarray
    zetas: np.ndarray
    gamma: float
    S_C: np.ndarray
    S_M: np.ndarray
    objective: float


def _values(x) -> np.ndarray:
    return x.values if isinstance(x, DataMatrix) else np.asarray(x, dtype=float)


def _like(x, values: np.ndarray) -> DataMatrix:
    # feature names do not survive a change of basis
    names = x.feature_names if isinstance(x, DataMatrix) and values.shape[1] == x.m else None
    return DataMatrix(values, names)


def center_data(xhat) -> DataMatrix:
    """Subtract the per-feature mean from every instance."""
    v = _values(xhat)
    if not np.all(np.isfinite(v)):
        raise WoceError("data contains NaN or Inf")
    return _like(xhat, v - v.mean(axis=0))


def covariance(x) -> np.ndarray:
    """``(1/n) X^T X`` for centered data (population normalization)."""
    v = _values(x)
    r = v.T @ v / v.shape[0]
    return (r + r.T) / 2


def eigendecompose_sym(r) -> EigenDecomposition:
    """Eigen-decomposition of a symmetric matrix with reproducible output.

    Eigenvalues come back in descending order; equal eigenvalues keep the
    solver's column order. Each eigenvector is flipped so that its entry of
    largest magnitude (first one on ties) is non-negative.
    """
    r = np.asarray(r, dtype=float)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise WoceError(f"expected a square matrix, got shape {r.shape}")
    if not np.all(np.isfinite(r)):
        raise WoceError("matrix contains NaN or Inf")
    r = (r + r.T) / 2
    try:
        values, vectors = np.linalg.eigh(r)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"symmetric eigensolver did not converge: {exc}") from exc
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    pivot = np.argmax(np.abs(vectors), axis=0)
    signs = np.where(vectors[pivot, np.arange(vectors.shape[1])] < 0, -1.0, 1.0)
    vectors = vectors * signs
    return EigenDecomposition(vectors, values, r)


def map_independent(xhat, d: int = 0) -> DataMatrix:
    """Rotate centered data onto the covariance eigenbasis.

    ``d = 0`` keeps all features; otherwise only the ``d`` directions with
    the largest eigenvalues are kept.
    """
    v = _values(xhat)
    m = v.shape[1]
    if d < 0 or d > m:
        raise WoceError(f"d must lie in [0, {m}], got {d}")
    x = center_data(xhat).values
    eig = eigendecompose_sym(covariance(x))
    q = eig.vectors if d == 0 else eig.vectors[:, :d]
    return DataMatrix(x @ q)


def _differences(y: np.ndarray, pairs) -> np.ndarray:
    if not pairs:
        return np.zeros((0, y.shape[1]))
    idx = np.asarray(pairs, dtype=np.int64)
    return y[idx[:, 0]] - y[idx[:, 1]]


def scatter_matrices(y, cs: ConstraintSet):
    """Return ``(S_C, S_M)``, the cannot-link and must-link scatter matrices."""
    if not cs.must or not cs.cannot:
        raise DegenerateConstraintsError(
            "scatter matrices need both must-link and cannot-link pairs"
        )
    v = _values(y)
    cs.check_bounds(v.shape[0])
    dc = _differences(v, cs.cannot)
    dm = _differences(v, cs.must)
    s_c = dc.T @ dc / (2 * len(cs.cannot))
    s_m = dm.T @ dm / (2 * len(cs.must))
    return (s_c + s_c.T) / 2, (s_m + s_m.T) / 2


def estimate_gamma(y, cs: ConstraintSet) -> float:
    """Ratio of mean squared cannot-link distance to mean squared must-link distance."""
    if not cs.must or not cs.cannot:
        raise DegenerateConstraintsError("gamma needs both must-link and cannot-link pairs")
    v = _values(y)
    cs.check_bounds(v.shape[0])
    must = np.mean(np.sum(_differences(v, cs.must) ** 2, axis=1))
    cannot = np.mean(np.sum(_differences(v, cs.cannot) ** 2, axis=1))
    if must == 0:
        raise DegenerateConstraintsError("every must-link pair has zero distance")
    return float(cannot / must)


def _pairwise_objective(w, v, cs, gamma) -> float:
    total = 0.0
    if cs.cannot:
        z = _differences(v, cs.cannot) @ w
        total += np.sum(z**2) / (2 * len(cs.cannot))
    if cs.must:
        z = _differences(v, cs.must) @ w
        total -= gamma * np.sum(z**2) / (2 * len(cs.must))
    return float(total)


def _scatter(v, pairs) -> np.ndarray:
    diff = _differences(v, pairs)
    if not pairs:
        return np.zeros((v.shape[1], v.shape[1]))
    return diff.T @ diff / (2 * len(pairs))


def objective_value(w, y, cs: ConstraintSet, gamma: float) -> float:
    """Projection objective ``trace(W^T (S_C - gamma S_M) W)``.

    The value is cross-checked against the direct pairwise sum; a mismatch
    beyond 1e-8 raises ``NumericalError``.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim == 1:
        w = w[:, None]
    if w.shape[1] < 1:
        raise WoceError("projection matrix needs at least one column")
    v = _values(y)
    cs.check_bounds(v.shape[0])
    trace_form = float(np.trace(w.T @ (_scatter(v, cs.cannot) - gamma * _scatter(v, cs.must)) @ w))
    pairwise = _pairwise_objective(w, v, cs, gamma)
    if not np.isclose(trace_form, pairwise, rtol=1e-8, atol=1e-8):
        raise NumericalError(
            f"trace objective {trace_form!r} disagrees with pairwise sum {pairwise!r}"
        )
    return trace_form


def fit_projection(y, cs: ConstraintSet) -> ProjectionResult:
    """Solve for the constraint projection on already-mapped data ``y``."""
    v = _values(y)
    s_c, s_m = scatter_matrices(v, cs)
    gamma = estimate_gamma(v, cs)
    eig = eigendecompose_sym(s_c - gamma * s_m)
    keep = eig.values > POSITIVE_EIGENVALUE_TOL
    if not np.any(keep):
        warnings.warn(
            "no positive eigenvalue in the constraint scatter difference; "
            "keeping the single largest direction",
            RuntimeWarning,
            stacklevel=2,
        )
        keep = np.zeros_like(keep)
        keep[0] = True
    w = eig.vectors[:, keep]
    return ProjectionResult(
        W=w,
        zetas=eig.values[keep],
        gamma=gamma,
        S_C=s_c,
        S_M=s_m,
        objective=objective_value(w, v, cs, gamma),
    )


def constraint_projection(xhat, cs: ConstraintSet, d: int = 0) -> DataMatrix:
    """Map the data, then project it so constraints are best preserved.

    With no constraints the mapped data are returned untouched. Constraint
    sets holding only one kind of pair also take that path, with a warning,
    since the balancing coefficient is undefined for them.
    """
    y = map_independent(xhat, d)
    if cs.is_empty():
        return y
    if not cs.must or not cs.cannot:
        warnings.warn(
            "constraint set has only one kind of pair; skipping the projection",
            RuntimeWarning,
            stacklevel=2,
        )
        return y
    proj = fit_projection(y, cs)
    logger.debug("projection kept %d of %d directions, gamma=%.4g",
                 proj.W.shape[1], y.m, proj.gamma)
    return DataMatrix(y.values @ proj.W)
