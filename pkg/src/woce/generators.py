"""Base clusterer bank and the schedule that builds the reference set."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import cdist, pdist, squareform

from .core import DataMatrix, Partition, ReferenceSet, WoceError, validate_partition
from .linkage import cut_dendrogram, lance_williams

logger = logging.getLogger(__name__)

METRICS = ("euclidean", "hamming", "cosine")

# Bank order: the implemented rows of the base-clusterer table.
KINDS: Tuple[str, ...] = (
    "kmeans",
    "fuzzy_cmeans",
    "gmm",
    "subtractive",
    *(f"{link}_{metric}" for link in ("single", "average", "complete", "ward") for metric in METRICS),
    "spectral_sparse",
)
REPEAT_KINDS = ("kmeans", "fuzzy_cmeans", "spectral_sparse")


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    k_t: int
    seed: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise WoceError(f"unknown generator kind {self.kind!r}")
        if self.k_t < 2:
            raise WoceError(f"k_t must be >= 2, got {self.k_t}")


@dataclass(frozen=True)
class EnsembleSchedule:
    specs: Tuple[GeneratorSpec, ...]
    k_final: int

    def __post_init__(self):
        if not self.specs:
            raise WoceError("schedule needs at least one generator")
        for s in self.specs:
            if not 2 <= s.k_t <= self.k_final + 2:
                raise WoceError(f"k_t={s.k_t} outside [2, {self.k_final + 2}]")

    @property
    def T(self) -> int:
        return len(self.specs)


def build_schedule(k_final: int, T: int = 20, seed: int = 0) -> EnsembleSchedule:
    """Every bank kind once, then seed-varied repeats; k_t cycles over [2, k+2]."""
    if k_final < 2:
        raise WoceError(f"k_final must be >= 2, got {k_final}")
    if T < 1:
        raise WoceError(f"T must be >= 1, got {T}")
    kinds = list(KINDS[:T])
    kinds += [REPEAT_KINDS[i % len(REPEAT_KINDS)] for i in range(T - len(kinds))]
    children = np.random.SeedSequence(seed).spawn(T)
    seeds = [int(c.generate_state(1)[0]) for c in children]
    span = k_final + 1
    specs = tuple(GeneratorSpec(kind, 2 + t % span, s) for t, (kind, s) in enumerate(zip(kinds, seeds)))
    return EnsembleSchedule(specs, k_final)


def _values(z) -> np.ndarray:
    return z.values if isinstance(z, DataMatrix) else np.asarray(z, dtype=float)


def _check_k(k_t: int, n: int) -> None:
    if k_t < 1:
        raise WoceError(f"cluster count must be >= 1, got {k_t}")
    if k_t > n:
        raise WoceError(f"cannot form {k_t} clusters from {n} instances")


def _sq_dists(x, centers) -> np.ndarray:
    return cdist(x, centers, "sqeuclidean")


def kmeanspp_centers(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    closest = _sq_dists(x, x[chosen])[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = int(rng.choice(n, p=closest / total))
        else:
            # all points coincide with a center already; take any unused index
            free = np.setdiff1d(np.arange(n), chosen)
            idx = int(rng.choice(free))
        chosen.append(idx)
        closest = np.minimum(closest, _sq_dists(x, x[idx : idx + 1])[:, 0])
    return x[chosen].copy()


def _fill_empty(labels: np.ndarray, k: int, affinity: np.ndarray) -> np.ndarray:
    """Give every empty cluster the point with the highest affinity for it.

    Only points whose own cluster keeps at least one member are eligible.
    """
    labels = labels.copy()
    for c in range(k):
        counts = np.bincount(labels, minlength=k)
        if counts[c]:
            continue
        eligible = counts[labels] > 1
        score = np.where(eligible, affinity[:, c], -np.inf)
        labels[int(np.argmax(score))] = c
    return labels


def _claim_farthest(labels, d2, k):
    """Repair empty clusters by moving in the point farthest from its center."""
    n = labels.shape[0]
    for c in range(k):
        counts = np.bincount(labels, minlength=k)
        if counts[c]:
            continue
        own = np.where(counts[labels] > 1, d2[np.arange(n), labels], -np.inf)
        labels[int(np.argmax(own))] = c
    return labels


def kmeans(x, k, seed=0, max_iter=300, tol=1e-6, init=None):
    """Lloyd's algorithm; returns ``(labels, centers)`` with no empty cluster."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    _check_k(k, n)
    rng = np.random.default_rng(seed)
    centers = kmeanspp_centers(x, k, rng) if init is None else np.array(init, dtype=float)
    for _ in range(max_iter):
        d2 = _sq_dists(x, centers)
        labels = _claim_farthest(np.argmin(d2, axis=1), d2, k)
        new = np.vstack([x[labels == c].mean(axis=0) for c in range(k)])
        shift = np.max(np.linalg.norm(new - centers, axis=1))
        centers = new
        if shift < tol:
            break
    d2 = _sq_dists(x, centers)
    labels = _claim_farthest(np.argmin(d2, axis=1), d2, k)
    return labels, centers


def run_kmeans(z, k_t: int, seed: int = 0, max_iter: int = 300, tol: float = 1e-6) -> Partition:
    x = _values(z)
    labels, _ = kmeans(x, k_t, seed, max_iter, tol)
    return validate_partition(labels, x.shape[0])


def fuzzy_cmeans(x, k, seed=0, fuzzifier=2.0, tol=1e-5, max_iter=200):
    """Fuzzy c-means; returns the ``(n, k)`` membership matrix."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    _check_k(k, n)
    rng = np.random.default_rng(seed)
    u = rng.dirichlet(np.ones(k), size=n)
    expo = 2.0 / (fuzzifier - 1.0)
    for _ in range(max_iter):
        um = u**fuzzifier
        centers = um.T @ x / um.sum(axis=0)[:, None]
        d = np.sqrt(_sq_dists(x, centers))
        zero = d < 1e-12
        with np.errstate(divide="ignore"):
            inv = np.where(zero, 0.0, d ** (-expo))
        new = inv / inv.sum(axis=1, keepdims=True)
        # a point sitting on a center belongs to it outright
        hit = zero.any(axis=1)
        if hit.any():
            new[hit] = zero[hit] / zero[hit].sum(axis=1, keepdims=True)
        change = np.max(np.abs(new - u))
        u = new
        if change < tol:
            break
    return u


def run_fuzzy_cmeans(z, k_t: int, seed: int = 0, fuzzifier: float = 2.0,
                     tol: float = 1e-5, max_iter: int = 200) -> Partition:
    x = _values(z)
    u = fuzzy_cmeans(x, k_t, seed, fuzzifier, tol, max_iter)
    labels = _fill_empty(np.argmax(u, axis=1), k_t, u)
    return validate_partition(labels, x.shape[0])


def gmm_em(x, k, seed=0, max_iter=100, tol=1e-6, var_floor=1e-6):
    """EM for a diagonal-covariance Gaussian mixture.

    Returns ``(responsibilities, loglik_history)``; the history holds the
    mean per-instance log-likelihood before each M-step.
    """
    x = np.asarray(x, dtype=float)
    n, m = x.shape
    _check_k(k, n)
    rng = np.random.default_rng(seed)
    means = kmeanspp_centers(x, k, rng)
    var = np.tile(np.maximum(x.var(axis=0), var_floor), (k, 1))
    weights = np.full(k, 1.0 / k)
    history: List[float] = []
    resp = np.full((n, k), 1.0 / k)
    for _ in range(max_iter):
        log_p = (
            -0.5 * (((x[:, None, :] - means[None]) ** 2) / var[None]).sum(axis=2)
            - 0.5 * np.log(2 * np.pi * var).sum(axis=1)[None]
            + np.log(weights)[None]
        )
        top = log_p.max(axis=1, keepdims=True)
        norm = top[:, 0] + np.log(np.exp(log_p - top).sum(axis=1))
        resp = np.exp(log_p - norm[:, None])
        ll = float(norm.mean())
        converged = bool(history) and abs(ll - history[-1]) < tol
        history.append(ll)
        if converged:
            break
        nk = resp.sum(axis=0)
        for _ in range(k):
            dead = np.flatnonzero(nk < 1e-10)
            if not dead.size:
                break
            # re-seed a collapsed component on an instance its owner can spare
            owner = np.argmax(resp, axis=1)
            spare = np.flatnonzero(np.bincount(owner, minlength=k)[owner] > 1)
            i = int(rng.choice(spare))
            resp[i] = 0.0
            resp[i, dead[0]] = 1.0
            nk = resp.sum(axis=0)
        weights = nk / n
        means = resp.T @ x / nk[:, None]
        var = resp.T @ (x**2) / nk[:, None] - means**2
        var = np.maximum(var, var_floor)
    return resp, history


def run_gmm(z, k_t: int, seed: int = 0, max_iter: int = 100, tol: float = 1e-6,
            var_floor: float = 1e-6) -> Partition:
    x = _values(z)
    resp, _ = gmm_em(x, k_t, seed, max_iter, tol, var_floor)
    labels = _fill_empty(np.argmax(resp, axis=1), k_t, resp)
    return validate_partition(labels, x.shape[0])


def run_subtractive(z, k_t: int, seed: Optional[int] = None, radius: float = 0.5,
                    squash: float = 1.5) -> Partition:
    """Subtractive clustering with a fixed number of centers.

    ``seed`` is accepted for a uniform signature and ignored.
    """
    x = _values(z)
    n = x.shape[0]
    _check_k(k_t, n)
    lo, span = x.min(axis=0), np.ptp(x, axis=0)
    unit = np.divide(x - lo, span, out=np.zeros_like(x), where=span > 0)
    distinct = np.unique(unit, axis=0).shape[0]
    if distinct < k_t:
        raise WoceError(f"only {distinct} distinct points for {k_t} centers")
    alpha = 4.0 / radius**2
    beta = 4.0 / (squash * radius) ** 2
    d2 = _sq_dists(unit, unit)
    potential = np.exp(-alpha * d2).sum(axis=1)
    taken = np.zeros(n, dtype=bool)
    centers = []
    for _ in range(k_t):
        c = int(np.argmax(np.where(taken, -np.inf, potential)))
        centers.append(c)
        potential = potential - potential[c] * np.exp(-beta * d2[c])
        taken |= d2[c] == 0.0
    labels = np.argmin(d2[:, centers], axis=1)
    return validate_partition(labels, n)


def pairwise_distances(x, metric: str = "euclidean") -> np.ndarray:
    """Dense distance matrix for the agglomerative generators.

    ``hamming`` binarizes each z-scored feature by sign first; ``cosine``
    gives all-zero vectors distance 1 to everything.
    """
    x = np.asarray(x, dtype=float)
    if metric == "euclidean":
        return squareform(pdist(x, "euclidean"))
    if metric == "hamming":
        mu, sd = x.mean(axis=0), x.std(axis=0)
        zs = np.divide(x - mu, sd, out=np.zeros_like(x), where=sd > 0)
        bits = (zs >= 0).astype(float)
        return squareform(pdist(bits, "hamming"))
    if metric == "cosine":
        norms = np.linalg.norm(x, axis=1)
        zero = norms == 0
        unit = np.divide(x, norms[:, None], out=np.zeros_like(x), where=~zero[:, None])
        d = 1.0 - np.clip(unit @ unit.T, -1.0, 1.0)
        d[zero, :] = 1.0
        d[:, zero] = 1.0
        np.fill_diagonal(d, 0.0)
        return d
    raise WoceError(f"unknown metric {metric!r}")


def run_agglomerative(z, k_t: int, linkage: str = "average", metric: str = "euclidean") -> Partition:
    x = _values(z)
    _check_k(k_t, x.shape[0])
    dend = lance_williams(pairwise_distances(x, metric), linkage, stop_at=k_t)
    return cut_dendrogram(dend, k_t)


def _merge_components(comp: np.ndarray, k: int) -> np.ndarray:
    # keep the k-1 largest components, pool the rest into one cluster
    sizes = np.bincount(comp)
    order = np.argsort(-sizes, kind="stable")
    remap = np.full(sizes.size, k - 1)
    remap[order[: k - 1]] = np.arange(k - 1)
    return remap[comp]


def run_spectral_sparse(z, k_t: int, seed: int = 0, n_neighbors: int = 15) -> Partition:
    """Normalized spectral clustering on a symmetric k-NN Gaussian graph.

    When the graph splits into at least ``k_t`` components the components
    are the clusters; surplus small components are pooled so that exactly
    ``k_t`` clusters come back.
    """
    x = _values(z)
    n = x.shape[0]
    _check_k(k_t, n)
    if k_t == n:
        return validate_partition(np.arange(n), n)
    knn = min(n_neighbors, n - 1)
    d = squareform(pdist(x, "euclidean"))
    np.fill_diagonal(d, np.inf)
    nbrs = np.argsort(d, axis=1, kind="stable")[:, :knn]
    rows = np.repeat(np.arange(n), knn)
    kd = d[rows, nbrs.ravel()]
    sigma = float(np.median(kd))
    if sigma <= 0:
        sigma = float(kd[kd > 0].mean()) if np.any(kd > 0) else 1.0
    w = np.zeros((n, n))
    w[rows, nbrs.ravel()] = np.exp(-(kd**2) / (2 * sigma**2))
    w = np.maximum(w, w.T)
    n_comp, comp = connected_components(w > 0, directed=False)
    if n_comp >= k_t:
        return validate_partition(_merge_components(comp, k_t), n)
    deg = w.sum(axis=1)
    inv_sqrt = 1.0 / np.sqrt(np.maximum(deg, np.finfo(float).tiny))
    lap = np.eye(n) - inv_sqrt[:, None] * w * inv_sqrt[None, :]
    _, vecs = np.linalg.eigh((lap + lap.T) / 2)
    emb = vecs[:, :k_t]
    norms = np.linalg.norm(emb, axis=1, keepdims=True)
    emb = np.divide(emb, norms, out=np.zeros_like(emb), where=norms > 0)
    labels, _ = kmeans(emb, k_t, seed)
    return validate_partition(labels, n)


def run_spec(z, spec: GeneratorSpec) -> Partition:
    kind = spec.kind
    if kind == "kmeans":
        return run_kmeans(z, spec.k_t, spec.seed)
    if kind == "fuzzy_cmeans":
        return run_fuzzy_cmeans(z, spec.k_t, spec.seed)
    if kind == "gmm":
        return run_gmm(z, spec.k_t, spec.seed)
    if kind == "subtractive":
        return run_subtractive(z, spec.k_t)
    if kind == "spectral_sparse":
        return run_spectral_sparse(z, spec.k_t, spec.seed)
    linkage, metric = kind.split("_")
    return run_agglomerative(z, spec.k_t, linkage, metric)


def generate_reference_set(z, sched: EnsembleSchedule) -> ReferenceSet:
    """Run every scheduled generator; a failing one is replaced by k-means."""
    x = _values(z)
    parts = []
    names = []
    for t, spec in enumerate(sched.specs):
        try:
            p = run_spec(x, spec)
            name = spec.kind
        except (WoceError, ValueError, np.linalg.LinAlgError) as exc:
            logger.warning("generator %d (%s, k=%d) failed: %s; substituting k-means",
                           t, spec.kind, spec.k_t, exc)
            p = run_kmeans(x, min(spec.k_t, x.shape[0]), spec.seed)
            name = "kmeans_fallback"
        parts.append(p)
        names.append(name)
    return ReferenceSet(tuple(parts), names=tuple(names))
