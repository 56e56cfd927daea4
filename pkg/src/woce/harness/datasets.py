"""CSV ingestion, normalization, constraint sampling and synthetic data."""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ..core import (
    ConstraintSet,
    DataMatrix,
    InfeasibleConstraintsError,
    WoceError,
)


class CsvFormatError(WoceError):
    pass


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    data: DataMatrix
    labels: Optional[np.ndarray] = None
    name: str = ""
    class_names: Optional[tuple] = None

    def __post_init__(self):
        if self.labels is not None:
            lab = np.asarray(self.labels, dtype=np.int64)
            if lab.shape != (self.data.n,):
                raise WoceError(f"{lab.shape[0]} labels for {self.data.n} instances")
            object.__setattr__(self, "labels", lab)


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def encode_labels(raw):
    """Map arbitrary label tokens to integers by first appearance."""
    mapping = {}
    codes = [mapping.setdefault(tok, len(mapping)) for tok in raw]
    return np.asarray(codes, dtype=np.int64), tuple(mapping)


def load_csv(path: Union[str, Path], label_col: Union[str, int, None] = "none",
             name: Optional[str] = None) -> LabeledDataset:
    """Read a numeric CSV, optionally peeling off one label column.

    ``label_col`` is ``"none"``, ``"last"`` or a zero-based column index.
    A first row whose feature cells are not all numeric is taken as a header.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        rows = [(lineno, [c.strip() for c in row])
                for lineno, row in enumerate(csv.reader(fh), start=1)
                if row and any(c.strip() for c in row)]
    if not rows:
        raise CsvFormatError(f"{path}: empty file")
    width = len(rows[0][1])
    for lineno, row in rows:
        if len(row) != width:
            raise CsvFormatError(f"{path}: line {lineno} has {len(row)} fields, expected {width}")

    if label_col in (None, "none"):
        lcol = None
    elif label_col == "last":
        lcol = width - 1
    else:
        lcol = int(label_col)
        if lcol < 0:
            lcol += width
        if not 0 <= lcol < width:
            raise CsvFormatError(f"{path}: label column {label_col} out of range for {width} columns")
    feat_cols = [c for c in range(width) if c != lcol]
    if not feat_cols:
        raise CsvFormatError(f"{path}: no feature columns")

    header = None
    if not all(_is_number(rows[0][1][c]) for c in feat_cols):
        header = rows[0][1]
        rows = rows[1:]
    if not rows:
        raise CsvFormatError(f"{path}: header but no data rows")

    values = np.empty((len(rows), len(feat_cols)))
    for r, (lineno, row) in enumerate(rows):
        for j, c in enumerate(feat_cols):
            try:
                values[r, j] = float(row[c])
            except ValueError:
                raise CsvFormatError(
                    f"{path}: line {lineno}, column {c + 1}: non-numeric value {row[c]!r}"
                ) from None
    labels = class_names = None
    if lcol is not None:
        labels, class_names = encode_labels([row[lcol] for _, row in rows])
    names = tuple(header[c] for c in feat_cols) if header else None
    return LabeledDataset(DataMatrix(values, names), labels, name or path.stem, class_names)


def zscore_normalize(ds: LabeledDataset) -> LabeledDataset:
    """Per-feature standardization with the population (1/n) deviation.

    Constant features become all zeros.
    """
    v = ds.data.values
    mu = v.mean(axis=0)
    sd = v.std(axis=0)
    out = np.divide(v - mu, sd, out=np.zeros_like(v), where=sd > 0)
    return LabeledDataset(DataMatrix(out, ds.data.feature_names), ds.labels, ds.name, ds.class_names)


def _pair_sample(labels: np.ndarray, idx: np.ndarray, n_must: int, n_cannot: int):
    """Pair the sampled instances into exactly ``n_must`` + ``n_cannot`` pairs.

    Returns ``None`` when this sample cannot meet the quota.
    """
    pools = defaultdict(list)
    for i in idx:
        pools[int(labels[i])].append(int(i))
    must = []
    for _ in range(n_must):
        # drawing from the biggest class keeps the leftovers pairable across classes
        cls = max((c for c in pools if len(pools[c]) >= 2), key=lambda c: len(pools[c]), default=None)
        if cls is None:
            return None
        must.append((pools[cls].pop(0), pools[cls].pop(0)))
    left = sum(len(v) for v in pools.values())
    if left != 2 * n_cannot or any(len(v) > n_cannot for v in pools.values()):
        return None
    cannot = []
    for _ in range(n_cannot):
        first, second = sorted((c for c in pools if pools[c]), key=lambda c: -len(pools[c]))[:2]
        cannot.append((pools[first].pop(0), pools[second].pop(0)))
    return must, cannot


def sample_constraints(ds: LabeledDataset, percent: float, seed: int = 0,
                       max_attempts: int = 100) -> ConstraintSet:
    """Draw ``percent`` % of the labelled instances and pair each one exactly once.

    The instance count is rounded down to a multiple of four so that must-link
    and cannot-link pairs split evenly.
    """
    if ds.labels is None:
        raise WoceError("constraint sampling needs ground-truth labels")
    if percent < 0:
        raise WoceError(f"percent must be >= 0, got {percent}")
    if percent == 0:
        return ConstraintSet()
    n = ds.data.n
    count = int(round(percent * n / 100.0))
    count -= count % 4
    if count < 4:
        raise InfeasibleConstraintsError(
            f"{percent}% of {n} instances gives fewer than 4 instances to pair"
        )
    if np.unique(ds.labels).size < 2:
        raise InfeasibleConstraintsError("single-class labels cannot yield cannot-link pairs")
    half = count // 4
    rng = np.random.default_rng(seed)
    for _ in range(max_attempts):
        idx = rng.choice(n, size=count, replace=False)
        paired = _pair_sample(ds.labels, idx, half, half)
        if paired is not None:
            return ConstraintSet(*paired)
    raise InfeasibleConstraintsError(
        f"could not meet a {half}/{half} must/cannot quota in {max_attempts} draws"
    )


def load_constraints(path: Union[str, Path]) -> ConstraintSet:
    """Read header-less ``i,j,must|cannot`` rows."""
    must, cannot = [], []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or not any(c.strip() for c in row):
                continue
            if len(row) != 3:
                raise CsvFormatError(f"{path}: line {lineno} needs 3 fields, got {len(row)}")
            i, j, kind = (c.strip() for c in row)
            try:
                pair = (int(i), int(j))
            except ValueError:
                raise CsvFormatError(f"{path}: line {lineno}: bad index") from None
            if kind == "must":
                must.append(pair)
            elif kind == "cannot":
                cannot.append(pair)
            else:
                raise CsvFormatError(f"{path}: line {lineno}: unknown constraint type {kind!r}")
    return ConstraintSet(must, cannot)


def save_constraints(cs: ConstraintSet, path: Union[str, Path]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for i, j in cs.must:
            w.writerow([i, j, "must"])
        for i, j in cs.cannot:
            w.writerow([i, j, "cannot"])


def gen_halfring(n: int = 400, noise: float = 0.1, seed: int = 0) -> LabeledDataset:
    """Two interleaved unit half-circles with Gaussian noise on the radius."""
    if n < 4:
        raise WoceError(f"need n >= 4, got {n}")
    if n % 2:
        raise WoceError(f"n must be even, got {n}")
    half = n // 2
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, np.pi, half)
    r_top = 1.0 + noise * rng.standard_normal(half)
    r_bot = 1.0 + noise * rng.standard_normal(half)
    top = np.column_stack([r_top * np.cos(t), r_top * np.sin(t)])
    bottom = np.column_stack([1.0 - r_bot * np.cos(t), 0.5 - r_bot * np.sin(t)])
    values = np.vstack([top, bottom])
    labels = np.repeat([0, 1], half)
    return LabeledDataset(DataMatrix(values, ("x0", "x1")), labels, "halfring")


def save_dataset(ds: LabeledDataset, path: Union[str, Path]) -> None:
    names = list(ds.data.feature_names or (f"x{j}" for j in range(ds.data.m)))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + (["label"] if ds.labels is not None else []))
        for r, row in enumerate(ds.data.values):
            cells = [repr(float(v)) for v in row]
            if ds.labels is not None:
                cells.append(int(ds.labels[r]))
            w.writerow(cells)
