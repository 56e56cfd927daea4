"""Repeated-run evaluation of the consensus methods on one labelled dataset."""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..consensus import run_eac, run_woce
from ..core import ConstraintSet, WoceError
from ..diversity import UNIFORMITY_MODES, WEIGHT_MODES
from .datasets import LabeledDataset, gen_halfring, load_csv, sample_constraints, zscore_normalize
from .metrics import accuracy_hungarian, nmi

logger = logging.getLogger(__name__)

METHODS = ("woce", "eac")


@dataclass
class ExperimentConfig:
    dataset: str
    k: int
    T: int = 20
    d: int = 0
    percent: float = 0.0
    runs: int = 10
    seed: int = 0
    weight_mode: str = "minmax"
    uniformity_mode: str = "batch"
    methods: Tuple[str, ...] = METHODS
    label_col: str = "last"
    normalize: bool = True
    name: Optional[str] = None
    report: Optional[str] = None
    # only read when dataset = "synth:halfring"
    halfring_n: int = 400
    halfring_noise: float = 0.1

    def __post_init__(self):
        if self.runs < 1:
            raise WoceError(f"runs must be >= 1, got {self.runs}")
        if self.percent < 0:
            raise WoceError(f"percent must be >= 0, got {self.percent}")
        if self.k < 2:
            raise WoceError(f"k must be >= 2, got {self.k}")
        if self.weight_mode not in WEIGHT_MODES:
            raise WoceError(f"unknown weight mode {self.weight_mode!r}")
        if self.uniformity_mode not in UNIFORMITY_MODES:
            raise WoceError(f"unknown uniformity mode {self.uniformity_mode!r}")
        self.methods = tuple(self.methods)
        bad = set(self.methods) - set(METHODS)
        if bad or not self.methods:
            raise WoceError(f"methods must be a non-empty subset of {METHODS}, got {self.methods}")


def _coerce(kind, text: str):
    if kind is bool:
        return text.strip().lower() in ("1", "true", "yes", "on")
    if kind is int:
        return int(text)
    if kind is float:
        return float(text)
    if kind == "tuple":
        return tuple(s.strip() for s in text.split(",") if s.strip())
    return text.strip()


_FIELD_KINDS = {
    "dataset": str, "k": int, "T": int, "d": int, "percent": float, "runs": int,
    "seed": int, "weight_mode": str, "uniformity_mode": str, "methods": "tuple",
    "label_col": str, "normalize": bool, "name": str, "report": str,
    "halfring_n": int, "halfring_noise": float,
}
_ALIASES = {"ensemble_size": "T", "data": "dataset"}


def parse_config(text: str, base_dir: Optional[Path] = None) -> ExperimentConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    Relative dataset and report paths resolve against ``base_dir``.
    """
    values: Dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise WoceError(f"config line {lineno}: expected key=value, got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key not in _FIELD_KINDS:
            raise WoceError(f"config line {lineno}: unknown key {key!r}")
        try:
            values[key] = _coerce(_FIELD_KINDS[key], val)
        except ValueError:
            raise WoceError(f"config line {lineno}: bad value {val!r} for {key}") from None
    missing = [k for k in ("dataset", "k") if k not in values]
    if missing:
        raise WoceError(f"config is missing required keys: {', '.join(missing)}")
    if base_dir is not None:
        for key in ("dataset", "report"):
            v = values.get(key)
            if isinstance(v, str) and not v.startswith("synth:") and not Path(v).is_absolute():
                values[key] = str(Path(base_dir) / v)
    return ExperimentConfig(**values)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(), path.parent)


def load_dataset(cfg: ExperimentConfig) -> LabeledDataset:
    if cfg.dataset == "synth:halfring":
        ds = gen_halfring(cfg.halfring_n, cfg.halfring_noise, cfg.seed)
    elif cfg.dataset.startswith("synth:"):
        raise WoceError(f"unknown synthetic dataset {cfg.dataset!r}")
    else:
        ds = load_csv(cfg.dataset, cfg.label_col)
    if ds.labels is None:
        raise WoceError("benchmarking needs a label column")
    return zscore_normalize(ds) if cfg.normalize else ds


@dataclass
class MethodResult:
    dataset: str
    method: str
    accuracies: List[float] = field(default_factory=list)
    nmis: List[float] = field(default_factory=list)
    wall_time: float = 0.0
    failures: List[str] = field(default_factory=list)

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.accuracies)) if self.accuracies else float("nan")

    @property
    def std_accuracy(self) -> float:
        return float(np.std(self.accuracies)) if self.accuracies else float("nan")

    @property
    def mean_nmi(self) -> float:
        return float(np.mean(self.nmis)) if self.nmis else float("nan")


@dataclass
class BenchmarkReport:
    rows: List[MethodResult]

    def row(self, method: str) -> MethodResult:
        for r in self.rows:
            if r.method == method:
                return r
        raise KeyError(method)

    def format_table(self) -> str:
        head = f"{'dataset':<16}{'method':<8}{'runs':>5}{'acc_mean':>10}{'acc_std':>9}{'nmi_mean':>10}{'time_s':>9}{'failed':>8}"
        lines = [head, "-" * len(head)]
        for r in self.rows:
            lines.append(
                f"{r.dataset:<16}{r.method:<8}{len(r.accuracies):>5}{r.mean_accuracy:>10.4f}"
                f"{r.std_accuracy:>9.4f}{r.mean_nmi:>10.4f}{r.wall_time:>9.2f}{len(r.failures):>8}"
            )
        return "\n".join(lines)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["dataset", "method", "runs", "acc_mean", "acc_std", "nmi_mean",
                        "wall_time_s", "failures"])
            for r in self.rows:
                w.writerow([r.dataset, r.method, len(r.accuracies), repr(r.mean_accuracy),
                            repr(r.std_accuracy), repr(r.mean_nmi), f"{r.wall_time:.3f}",
                            len(r.failures)])


def run_benchmark(cfg: ExperimentConfig, ds: Optional[LabeledDataset] = None) -> BenchmarkReport:
    """Run every method ``cfg.runs`` times with seeds ``seed + r``.

    Constraints are drawn afresh per run and shared by all methods in that run.
    """
    if ds is None:
        ds = load_dataset(cfg)
    name = cfg.name or ds.name
    results = {m: MethodResult(name, m) for m in cfg.methods}
    for r in range(cfg.runs):
        run_seed = cfg.seed + r
        try:
            cs = sample_constraints(ds, cfg.percent, run_seed) if cfg.percent > 0 else ConstraintSet()
        except WoceError as exc:
            for res in results.values():
                res.failures.append(f"run {r}: {exc}")
            logger.warning("run %d: constraint sampling failed: %s", r, exc)
            continue
        for method in cfg.methods:
            res = results[method]
            start = time.perf_counter()
            try:
                if method == "woce":
                    out = run_woce(ds.data, cs, cfg.k, cfg.d, cfg.T, run_seed,
                                   cfg.weight_mode, cfg.uniformity_mode)
                else:
                    out = run_eac(ds.data, cfg.k, cfg.T, run_seed)
            except (WoceError, ArithmeticError, np.linalg.LinAlgError) as exc:
                res.failures.append(f"run {r}: {exc}")
                logger.warning("run %d, %s failed: %s", r, method, exc)
                continue
            finally:
                res.wall_time += time.perf_counter() - start
            res.accuracies.append(accuracy_hungarian(out.partition, ds.labels))
            res.nmis.append(nmi(out.partition, ds.labels))
    return BenchmarkReport([results[m] for m in cfg.methods])

