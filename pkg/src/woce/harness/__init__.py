"""Data ingestion, evaluation metrics, benchmarking and the command line."""

from .benchmark import BenchmarkReport, ExperimentConfig, load_config, parse_config, run_benchmark
from .datasets import (
    LabeledDataset,
    gen_halfring,
    load_constraints,
    load_csv,
    sample_constraints,
    save_constraints,
    zscore_normalize,
)
from .metrics import accuracy_hungarian, nmi
