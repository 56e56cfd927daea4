"""Command-line entry point: ``woce <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from ..consensus import run_woce
from ..core import ConstraintSet, WoceError
from ..diversity import UNIFORMITY_MODES, WEIGHT_MODES
from .benchmark import load_config, run_benchmark
from .datasets import (
    encode_labels,
    gen_halfring,
    load_constraints,
    load_csv,
    sample_constraints,
    save_constraints,
    save_dataset,
    zscore_normalize,
)
from .metrics import accuracy_hungarian, nmi

logger = logging.getLogger("woce")


def _label_col(text: str):
    if text in ("none", "last"):
        return text
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected none, last or a column index, got {text!r}") from None


def _read_label_file(path):
    with open(path, newline="") as fh:
        tokens = [row[0].strip() for row in csv.reader(fh) if row and row[0].strip()]
    if not tokens:
        raise WoceError(f"{path}: no labels")
    return encode_labels(tokens)[0]


def cmd_cluster(args) -> int:
    ds = zscore_normalize(load_csv(args.data, args.label_col))
    cs = load_constraints(args.constraints) if args.constraints else ConstraintSet()
    cs.check_bounds(ds.data.n)
    res = run_woce(ds.data, cs, args.k, args.d, args.ensemble_size, args.seed,
                   args.weight_mode, args.uniformity_mode)
    np.savetxt(args.out, res.partition.labels, fmt="%d")
    if args.diagnostics:
        out = Path(args.diagnostics)
        out.mkdir(parents=True, exist_ok=True)
        res.coassociation.to_csv(out / "coassociation.csv")
        with open(out / "uniformity.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "generator", "clusters", "eta", "xi", "theta", "raw", "weight"])
            for t, (p, b, wt) in enumerate(zip(res.reference.partitions, res.breakdowns,
                                               res.weights.weights)):
                w.writerow([t, res.reference.names[t], p.k, repr(b.eta), repr(b.xi),
                            repr(b.theta), repr(b.raw), repr(float(wt))])
    return 0


def cmd_gen_constraints(args) -> int:
    ds = load_csv(args.data, args.label_col)
    save_constraints(sample_constraints(ds, args.percent, args.seed), args.out)
    return 0


def cmd_eval(args) -> int:
    pred = _read_label_file(args.pred)
    truth = _read_label_file(args.truth)
    print(f"accuracy={accuracy_hungarian(pred, truth):.6f} nmi={nmi(pred, truth):.6f}")
    return 0


def cmd_benchmark(args) -> int:
    cfg = load_config(args.config)
    report = run_benchmark(cfg)
    print(report.format_table())
    out = Path(cfg.report) if cfg.report else Path(args.config).with_suffix(".report.csv")
    report.to_csv(out)
    for row in report.rows:
        for msg in row.failures:
            print(f"FAILED {row.method}: {msg}", file=sys.stderr)
    return 0


def cmd_synth(args) -> int:
    if args.kind != "halfring":
        raise WoceError(f"unknown synthetic dataset {args.kind!r}")
    save_dataset(gen_halfring(args.n, args.noise, args.seed), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="woce", description="Weighted cluster-ensemble toolkit.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="cluster a CSV data file")
    p.add_argument("--data", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--constraints")
    p.add_argument("--d", type=int, default=0)
    p.add_argument("--ensemble-size", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--weight-mode", choices=WEIGHT_MODES, default="minmax")
    p.add_argument("--uniformity-mode", choices=UNIFORMITY_MODES, default="batch")
    p.add_argument("--label-col", type=_label_col, default="none")
    p.add_argument("--out", required=True)
    p.add_argument("--diagnostics")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("gen-constraints", help="sample must-link/cannot-link pairs from labels")
    p.add_argument("--data", required=True)
    p.add_argument("--label-col", type=_label_col, default="last")
    p.add_argument("--percent", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_constraints)

    p = sub.add_parser("eval", help="score predicted labels against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("benchmark", help="run a key=value experiment config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("kind", choices=["halfring"])
    p.add_argument("--n", type=int, default=400)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (WoceError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
