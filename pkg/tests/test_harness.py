import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from woce.core import DataMatrix, InfeasibleConstraintsError, WoceError
from woce.harness.benchmark import ExperimentConfig, load_config, parse_config, run_benchmark
from woce.harness.datasets import (
    CsvFormatError,
    LabeledDataset,
    gen_halfring,
    load_constraints,
    load_csv,
    sample_constraints,
    save_constraints,
    save_dataset,
    zscore_normalize,
)
from woce.harness.metrics import accuracy_hungarian, contingency, nmi


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


# --- load_csv ---------------------------------------------------------------------

def test_load_csv_label_last(tmp_path):
    ds = load_csv(write(tmp_path, "1,2,a\n3,4,b\n"), "last")
    assert ds.data.values.tolist() == [[1, 2], [3, 4]]
    assert ds.labels.tolist() == [0, 1]
    assert ds.class_names == ("a", "b")


def test_load_csv_header_and_index(tmp_path):
    ds = load_csv(write(tmp_path, "cls,x,y\nb,1,2\na,3,4\nb,5,6\n"), 0)
    assert ds.data.feature_names == ("x", "y")
    assert ds.labels.tolist() == [0, 1, 0]
    assert ds.data.n == 3


def test_load_csv_no_labels(tmp_path):
    ds = load_csv(write(tmp_path, "1,2\n3,4\n5,6\n"))
    assert ds.labels is None and ds.data.m == 2


@pytest.mark.parametrize("text,needle", [
    ("1,2\n3\n", "line 2"),
    ("1,2\n3,x\n", "line 2"),
    ("", "empty"),
    ("a,b\n", "no data"),
])
def test_load_csv_errors(tmp_path, text, needle):
    with pytest.raises(CsvFormatError, match=needle):
        load_csv(write(tmp_path, text))


def test_load_csv_bad_label_col(tmp_path):
    with pytest.raises(CsvFormatError):
        load_csv(write(tmp_path, "1,2\n3,4\n"), 5)


def test_bundled_datasets(data_dir):
    iris = load_csv(data_dir / "iris.csv", "last")
    wine = load_csv(data_dir / "wine.csv", "last")
    assert iris.data.values.shape == (150, 4)
    assert np.bincount(iris.labels).tolist() == [50, 50, 50]
    assert wine.data.values.shape == (178, 13)
    assert sorted(np.bincount(wine.labels).tolist()) == [48, 59, 71]


# --- zscore ---------------------------------------------------------------------------

def test_zscore_examples():
    ds = LabeledDataset(DataMatrix(np.array([[1.0, 7.0], [2.0, 7.0], [3.0, 7.0]])))
    z = zscore_normalize(ds).data.values
    assert np.allclose(z[:, 0], [-1.2247, 0, 1.2247], atol=5e-5)
    assert np.allclose(z[:, 0], np.array([-1, 0, 1]) / np.sqrt(2 / 3))
    assert z[:, 1].tolist() == [0, 0, 0]
    again = zscore_normalize(zscore_normalize(ds)).data.values
    assert np.max(np.abs(again - z)) < 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 30), st.integers(1, 5), st.integers(0, 10_000))
def test_zscore_moments(n, m, seed):
    r = np.random.default_rng(seed)
    x = r.normal(r.uniform(-50, 50), r.uniform(0.1, 20), size=(n, m))
    z = zscore_normalize(LabeledDataset(DataMatrix(x))).data.values
    assert np.all(np.abs(z.mean(axis=0)) < 1e-10)
    sd = x.std(axis=0)
    live = sd > 1e-8 * np.abs(x).max()
    assert np.all(np.abs(z.var(axis=0)[live] - 1) < 1e-10)


# --- constraints -------------------------------------------------------------------

def labelled(labels):
    labels = np.asarray(labels)
    return LabeledDataset(DataMatrix(np.arange(labels.size, dtype=float)[:, None] * [1.0, 2.0]), labels)


def test_sample_constraints_example():
    ds = labelled(np.repeat([0, 1], 50))
    cs = sample_constraints(ds, 4, seed=0)
    assert cs.n_must == 1 and cs.n_cannot == 1


def test_sample_constraints_zero_and_errors():
    ds = labelled(np.repeat([0, 1], 50))
    assert sample_constraints(ds, 0).is_empty()
    with pytest.raises(InfeasibleConstraintsError):
        sample_constraints(labelled(np.zeros(100, dtype=int)), 4)
    with pytest.raises(InfeasibleConstraintsError):
        sample_constraints(ds, 2)  # 2 instances
    with pytest.raises(WoceError):
        sample_constraints(LabeledDataset(ds.data), 4)


@settings(max_examples=60, deadline=None)
@given(st.integers(20, 150), st.integers(2, 4), st.floats(3, 10), st.integers(0, 10_000))
def test_sample_constraints_properties(n, classes, pct, seed):
    labels = np.random.default_rng(seed).integers(0, classes, size=n)
    if np.unique(labels).size < 2:
        return
    ds = labelled(labels)
    try:
        cs = sample_constraints(ds, pct, seed)
    except InfeasibleConstraintsError:
        return
    used = [i for pair in cs.must + cs.cannot for i in pair]
    assert len(used) == len(set(used))
    assert cs.n_must == cs.n_cannot
    assert len(used) == 4 * cs.n_must
    assert all(labels[i] == labels[j] for i, j in cs.must)
    assert all(labels[i] != labels[j] for i, j in cs.cannot)
    assert sample_constraints(ds, pct, seed) == cs


def test_constraint_file_round_trip(tmp_path):
    ds = labelled(np.repeat([0, 1, 2], 30))
    cs = sample_constraints(ds, 10, seed=3)
    save_constraints(cs, tmp_path / "c.csv")
    assert load_constraints(tmp_path / "c.csv") == cs
    bad = write(tmp_path, "0,1,maybe\n", "bad.csv")
    with pytest.raises(CsvFormatError):
        load_constraints(bad)


# --- metrics -----------------------------------------------------------------------

def brute_accuracy(pred, truth):
    pred, truth = np.asarray(pred), np.asarray(truth)
    kp, kt = pred.max() + 1, truth.max() + 1
    size = max(kp, kt)
    best = 0
    for perm in itertools.permutations(range(size)):
        mapped = np.array([perm[p] for p in pred])
        best = max(best, int(np.sum(mapped == truth)))
    return best / pred.size


def test_accuracy_examples():
    assert accuracy_hungarian([1, 1, 0, 0], [0, 0, 1, 1]) == 1.0
    assert accuracy_hungarian([0, 1, 0, 1], [0, 0, 1, 1]) == 0.5
    assert accuracy_hungarian([0, 0, 0, 0], [0, 0, 1, 1]) == 0.5


def test_accuracy_matches_brute_force():
    r = np.random.default_rng(17)
    for _ in range(200):
        n = int(r.integers(2, 15))
        pred = r.integers(0, int(r.integers(1, 5)), size=n)
        truth = r.integers(0, int(r.integers(1, 5)), size=n)
        pred = np.unique(pred, return_inverse=True)[1]
        truth = np.unique(truth, return_inverse=True)[1]
        assert accuracy_hungarian(pred, truth) == pytest.approx(brute_accuracy(pred, truth))


def test_metric_length_mismatch():
    with pytest.raises(WoceError):
        accuracy_hungarian([0, 1], [0, 1, 1])
    with pytest.raises(WoceError):
        nmi([0, 1], [0, 1, 1])


def test_nmi_examples():
    assert nmi([0, 0, 1, 1], [0, 0, 1, 1]) == pytest.approx(1.0)
    assert nmi([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(0.0, abs=1e-12)
    assert nmi([0, 0, 1, 2], [5, 5, 3, 4]) == pytest.approx(1.0)
    assert nmi([0, 0, 0], [0, 0, 0]) == 1.0
    assert contingency([0, 0, 1], [0, 1, 1]).tolist() == [[1, 1], [0, 1]]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), min_size=2, max_size=20))
def test_nmi_range_and_symmetry(pairs):
    a = [p[0] for p in pairs]
    b = [p[1] for p in pairs]
    v = nmi(a, b)
    assert 0 <= v <= 1
    assert v == pytest.approx(nmi(b, a))
    assert v == pytest.approx(nmi([3 - x for x in a], b))


# --- synthetic data -----------------------------------------------------------------

def test_halfring_shape_and_determinism():
    ds = gen_halfring(400, 0.1, seed=0)
    assert ds.data.values.shape == (400, 2)
    assert np.bincount(ds.labels).tolist() == [200, 200]
    assert np.array_equal(gen_halfring(400, 0.1, 0).data.values, ds.data.values)
    assert not np.array_equal(gen_halfring(400, 0.1, 1).data.values, ds.data.values)


def test_halfring_noiseless_on_arcs():
    ds = gen_halfring(100, 0.0, seed=0)
    v, y = ds.data.values, ds.labels
    top = np.hypot(v[y == 0, 0], v[y == 0, 1])
    bottom = np.hypot(v[y == 1, 0] - 1.0, v[y == 1, 1] - 0.5)
    assert np.allclose(top, 1.0) and np.allclose(bottom, 1.0)
    assert np.all(v[y == 0, 1] >= -1e-12) and np.all(v[y == 1, 1] <= 0.5 + 1e-12)


def test_halfring_errors():
    for n in (2, 401):
        with pytest.raises(WoceError):
            gen_halfring(n)


def test_save_dataset_round_trip(tmp_path):
    ds = gen_halfring(20, 0.1, 2)
    save_dataset(ds, tmp_path / "h.csv")
    back = load_csv(tmp_path / "h.csv", "last")
    assert np.array_equal(back.data.values, ds.data.values)
    assert np.array_equal(back.labels, ds.labels)


# --- benchmark -----------------------------------------------------------------------

def test_parse_config(tmp_path):
    cfg = parse_config(
        "# iris run\ndataset = iris.csv\nk = 3\nensemble_size = 12  # slots\n"
        "runs=2\nmethods = woce\nnormalize = no\n",
        base_dir=tmp_path,
    )
    assert cfg.dataset == str(tmp_path / "iris.csv")
    assert (cfg.k, cfg.T, cfg.runs, cfg.methods, cfg.normalize) == (3, 12, 2, ("woce",), False)
    assert parse_config("dataset = synth:halfring\nk = 2").dataset == "synth:halfring"


@pytest.mark.parametrize("text", [
    "k = 3", "dataset = a.csv\nk = 3\nbogus = 1", "dataset = a.csv\nk = three",
    "dataset = a.csv\nk = 3\njunk line", "dataset = a.csv\nk = 3\nruns = 0",
    "dataset = a.csv\nk = 3\nmethods = kmeans", "dataset = a.csv\nk = 3\npercent = -1",
])
def test_parse_config_errors(text):
    with pytest.raises(WoceError):
        parse_config(text)


def test_benchmark_shape_and_determinism(data_dir):
    cfg = ExperimentConfig(str(data_dir / "iris.csv"), k=3, T=8, runs=2)
    rep = run_benchmark(cfg)
    assert [r.method for r in rep.rows] == ["woce", "eac"]
    for r in rep.rows:
        assert len(r.accuracies) == 2 and r.std_accuracy >= 0
        assert all(0 <= a <= 1 for a in r.accuracies)
        assert r.wall_time > 0 and not r.failures
    again = run_benchmark(cfg)
    assert [r.accuracies for r in again.rows] == [r.accuracies for r in rep.rows]
    assert [r.nmis for r in again.rows] == [r.nmis for r in rep.rows]
    assert "acc_mean" in rep.format_table()


def test_benchmark_single_run_std_zero():
    cfg = ExperimentConfig("synth:halfring", k=2, T=5, runs=1, halfring_n=60, methods=("woce",))
    rep = run_benchmark(cfg)
    assert rep.row("woce").std_accuracy == 0.0


def test_benchmark_records_failures():
    ds = labelled(np.zeros(40, dtype=int))
    cfg = ExperimentConfig("unused", k=2, T=3, runs=2, percent=10)
    rep = run_benchmark(cfg, ds)
    assert all(len(r.failures) == 2 and not r.accuracies for r in rep.rows)


def test_load_config_and_csv_report(tmp_path, data_dir):
    (tmp_path / "exp.cfg").write_text(f"dataset = {data_dir / 'iris.csv'}\nk = 3\nT = 4\nruns = 1\n")
    cfg = load_config(tmp_path / "exp.cfg")
    rep = run_benchmark(cfg)
    rep.to_csv(tmp_path / "out.csv")
    lines = (tmp_path / "out.csv").read_text().splitlines()
    assert lines[0].startswith("dataset,method,runs,acc_mean")
    assert len(lines) == 3
