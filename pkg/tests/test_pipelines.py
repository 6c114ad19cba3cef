"""Experiment pipelines: summarization, continual, streaming, features."""

import numpy as np
import pytest

from coreselect import ConfigError, DataError
from coreselect.data import Dataset, InnerConfig, Mask, SelectionConfig, derived_rng
from coreselect.learners import accuracy, fit
from coreselect.pipelines import (
    ExperimentSpec,
    ReplayMemory,
    load_train_test,
    run_continual,
    run_experiment,
    run_features,
    run_stream,
    run_summarization,
)
from coreselect.scenarios import NoiseSpec

from conftest import ridge_cfg


def sel(budget, **kw):
    kw.setdefault("outer_iters", 10)
    kw.setdefault("outer_step", 0.5)
    kw.setdefault("outer_batch", 8)
    kw.setdefault("inner", ridge_cfg())
    return SelectionConfig(budget=budget, **kw)


def blob_spec(task="summarize", n=15, c=2, d=2, sep=6.0, budget=8, **kw):
    return ExperimentSpec(
        task=task,
        source=f"synth:blobs:n={n},c={c},d={d},sep={sep}",
        selection=kw.pop("selection", sel(budget)),
        **kw,
    )


# ---------------------------------------------------------------- replay memory

def test_replay_memory_accounting():
    mem = ReplayMemory(10)
    a = Dataset(np.zeros((4, 2)), np.zeros(4, dtype=np.int64), 1)
    b = Dataset(np.zeros((6, 2)), np.zeros(6, dtype=np.int64), 1)
    mem.put("a", a)
    mem.put("b", b)
    assert mem.total() == 10
    assert len(mem.combined()) == 10


def test_replay_memory_rejects_overflow_and_keeps_old_bucket():
    mem = ReplayMemory(5)
    a = Dataset(np.zeros((3, 2)), np.zeros(3, dtype=np.int64), 1)
    mem.put("a", a)
    big = Dataset(np.zeros((6, 2)), np.zeros(6, dtype=np.int64), 1)
    with pytest.raises(ConfigError, match="capacity"):
        mem.put("a", big)
    assert mem.total() == 3  # failed replacement leaves the old bucket alone


def test_replay_memory_replacement_within_capacity():
    mem = ReplayMemory(5)
    mem.put("a", Dataset(np.zeros((5, 2)), np.zeros(5, dtype=np.int64), 1))
    mem.put("a", Dataset(np.zeros((2, 2)), np.zeros(2, dtype=np.int64), 1))
    assert mem.total() == 2


def test_replay_memory_bad_capacity():
    with pytest.raises(ConfigError):
        ReplayMemory(0)


# ---------------------------------------------------------------- summarize

def test_summarize_full_budget_matches_full_data_accuracy():
    spec = blob_spec(budget=30)  # budget == train size: coreset is everything
    report = run_summarization(spec)
    entry = report["entries"][0]
    assert entry["coreset_size"] == 30

    train, test, _ = load_train_test(spec, 0)
    full = fit(train, Mask.ones(30), spec.selection.inner, derived_rng(0, "full"))
    assert abs(entry["test_accuracy"] - accuracy(full, test)) <= 0.01


def test_summarize_identical_spec_identical_report():
    spec = blob_spec(budget=6, seeds=(3,))
    assert run_summarization(spec) == run_summarization(spec)


def test_summarize_report_bundle_on_disk(tmp_path):
    out = tmp_path / "report"
    spec = blob_spec(budget=6, out_dir=str(out))
    run_summarization(spec)
    names = {f.name for f in out.iterdir()}
    assert names == {"metrics.jsonl", "coreset.txt", "probabilities.txt", "mask.pgm"}
    assert len((out / "coreset.txt").read_text().splitlines()) == 6


def test_summarize_baselines_only():
    spec = blob_spec(
        budget=6,
        run_pge=False,
        baseline_methods=("uniform", "kcenter", "hardest", "herding"),
        selection=sel(6, inner=InnerConfig(kind="logistic", epochs=30, batch_size=8)),
    )
    report = run_summarization(spec)
    methods = [e["method"] for e in report["entries"]]
    assert methods == ["uniform", "kcenter", "hardest", "herding"]
    assert all(e["coreset_size"] == 6 for e in report["entries"])
    assert set(report["aggregate"]) == set(methods)


def test_summarize_noise_scenario_reports_ratios():
    spec = blob_spec(
        n=80, budget=10,
        noise=NoiseSpec("symmetric", 0.3),
        selection=sel(10, outer_iters=5),
    )
    report = run_summarization(spec)
    entry = report["entries"][0]
    assert 0.0 <= entry["coreset_noise_ratio"] <= 1.0
    assert 0.2 <= entry["train_noise_ratio"] <= 0.4  # realized rate near 0.3


def test_summarize_aggregate_means():
    spec = blob_spec(budget=6, seeds=(0, 1))
    report = run_summarization(spec)
    accs = [e["test_accuracy"] for e in report["entries"]]
    agg = report["aggregate"]["pge"]
    assert agg["runs"] == 2
    assert agg["test_accuracy_mean"] == pytest.approx(np.mean(accs))
    assert agg["test_accuracy_std"] == pytest.approx(np.std(accs, ddof=1))


# ---------------------------------------------------------------- continual

def test_continual_full_capacity_means_no_forgetting():
    # every task fits in memory, so rehearsal equals full retraining and the
    # diagonal accuracy survives to the end
    spec = blob_spec(
        task="continual", n=20, c=3, d=3, sep=8.0,
        selection=sel(10, outer_iters=5, outer_batch=4),
        num_tasks=3,
        memory_capacity=60,
    )
    report = run_continual(spec)
    entry = report["entries"][0]
    acc = np.array(entry["accuracy_matrix"])
    assert acc.shape == (3, 3)
    for t in range(3):
        assert acc[2, t] >= acc[t, t] - 0.02
    assert entry["memory_size"] == 60
    assert entry["final_avg_accuracy"] == pytest.approx(acc[2].mean())


def test_continual_single_task_degenerates_to_one_cell():
    spec = blob_spec(
        task="continual", n=12, c=2,
        selection=sel(6, outer_iters=5, outer_batch=4),
        num_tasks=1, memory_capacity=24,
    )
    report = run_continual(spec)
    acc = np.array(report["entries"][0]["accuracy_matrix"])
    assert acc.shape == (1, 1)
    assert report["entries"][0]["final_avg_accuracy"] == pytest.approx(acc[0, 0])


def test_continual_more_tasks_than_classes():
    spec = blob_spec(task="continual", n=10, c=2, num_tasks=3, memory_capacity=30,
                     selection=sel(5, outer_batch=4))
    with pytest.raises(ConfigError, match="classes"):
        run_continual(spec)


def test_continual_capacity_below_task_count():
    spec = blob_spec(task="continual", n=10, c=3, d=3, num_tasks=3, memory_capacity=2,
                     selection=sel(5, outer_batch=4))
    with pytest.raises(ConfigError, match="capacity"):
        run_continual(spec)


def test_continual_permuted_features_split():
    spec = blob_spec(
        task="continual", n=15, c=2, d=4,
        selection=sel(8, outer_iters=5, outer_batch=4),
        num_tasks=2, task_split="permute", memory_capacity=60,
    )
    report = run_continual(spec)
    acc = np.array(report["entries"][0]["accuracy_matrix"])
    assert acc.shape == (2, 2)


# ---------------------------------------------------------------- stream

def test_stream_shorter_than_memory_keeps_everything():
    spec = blob_spec(
        task="stream", n=20,
        selection=sel(8, outer_batch=4),
        memory_capacity=100, stream_batch=125,
    )
    report = run_stream(spec)
    entry = report["entries"][0]
    assert entry["batches"] == 1
    assert entry["memory_size"] == 40  # the whole stream fits


def test_stream_memory_is_capped_by_capacity():
    spec = blob_spec(
        task="stream", n=30,
        selection=sel(8, outer_iters=5, outer_batch=4),
        memory_capacity=10, stream_batch=25,
    )
    report = run_stream(spec)
    entry = report["entries"][0]
    assert entry["batches"] == 3
    assert entry["memory_size"] == 10


def test_stream_same_seed_same_trajectory():
    spec = blob_spec(
        task="stream", n=25,
        selection=sel(8, outer_iters=5, outer_batch=4),
        memory_capacity=12, stream_batch=20,
    )
    assert run_stream(spec) == run_stream(spec)


def test_stream_reservoir_baseline_entry():
    spec = blob_spec(
        task="stream", n=25,
        selection=sel(8, outer_iters=5, outer_batch=4),
        memory_capacity=12, stream_batch=20,
        baseline_methods=("reservoir",),
    )
    report = run_stream(spec)
    methods = [e["method"] for e in report["entries"]]
    assert methods == ["pge", "reservoir"]
    res = report["entries"][1]
    assert res["memory_size"] == 12
    assert res["batches"] == 3


def test_stream_selection_filters_label_noise():
    spec = blob_spec(
        task="stream", n=150, sep=8.0,
        noise=NoiseSpec("symmetric", 0.2),
        selection=sel(20, outer_iters=40, outer_batch=16),
        memory_capacity=20, stream_batch=75,
        seeds=(0, 1, 2),
    )
    report = run_stream(spec)
    noises = [e["memory_noise_ratio"] for e in report["entries"]]
    stream_noise = 0.2
    assert np.mean(noises) < stream_noise


# ---------------------------------------------------------------- features

def feature_spec(budget, info=3, noise=2, n=60, **kw):
    return ExperimentSpec(
        task="features",
        source=f"synth:featurebed:n={n},info={info},noise={noise}",
        selection=kw.pop("selection", sel(budget, outer_batch=16)),
        **kw,
    )


def test_features_full_budget_matches_unmasked(tmp_path):
    trace = tmp_path / "trace.jsonl"
    spec = feature_spec(budget=5, trace_path=str(trace))
    report = run_features(spec)
    entry = report["entries"][0]
    assert sorted(entry["selected_features"]) == [0, 1, 2, 3, 4]
    assert entry["informative_recall"] == 1.0

    train, test, _ = load_train_test(spec, 0)
    unmasked = fit(train, Mask.ones(len(train)), spec.selection.inner,
                   derived_rng(0, "full"))
    assert abs(entry["test_accuracy"] - accuracy(unmasked, test)) <= 0.01
    assert len(trace.read_text().splitlines()) == spec.selection.outer_iters


def test_features_budget_above_dimension():
    spec = feature_spec(budget=6)  # d = info + noise = 5
    with pytest.raises(ConfigError, match="feature budget"):
        run_features(spec)


def test_features_recovers_informative_coordinates():
    # single-draw score-function gradients are noisy: recovery wants the
    # running-mean control variate and a few hundred iterations
    spec = feature_spec(budget=3, info=3, noise=7, n=80,
                        selection=sel(3, outer_iters=300, outer_step=2.5,
                                      outer_batch=16, control_variate=True))
    report = run_features(spec)
    assert report["entries"][0]["informative_recall"] >= 2 / 3


def test_features_deterministic():
    spec = feature_spec(budget=3)
    assert run_features(spec) == run_features(spec)


# ---------------------------------------------------------------- data resolution

def test_load_train_test_csv_split(tmp_path):
    p = tmp_path / "d.csv"
    rows = ["label,f0,f1"]
    rows += [f"{i % 2},{i}.0,{i + 1}.0" for i in range(10)]
    p.write_text("\n".join(rows) + "\n")
    spec = ExperimentSpec(task="summarize", source=str(p), fmt="csv", selection=sel(4))
    train, test, info = load_train_test(spec, 0)
    assert info is None
    assert len(train) == 8 and len(test) == 2
    combined = np.vstack([train.features, test.features])
    assert sorted(map(tuple, combined)) == sorted(map(tuple, np.array(
        [[i, i + 1] for i in range(10)], dtype=np.float64)))


def test_load_train_test_tiny_csv_refuses_split(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("label,f0\n0,1\n1,2\n0,3\n")
    spec = ExperimentSpec(task="summarize", source=str(p), fmt="csv", selection=sel(2))
    with pytest.raises(DataError, match="too small"):
        load_train_test(spec, 0)


def test_load_train_test_explicit_test_source(tmp_path):
    tr = tmp_path / "train.csv"
    te = tmp_path / "test.csv"
    tr.write_text("label,f0\n0,1\n1,2\n0,3\n1,4\n0,5\n")
    te.write_text("label,f0\n1,9\n")
    spec = ExperimentSpec(task="summarize", source=str(tr), fmt="csv",
                          test_source=str(te), selection=sel(2))
    train, test, _ = load_train_test(spec, 0)
    assert len(train) == 5 and len(test) == 1


def test_synth_spec_parse_errors():
    for bad in ("synth:blobs:n=5,zap=1", "synth:nosuch", "blobs:n=5", "synth:blobs:n=x"):
        spec = ExperimentSpec(task="summarize", source=bad, selection=sel(2))
        with pytest.raises(ConfigError):
            load_train_test(spec, 0)


# ---------------------------------------------------------------- spec validation

@pytest.mark.parametrize(
    "kw, msg",
    [
        (dict(task="nope"), "unknown task"),
        (dict(fmt="hdf5"), "unknown format"),
        (dict(seeds=()), "at least one seed"),
        (dict(seeds=(1, 1)), "distinct"),
        (dict(run_pge=False), "nothing to run"),
        (dict(fmt="idx"), "labels file"),
        (dict(baseline_methods=("magic",)), "unknown baseline"),
        (dict(imbalance_sigma=0.0), "sigma"),
        (dict(task="stream", stream_batch=0), "stream batch"),
        (dict(task="continual", memory_capacity=0), "memory capacity"),
        (dict(task="continual", trace_path="t.jsonl"), "trace"),
    ],
)
def test_spec_validation_errors(kw, msg):
    base = dict(task="summarize", source="synth:blobs", selection=sel(4))
    base.update(kw)
    with pytest.raises(ConfigError, match=msg):
        ExperimentSpec(**base).validate()


def test_run_experiment_dispatch():
    report = run_experiment(blob_spec(budget=6))
    assert report["task"] == "summarize"
