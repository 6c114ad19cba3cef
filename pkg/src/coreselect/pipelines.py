"""End-to-end experiment pipelines: summarization, continual learning,
streaming summarization, and feature selection, plus the baseline runners.

A pipeline takes an ExperimentSpec, repeats the experiment across its seeds
with fully derived randomness (same spec + seed = same report), and returns
a JSON-friendly report dict. Reports can be written out with emit_report.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import baselines as bl
from .data import Dataset, Mask, SelectionConfig, derived_rng
from .exceptions import ConfigError, DataError
from .io import emit_report, load_csv, load_idx
from .learners import accuracy, fit
from .optimizer import extract_coreset, polarization, run_selection, run_selection_loop
from .scenarios import (
    NoiseSpec,
    add_feature_noise,
    gen_blobs,
    gen_feature_bed,
    imbalance_factor,
    make_imbalanced,
    noise_ratio,
)

__all__ = [
    "ExperimentSpec",
    "ReplayMemory",
    "run_summarization",
    "run_continual",
    "run_stream",
    "run_features",
    "run_experiment",
    "emit_report",
    "load_train_test",
]

BASELINE_METHODS = ("uniform", "kcenter", "hardest", "herding")


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything one experiment needs: data source, scenario, selection
    configuration, repeat seeds, and output paths.

    source is a file path (fmt "idx" or "csv") or a generator spec like
    "synth:blobs:n=250,c=2,d=2,sep=4" / "synth:featurebed:n=500,info=10,noise=90".
    For IDX, labels_source names the labels file. File sources without a
    test_source get a deterministic 80/20 split per seed.
    """

    task: str
    source: str
    selection: SelectionConfig
    fmt: str = "synth"
    labels_source: str | None = None
    test_source: str | None = None
    test_labels_source: str | None = None
    noise: NoiseSpec | None = None
    imbalance_sigma: float | None = None
    feature_noise_std: float = 0.0
    baseline_methods: tuple[str, ...] = ()
    run_pge: bool = True
    seeds: tuple[int, ...] = (0,)
    validation_size: int = 100
    num_tasks: int = 3
    task_split: str = "labels"
    memory_capacity: int = 100
    stream_batch: int = 125
    per_task_cap: int = 1000
    out_dir: str | None = None
    trace_path: str | None = None

    def validate(self) -> None:
        if self.task not in ("summarize", "continual", "stream", "features"):
            raise ConfigError(f"unknown task: {self.task!r}")
        if self.fmt not in ("synth", "idx", "csv"):
            raise ConfigError(f"unknown format: {self.fmt!r}")
        if not self.seeds:
            raise ConfigError("need at least one seed")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        if not self.run_pge and not self.baseline_methods:
            raise ConfigError("nothing to run: run_pge is off and no baselines requested")
        if self.fmt == "idx" and self.labels_source is None:
            raise ConfigError("idx format needs a labels file")
        for m in self.baseline_methods:
            if m not in BASELINE_METHODS + ("reservoir",):
                raise ConfigError(f"unknown baseline method: {m!r}")
        if self.imbalance_sigma is not None and not (0.0 < self.imbalance_sigma <= 1.0):
            raise ConfigError("imbalance sigma must lie in (0, 1]")
        if self.task in ("continual", "stream") and self.memory_capacity < 1:
            raise ConfigError("memory capacity must be >= 1")
        if self.task == "continual" and self.num_tasks < 1:
            raise ConfigError("num_tasks must be >= 1")
        if self.task == "stream" and self.stream_batch < 1:
            raise ConfigError("stream batch must be >= 1")
        if self.trace_path and self.task in ("continual", "stream"):
            raise ConfigError("per-iteration traces are only written by summarize/features runs")
        self.selection.validate()


class ReplayMemory:
    """Bounded replay store holding one dataset per named bucket."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ConfigError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.buckets: dict = {}

    def put(self, key, dataset: Dataset) -> None:
        previous = self.buckets.pop(key, None)
        if self.total() + len(dataset) > self.capacity:
            if previous is not None:
                self.buckets[key] = previous
            raise ConfigError(
                f"bucket {key!r} with {len(dataset)} examples would exceed capacity {self.capacity}"
            )
        self.buckets[key] = dataset

    def total(self) -> int:
        return sum(len(ds) for ds in self.buckets.values())

    def combined(self) -> Dataset | None:
        if not self.buckets:
            return None
        return Dataset.concat([self.buckets[k] for k in sorted(self.buckets, key=str)])


def _seed_int(seed: int, *key) -> int:
    return int(derived_rng(seed, *key).integers(2**63))


def _parse_kv(params: str, defaults: dict, spec_str: str) -> dict:
    out = dict(defaults)
    if params:
        for part in params.split(","):
            k, sep, v = part.partition("=")
            k = k.strip()
            if not sep or k not in out:
                raise ConfigError(f"bad generator parameter {part!r} in {spec_str!r}")
            try:
                out[k] = type(defaults[k])(v)
            except ValueError as exc:
                raise ConfigError(f"bad value for {k!r} in {spec_str!r}") from exc
    return out


def _gen_synth(spec_str: str, rng: np.random.Generator, doubled: bool):
    """Generate (train, test, informative) from a synth: spec. Test halves
    share the labeling rule with the train halves."""
    parts = spec_str.split(":", 2)
    if parts[0] != "synth" or len(parts) < 2:
        raise ConfigError(f"bad synth spec: {spec_str!r}")
    gen = parts[1]
    params = parts[2] if len(parts) > 2 else ""
    if gen == "blobs":
        p = _parse_kv(params, {"n": 250, "c": 2, "d": 2, "sep": 4.0}, spec_str)
        train = gen_blobs(p["n"], p["c"], p["d"], p["sep"], rng)
        test = gen_blobs(p["n"], p["c"], p["d"], p["sep"], rng) if doubled else None
        return train, test, None
    if gen == "featurebed":
        p = _parse_kv(params, {"n": 500, "info": 10, "noise": 90, "margin": 1.0}, spec_str)
        total = 2 * p["n"] if doubled else p["n"]
        ds, info = gen_feature_bed(total, p["info"], p["noise"], rng, p["margin"])
        if not doubled:
            return ds, None, info
        halves = np.arange(len(ds))
        return ds.subset(halves[: p["n"]]), ds.subset(halves[p["n"] :]), info
    raise ConfigError(f"unknown generator: {gen!r}")


def load_train_test(spec: ExperimentSpec, seed: int):
    """Resolve the spec's data source into (train, test, informative_indices)."""
    if spec.fmt == "synth":
        return _gen_synth(spec.source, derived_rng(seed, "data"), doubled=True)
    if spec.fmt == "idx":
        train = load_idx(spec.source, spec.labels_source)
    else:
        train = load_csv(spec.source)
    if spec.test_source:
        if spec.fmt == "idx":
            if spec.test_labels_source is None:
                raise ConfigError("idx test data needs test labels")
            test = load_idx(spec.test_source, spec.test_labels_source)
        else:
            test = load_csv(spec.test_source)
        return train, test, None
    if len(train) < 5:
        raise DataError("dataset too small to split; provide a test source")
    perm = derived_rng(seed, "split").permutation(len(train))
    cut = max(1, int(0.8 * len(train)))
    return train.subset(np.sort(perm[:cut])), train.subset(np.sort(perm[cut:])), None


def _carve_validation(train: Dataset, size: int, rng: np.random.Generator):
    """Hold out a class-balanced validation set (size // C per class) drawn
    uniformly within each class; returns (remaining train, validation)."""
    C = train.num_classes
    per = size // C
    if per < 1:
        raise ConfigError(f"validation size {size} too small for {C} classes")
    counts = train.class_counts()
    val_parts = []
    for c in range(C):
        if counts[c] <= per:
            raise ConfigError(
                f"class {c} has {counts[c]} examples; cannot hold out {per} and keep any"
            )
        idx_c = np.flatnonzero(train.labels == c)
        val_parts.append(rng.choice(idx_c, size=per, replace=False))
    val_idx = np.sort(np.concatenate(val_parts))
    keep = np.setdiff1d(np.arange(len(train)), val_idx)
    return train.subset(keep), train.subset(val_idx)


def _apply_scenario(train: Dataset, spec: ExperimentSpec, seed: int, *tag):
    """Carve a clean balanced validation set when a corruption is requested,
    then corrupt the remaining train (imbalance first, then label noise)."""
    val = None
    if spec.noise is not None or spec.imbalance_sigma is not None:
        train, val = _carve_validation(
            train, spec.validation_size, derived_rng(seed, "val", *tag)
        )
        if spec.imbalance_sigma is not None:
            train = make_imbalanced(train, spec.imbalance_sigma, derived_rng(seed, "imb", *tag))
        if spec.noise is not None:
            train = spec.noise.apply(train, derived_rng(seed, "noise", *tag))
    return train, val


def _extract(s, mode, rng):
    if mode == "sample":
        for _ in range(16):
            idx = extract_coreset(s, "sample", rng)
            if idx.size:
                return idx
    return extract_coreset(s, "top_k", rng)


def _coreset_imbalance(train: Dataset, idx: np.ndarray):
    counts = np.bincount(train.labels[idx], minlength=train.num_classes)
    if counts.min() < 1:
        return None  # a class is missing entirely; the ratio is unbounded
    return float(counts.max() / counts.min())


def _evaluate_selection(train, test, idx, cfg: SelectionConfig, seed, method, spec):
    model = fit(
        train,
        Mask.from_indices(len(train), idx),
        cfg.inner,
        derived_rng(seed, "retrain", method),
        budget=cfg.budget,
    )
    entry = {
        "seed": seed,
        "method": method,
        "test_accuracy": accuracy(model, test),
        "coreset_size": int(idx.size),
    }
    if spec.noise is not None and train.has_clean_labels:
        entry["coreset_noise_ratio"] = noise_ratio(train, idx)
        entry["train_noise_ratio"] = noise_ratio(train, np.arange(len(train)))
    if spec.imbalance_sigma is not None:
        entry["train_imbalance"] = imbalance_factor(train)
        entry["coreset_imbalance"] = _coreset_imbalance(train, idx)
    return entry


def _reference_model(train: Dataset, cfg: SelectionConfig, seed: int):
    """Model backing the embedding/loss baselines: trained on a uniform
    subsample of at most 1000 examples."""
    rng = derived_rng(seed, "refmodel")
    cap = min(1000, len(train))
    idx = np.sort(rng.choice(len(train), size=cap, replace=False))
    return fit(train, Mask.from_indices(len(train), idx), cfg.inner, rng)


def _run_baselines(train, test, cfg, seed, spec, entries):
    ref = None
    picks = {}
    for method in spec.baseline_methods:
        if method == "reservoir":
            continue  # stream-only; handled by run_stream
        rng = derived_rng(seed, "baseline", method)
        if method == "uniform":
            idx = bl.uniform_sample(len(train), cfg.budget, rng)
        else:
            if ref is None:
                ref = _reference_model(train, cfg, seed)
            if method == "kcenter":
                idx = bl.k_center(ref.embed(train.features), cfg.budget, rng)
            elif method == "hardest":
                idx = bl.hardest_samples(train, ref, cfg.budget)
            else:
                idx = bl.herding(
                    ref.embed(train.features), train.labels, cfg.budget, train.num_classes
                )
        picks[method] = idx
        entries.append(_evaluate_selection(train, test, idx, cfg, seed, method, spec))
    return picks


def _aggregate(entries: list[dict]) -> dict:
    by_method: dict[str, list[dict]] = {}
    for e in entries:
        by_method.setdefault(e["method"], []).append(e)
    agg = {}
    for method, rows in by_method.items():
        summary = {"runs": len(rows)}
        for key in rows[0]:
            if key in ("seed", "method"):
                continue
            vals = [r.get(key) for r in rows]
            if all(isinstance(v, (int, float)) and v is not True and v is not False for v in vals):
                arr = np.array(vals, dtype=np.float64)
                summary[f"{key}_mean"] = float(arr.mean())
                if key == "test_accuracy" and len(rows) > 1:
                    summary["test_accuracy_std"] = float(arr.std(ddof=1))
        agg[method] = summary
    return agg


def _trace_path_for_seed(spec: ExperimentSpec, seed: int) -> str | None:
    if not spec.trace_path:
        return None
    if len(spec.seeds) == 1:
        return spec.trace_path
    stem, dot, ext = spec.trace_path.rpartition(".")
    return f"{stem}.seed{seed}.{ext}" if dot else f"{spec.trace_path}.seed{seed}"


def run_summarization(spec: ExperimentSpec) -> dict:
    """Coreset selection on one dataset, optionally under label noise or
    class imbalance, with baseline comparisons and retrain-on-coreset
    test accuracy."""
    spec.validate()
    entries = []
    first_artifacts = {}
    for seed in spec.seeds:
        train, test, _ = load_train_test(spec, seed)
        train, val = _apply_scenario(train, spec, seed)
        cfg = replace(spec.selection, seed=seed)
        if spec.run_pge:
            s, trace = run_selection(train, val, cfg)
            idx = _extract(s, cfg.extract_mode, derived_rng(seed, "extract"))
            entry = _evaluate_selection(train, test, idx, cfg, seed, "pge", spec)
            entry["polarization"] = polarization(s)
            entry["expected_card"] = float(s.values.sum())
            entry["grad_variance"] = trace.grad_variance
            entries.append(entry)
            tpath = _trace_path_for_seed(spec, seed)
            if tpath:
                trace.to_jsonl(tpath)
            if not first_artifacts:
                first_artifacts = {
                    "coreset": idx,
                    "probabilities": s.values,
                    "mask_bits": Mask.from_indices(len(train), idx).bits,
                }
        picks = _run_baselines(train, test, cfg, seed, spec, entries)
        if not first_artifacts and picks:
            first_idx = picks[next(iter(picks))]
            first_artifacts = {
                "coreset": first_idx,
                "mask_bits": Mask.from_indices(len(train), first_idx).bits,
            }
    report = {
        "task": "summarize",
        "seeds": list(spec.seeds),
        "entries": entries,
        "aggregate": _aggregate(entries),
    }
    if spec.out_dir:
        emit_report({"metrics": entries + [{"aggregate": report["aggregate"]}],
                     **first_artifacts}, spec.out_dir)
    return report


def _split_tasks(train: Dataset, test: Dataset, spec: ExperimentSpec, seed: int):
    """Split a base dataset into a task sequence.

    "labels": classes partitioned into contiguous groups, one group per task.
    "permute": each task applies its own feature permutation (task 0 is the
    identity); labels are shared.
    """
    T = spec.num_tasks
    if spec.task_split == "labels":
        C = train.num_classes
        if T > C:
            raise ConfigError(f"cannot split {C} classes into {T} label tasks")
        groups = np.array_split(np.arange(C), T)
        tr = [train.subset(np.flatnonzero(np.isin(train.labels, g))) for g in groups]
        te = [test.subset(np.flatnonzero(np.isin(test.labels, g))) for g in groups]
        return tr, te
    if spec.task_split == "permute":
        rng = derived_rng(seed, "permute")
        tr, te = [], []
        for t in range(T):
            perm = np.arange(train.feature_dim) if t == 0 else rng.permutation(train.feature_dim)
            tr.append(Dataset(train.features[:, perm], train.labels, train.num_classes,
                              train.clean_labels))
            te.append(Dataset(test.features[:, perm], test.labels, test.num_classes,
                              test.clean_labels))
        return tr, te
    raise ConfigError(f"unknown task split: {spec.task_split!r}")


def _cap_task(ds: Dataset, cap: int, rng: np.random.Generator) -> Dataset:
    if cap and len(ds) > cap:
        return ds.subset(np.sort(rng.choice(len(ds), size=cap, replace=False)))
    return ds


def run_continual(spec: ExperimentSpec) -> dict:
    """Sequential tasks with a coreset replay memory.

    After each task, the selection loop picks that task's share of the
    memory (capacity split evenly, remainder to the earliest tasks); the
    model trains continually on current task data plus replayed memory.
    Reports the per-task accuracy matrix and final average accuracy.
    """
    spec.validate()
    entries = []
    for seed in spec.seeds:
        base_train, base_test, _ = load_train_test(spec, seed)
        tasks_train, tasks_test = _split_tasks(base_train, base_test, spec, seed)
        T = len(tasks_train)
        if spec.memory_capacity < T:
            raise ConfigError(f"memory capacity {spec.memory_capacity} < {T} tasks")
        memory = ReplayMemory(spec.memory_capacity)
        model = None
        acc = np.full((T, T), np.nan)
        mem_noise = []
        for t in range(T):
            train_t = _cap_task(tasks_train[t], spec.per_task_cap, derived_rng(seed, "cap", t))
            train_t, val_t = _apply_scenario(train_t, spec, seed, t)
            replay = memory.combined()
            combined = train_t if replay is None else Dataset.concat([train_t, replay])
            model = fit(
                combined,
                Mask.ones(len(combined)),
                spec.selection.inner,
                derived_rng(seed, "fit", t),
                init=model,
            )
            acc[t] = [accuracy(model, te) for te in tasks_test]
            share = spec.memory_capacity // T + (1 if t < spec.memory_capacity % T else 0)
            share = min(share, len(train_t))
            sel_cfg = replace(
                spec.selection, budget=share, seed=_seed_int(seed, "select", t)
            )
            s_t, _ = run_selection(train_t, val_t, sel_cfg)
            keep = _extract(s_t, sel_cfg.extract_mode, derived_rng(seed, "extract", t))
            memory.put(t, train_t.subset(keep))
            if spec.noise is not None and train_t.has_clean_labels:
                mem_noise.append(noise_ratio(train_t, keep))
        entry = {
            "seed": seed,
            "method": "pge",
            "final_avg_accuracy": float(np.nanmean(acc[T - 1])),
            "accuracy_matrix": acc.tolist(),
            "memory_size": memory.total(),
        }
        entry["test_accuracy"] = entry["final_avg_accuracy"]
        if mem_noise:
            entry["memory_noise_ratio"] = float(np.mean(mem_noise))
        entries.append(entry)
    report = {
        "task": "continual",
        "seeds": list(spec.seeds),
        "entries": entries,
        "aggregate": _aggregate(entries),
    }
    if spec.out_dir:
        emit_report({"metrics": entries + [{"aggregate": report["aggregate"]}]}, spec.out_dir)
    return report


def run_stream(spec: ExperimentSpec) -> dict:
    """One pass over a shuffled stream in fixed-size batches.

    Each batch, the selection loop re-picks the memory from batch + current
    memory, then the model continues training on that pool. A reservoir
    baseline (when requested) mirrors the same training schedule with
    algorithm-R memory.
    """
    spec.validate()
    entries = []
    for seed in spec.seeds:
        train, test, _ = load_train_test(spec, seed)
        train, val = _apply_scenario(train, spec, seed)
        order = derived_rng(seed, "stream-order").permutation(len(train))
        batches = [order[i : i + spec.stream_batch] for i in range(0, len(order), spec.stream_batch)]

        memory = ReplayMemory(spec.memory_capacity)
        model = None
        for b, batch_idx in enumerate(batches):
            batch = train.subset(batch_idx)
            held = memory.combined()
            pool = batch if held is None else Dataset.concat([batch, held])
            budget = min(spec.memory_capacity, len(pool))
            if budget >= len(pool):
                # pool fits entirely: selection is the identity
                keep = np.arange(len(pool))
            else:
                sel_cfg = replace(
                    spec.selection, budget=budget, seed=_seed_int(seed, "stream", b)
                )
                s_b, _ = run_selection(pool, val, sel_cfg)
                keep = _extract(s_b, sel_cfg.extract_mode, derived_rng(seed, "extract", b))
            memory.buckets.clear()
            memory.put("stream", pool.subset(keep))
            model = fit(
                pool,
                Mask.ones(len(pool)),
                spec.selection.inner,
                derived_rng(seed, "fit", b),
                init=model,
            )
        entry = {
            "seed": seed,
            "method": "pge",
            "test_accuracy": accuracy(model, test),
            "memory_size": memory.total(),
            "batches": len(batches),
        }
        final_mem = memory.combined()
        if spec.noise is not None and final_mem is not None and final_mem.has_clean_labels:
            entry["memory_noise_ratio"] = noise_ratio(final_mem, np.arange(len(final_mem)))
        entries.append(entry)

        if "reservoir" in spec.baseline_methods:
            res_rng = derived_rng(seed, "reservoir")
            res_model = None
            kept: list[int] = []
            seen = 0
            for b, batch_idx in enumerate(batches):
                batch = train.subset(batch_idx)
                pool = batch if not kept else Dataset.concat([batch, train.subset(np.array(kept))])
                res_model = fit(
                    pool,
                    Mask.ones(len(pool)),
                    spec.selection.inner,
                    derived_rng(seed, "res-fit", b),
                    init=res_model,
                )
                for pos in batch_idx:  # algorithm R over the global stream
                    if seen < spec.memory_capacity:
                        kept.append(int(pos))
                    else:
                        j = int(res_rng.integers(0, seen + 1))
                        if j < spec.memory_capacity:
                            kept[j] = int(pos)
                    seen += 1
            res_entry = {
                "seed": seed,
                "method": "reservoir",
                "test_accuracy": accuracy(res_model, test),
                "memory_size": len(kept),
                "batches": len(batches),
            }
            if spec.noise is not None and train.has_clean_labels and kept:
                res_entry["memory_noise_ratio"] = noise_ratio(train, np.array(kept))
            entries.append(res_entry)
    report = {
        "task": "stream",
        "seeds": list(spec.seeds),
        "entries": entries,
        "aggregate": _aggregate(entries),
    }
    if spec.out_dir:
        emit_report({"metrics": entries + [{"aggregate": report["aggregate"]}]}, spec.out_dir)
    return report


def run_features(spec: ExperimentSpec) -> dict:
    """Feature selection with the same machinery: the Bernoulli mask ranges
    over feature coordinates, the inner model trains on masked features, and
    the outer loss is measured with the same mask applied."""
    spec.validate()
    entries = []
    first_artifacts = {}
    for seed in spec.seeds:
        train, test, informative = load_train_test(spec, seed)
        if spec.feature_noise_std > 0.0:
            train = add_feature_noise(train, spec.feature_noise_std, derived_rng(seed, "fnoise"))
            test = add_feature_noise(test, spec.feature_noise_std, derived_rng(seed, "fnoise-test"))
        cfg = replace(spec.selection, seed=seed)
        d = train.feature_dim
        if cfg.budget > d:
            raise ConfigError(f"feature budget {cfg.budget} exceeds {d} features")
        if cfg.outer_batch > len(train):
            raise ConfigError(
                f"outer_batch {cfg.outer_batch} exceeds the {len(train)} training examples"
            )
        n_outer = len(train)
        all_examples = Mask.ones(len(train))

        def loss_fn(mask, rng, _train=train, _cfg=cfg, _n=n_outer, _all=all_examples):
            masked = Dataset(
                _train.features * mask.bits[None, :], _train.labels, _train.num_classes
            )
            model = fit(masked, _all, _cfg.inner, rng)
            if _cfg.outer_batch < _n:
                bidx = rng.choice(_n, size=_cfg.outer_batch, replace=False)
            else:
                bidx = np.arange(_n)
            losses = model.per_example_loss(masked.features[bidx], masked.labels[bidx])
            return float(losses.mean())

        s, trace = run_selection_loop(d, cfg, loss_fn)
        selected = extract_coreset(s, "top_k")
        bits = Mask.from_indices(d, selected).bits.astype(np.float64)
        final_model = fit(
            Dataset(train.features * bits[None, :], train.labels, train.num_classes),
            all_examples,
            cfg.inner,
            derived_rng(seed, "retrain"),
        )
        masked_test = Dataset(test.features * bits[None, :], test.labels, test.num_classes)
        entry = {
            "seed": seed,
            "method": "pge",
            "test_accuracy": accuracy(final_model, masked_test),
            "selected_features": [int(i) for i in selected],
            "polarization": polarization(s),
        }
        if informative is not None:
            hits = np.intersect1d(selected, informative).size
            entry["informative_recall"] = hits / informative.size
        entries.append(entry)
        tpath = _trace_path_for_seed(spec, seed)
        if tpath:
            trace.to_jsonl(tpath)
        if not first_artifacts:
            first_artifacts = {
                "coreset": selected,
                "probabilities": s.values,
                "mask_bits": Mask.from_indices(d, selected).bits,
            }
    report = {
        "task": "features",
        "seeds": list(spec.seeds),
        "entries": entries,
        "aggregate": _aggregate(entries),
    }
    if spec.out_dir:
        emit_report({"metrics": entries + [{"aggregate": report["aggregate"]}],
                     **first_artifacts}, spec.out_dir)
    return report


def run_experiment(spec: ExperimentSpec) -> dict:
    runner = {
        "summarize": run_summarization,
        "continual": run_continual,
        "stream": run_stream,
        "features": run_features,
    }[spec.task]
    return runner(spec)
