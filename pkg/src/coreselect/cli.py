"""Command-line interface.

Subcommands: select, eval, baseline, project, cl, stream, features.
Exit codes: 0 success, 1 configuration error, 2 data error, 3 runtime
failure. An INI file given with --config supplies flag defaults (section
[coreselect]); explicit flags win.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys

import numpy as np

from .data import InnerConfig, SelectionConfig
from .exceptions import ConfigError, CoresetError, DataError
from .io import load_csv, load_idx, load_model, load_vector, save_vector
from .learners import accuracy, evaluate_loss
from .pipelines import (
    BASELINE_METHODS,
    ExperimentSpec,
    load_train_test,
    run_experiment,
)
from .projection import project
from .scenarios import NoiseSpec

_BOOLEANS = {"true": True, "yes": True, "on": True, "1": True,
             "false": False, "no": False, "off": False, "0": False}


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as ConfigError (exit code 1)."""

    def error(self, message):
        raise ConfigError(message)


def _read_config(path) -> dict:
    """Flat key=value pairs from the [coreselect] section. Dashes and
    underscores in keys are interchangeable; values stay strings here and
    are coerced per flag in _apply_config."""
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"bad config {path}: {exc}") from exc
    section = "coreselect" if cp.has_section("coreselect") else configparser.DEFAULTSECT
    return {k.replace("-", "_"): v.strip() for k, v in cp.items(section)}


def _coerce(action, key: str, value: str):
    if isinstance(action.default, bool):
        flag = _BOOLEANS.get(value.lower())
        if flag is None:
            raise ConfigError(f"config key {key!r} wants a boolean, got {value!r}")
        return flag
    if action.type is not None:
        try:
            return action.type(value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad config value for {key!r}: {value!r}") from exc
    return value


def _apply_config(parser, config: dict) -> None:
    """Install config entries as argument defaults on every subcommand.

    Explicit command-line flags still win (argparse only consults defaults
    for absent flags), and a default lifts any required marker. Keys match
    either the flag name or its dest, so both `in` and `infile` configure
    project's --in. Unknown keys are rejected."""
    recognized = set()
    for sub in parser.subcommands.values():
        for action in sub._actions:
            if action.dest == "help":
                continue
            names = {action.dest} | {
                opt[2:].replace("-", "_")
                for opt in action.option_strings
                if opt.startswith("--")
            }
            recognized |= names
            hits = sorted(n for n in names if n in config)
            if not hits:
                continue
            action.default = _coerce(action, hits[0], config[hits[0]])
            action.required = False
    unknown = sorted(set(config) - recognized)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")


def _add_data_flags(p):
    p.add_argument("--data", help="training data path (idx images / csv file)")
    p.add_argument("--labels", help="labels path for idx data")
    p.add_argument("--test-data", help="held-out test data path")
    p.add_argument("--test-labels", help="labels path for idx test data")
    p.add_argument(
        "--format",
        default="csv",
        help="idx, csv, or a generator spec synth:<gen>:<params> "
        "(e.g. synth:blobs:n=250,c=2,d=2,sep=4)",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="INI file with flag defaults")


def _add_selection_flags(p, k_help="coreset budget K"):
    p.add_argument("--k", type=int, required=True, help=k_help)
    p.add_argument("--outer-iters", type=int, default=500)
    p.add_argument("--outer-lr", type=float, default=2.5)
    p.add_argument("--batch", type=int, default=32, help="outer mini-batch size")
    p.add_argument("--inner", default="logistic", choices=["logistic", "mlp", "ridge"])
    p.add_argument("--inner-epochs", type=int, default=100)
    p.add_argument("--inner-lr", type=float, default=0.1)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--inner-batch", type=int, default=0, help="0 = full batch")
    p.add_argument("--hidden", type=int, default=100)
    p.add_argument("--adaptive", action="store_true", help="adam-style outer steps")
    p.add_argument("--cosine", action="store_true", help="cosine outer step decay")
    p.add_argument("--control-variate", action="store_true")
    p.add_argument("--warm-start", action="store_true")
    p.add_argument("--extract", default="topk", choices=["topk", "sample"])
    p.add_argument("--repeats", type=int, default=1, help="seeds seed..seed+repeats-1")
    p.add_argument("--noise", help="label noise, kind:rate (symmetric:0.4, pairwise:0.3)")
    p.add_argument("--imbalance-sigma", type=float)
    p.add_argument("--validation-size", type=int, default=100)
    p.add_argument("--out", help="directory for the report bundle")
    p.add_argument("--trace", help="JSONL path for per-iteration trace")


def build_parser() -> _Parser:
    parser = _Parser(prog="coreselect", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="coreset selection on one dataset")
    _add_data_flags(p)
    _add_selection_flags(p)
    p.add_argument("--baselines", help="comma list of baselines to run alongside")

    p = sub.add_parser("eval", help="score a saved model on a dataset")
    _add_data_flags(p)
    p.add_argument("--model", required=True)

    p = sub.add_parser("baseline", help="run a classical baseline selector")
    _add_data_flags(p)
    _add_selection_flags(p, k_help="selection budget K")
    p.add_argument("--method", required=True, choices=list(BASELINE_METHODS))

    p = sub.add_parser("project", help="project a vector onto the feasible set")
    p.add_argument("--in", dest="infile", required=True, help="one value per line")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--out", help="output path (stdout when omitted)")
    p.add_argument("--config", help="INI file with flag defaults")

    p = sub.add_parser("cl", help="continual learning with replay memory")
    _add_data_flags(p)
    _add_selection_flags(p, k_help="per-selection budget (memory share overrides)")
    p.add_argument("--tasks", type=int, default=3)
    p.add_argument("--task-split", default="labels", choices=["labels", "permute"])
    p.add_argument("--memory", type=int, default=100)
    p.add_argument("--task-cap", type=int, default=1000)

    p = sub.add_parser("stream", help="streaming summarization over batches")
    _add_data_flags(p)
    _add_selection_flags(p, k_help="selection budget inside each batch")
    p.add_argument("--memory", type=int, default=100)
    p.add_argument("--stream-batch", type=int, default=125)
    p.add_argument("--baselines", help="comma list; 'reservoir' is supported here")

    p = sub.add_parser("features", help="feature selection with the same machinery")
    _add_data_flags(p)
    _add_selection_flags(p, k_help="feature budget")

    parser.subcommands = {
        name: sp
        for action in parser._subparsers._group_actions
        for name, sp in action.choices.items()
    }
    return parser


def _data_source(args):
    fmt = args.format
    if fmt.startswith("synth:"):
        return fmt, "synth"
    if fmt not in ("idx", "csv"):
        raise ConfigError(f"unknown format {fmt!r}; use idx, csv, or synth:<gen>:<params>")
    if not args.data:
        raise ConfigError(f"--data is required for format {fmt!r}")
    return args.data, fmt


def _selection_config(args) -> SelectionConfig:
    inner = InnerConfig(
        kind=args.inner,
        epochs=args.inner_epochs,
        step_size=args.inner_lr,
        momentum=args.momentum,
        batch_size=args.inner_batch,
        hidden=args.hidden,
        warm_start=args.warm_start,
    )
    extract = {"topk": "top_k", "sample": "sample"}.get(args.extract)
    if extract is None:  # config files bypass argparse choices
        raise ConfigError(f"unknown extract mode {args.extract!r}")
    return SelectionConfig(
        budget=args.k,
        outer_iters=args.outer_iters,
        outer_step=args.outer_lr,
        outer_batch=args.batch,
        inner=inner,
        seed=args.seed,
        extract_mode=extract,
        adaptive_step=args.adaptive,
        cosine_schedule=args.cosine,
        control_variate=args.control_variate,
    )


def _experiment_spec(args, task: str, **overrides) -> ExperimentSpec:
    source, fmt = _data_source(args)
    if args.repeats < 1:
        raise ConfigError("--repeats must be >= 1")
    noise = NoiseSpec.parse(args.noise) if args.noise else None
    return ExperimentSpec(
        task=task,
        source=source,
        fmt=fmt,
        labels_source=args.labels,
        test_source=args.test_data,
        test_labels_source=args.test_labels,
        selection=_selection_config(args),
        noise=noise,
        imbalance_sigma=args.imbalance_sigma,
        seeds=tuple(range(args.seed, args.seed + args.repeats)),
        validation_size=args.validation_size,
        out_dir=args.out,
        trace_path=args.trace,
        **overrides,
    )


def _parse_methods(text) -> tuple[str, ...]:
    if not text:
        return ()
    return tuple(m.strip() for m in text.split(",") if m.strip())


def _print_report(report: dict) -> None:
    print(json.dumps(report["aggregate"], indent=2, sort_keys=True))


def _cmd_select(args) -> int:
    spec = _experiment_spec(args, "summarize", baseline_methods=_parse_methods(args.baselines))
    _print_report(run_experiment(spec))
    return 0


def _cmd_baseline(args) -> int:
    spec = _experiment_spec(
        args, "summarize", baseline_methods=(args.method,), run_pge=False
    )
    _print_report(run_experiment(spec))
    return 0


def _cmd_eval(args) -> int:
    model = load_model(args.model)
    source, fmt = _data_source(args)
    if fmt == "synth":
        spec = ExperimentSpec(
            task="summarize", source=source, fmt=fmt,
            selection=SelectionConfig(budget=1), seeds=(args.seed,),
        )
        dataset, _, _ = load_train_test(spec, args.seed)
    elif fmt == "idx":
        if not args.labels:
            raise ConfigError("idx format needs --labels")
        dataset = load_idx(source, args.labels)
    else:
        dataset = load_csv(source)
    result = {
        "loss": evaluate_loss(model, dataset.features, dataset.labels),
        "accuracy": accuracy(model, dataset),
        "examples": len(dataset),
    }
    print(json.dumps(result, indent=2, sort_keys=True))
    return 0


def _cmd_project(args) -> int:
    z = load_vector(args.infile)
    s = project(z, args.k)
    if args.out:
        save_vector(args.out, s)
    else:
        sys.stdout.write("".join(f"{v:.17g}\n" for v in s))
    return 0


def _cmd_cl(args) -> int:
    spec = _experiment_spec(
        args, "continual",
        num_tasks=args.tasks, task_split=args.task_split,
        memory_capacity=args.memory, per_task_cap=args.task_cap,
    )
    _print_report(run_experiment(spec))
    return 0


def _cmd_stream(args) -> int:
    spec = _experiment_spec(
        args, "stream",
        memory_capacity=args.memory, stream_batch=args.stream_batch,
        baseline_methods=_parse_methods(args.baselines),
    )
    _print_report(run_experiment(spec))
    return 0


def _cmd_features(args) -> int:
    spec = _experiment_spec(args, "features")
    _print_report(run_experiment(spec))
    return 0


_COMMANDS = {
    "select": _cmd_select,
    "eval": _cmd_eval,
    "baseline": _cmd_baseline,
    "project": _cmd_project,
    "cl": _cmd_cl,
    "stream": _cmd_stream,
    "features": _cmd_features,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        pre = argparse.ArgumentParser(add_help=False)
        pre.add_argument("--config")
        known, _ = pre.parse_known_args(argv)
        parser = build_parser()
        if known.config:
            _apply_config(parser, _read_config(known.config))
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except CoresetError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
