"""Coreset selection by probabilistic bilevel optimization.

Inclusion of each example is governed by a Bernoulli probability; the outer
loop descends the expected retraining loss with projected score-function
gradients while the inner loop fits a model on each sampled subset. The same
machinery drives dataset summarization (with label noise and imbalance
scenarios), continual-learning replay memories, streaming summarization and
feature selection.
"""

from ._backend import BACKEND_NAME
from .bernoulli import (
    ScoreClamp,
    expected_cardinality,
    log_prob,
    sample_mask,
    score_gradient,
)
from .data import (
    Dataset,
    InnerConfig,
    IterationRecord,
    LabeledExample,
    Mask,
    ProbabilityVector,
    SelectionConfig,
    SelectionTrace,
    dataset_validate,
    derived_rng,
)
from .exceptions import (
    ConfigError,
    CoresetError,
    DataError,
    EmptyCoresetError,
    ImpossibleOutcomeError,
    RunAbortedError,
)
from .learners import accuracy, evaluate_loss, fit
from .optimizer import (
    OuterState,
    extract_coreset,
    gradient_mapping_norm,
    init_probabilities,
    pge_step,
    polarization,
    run_selection,
)
from .pipelines import (
    ExperimentSpec,
    ReplayMemory,
    run_continual,
    run_experiment,
    run_features,
    run_stream,
    run_summarization,
)
from .projection import ProjectionParams, dual_residual, project

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME",
    "ConfigError",
    "CoresetError",
    "DataError",
    "Dataset",
    "EmptyCoresetError",
    "ExperimentSpec",
    "ImpossibleOutcomeError",
    "InnerConfig",
    "IterationRecord",
    "LabeledExample",
    "Mask",
    "OuterState",
    "ProbabilityVector",
    "ProjectionParams",
    "ReplayMemory",
    "RunAbortedError",
    "ScoreClamp",
    "SelectionConfig",
    "SelectionTrace",
    "accuracy",
    "dataset_validate",
    "derived_rng",
    "dual_residual",
    "evaluate_loss",
    "expected_cardinality",
    "extract_coreset",
    "fit",
    "gradient_mapping_norm",
    "init_probabilities",
    "log_prob",
    "pge_step",
    "polarization",
    "project",
    "run_continual",
    "run_experiment",
    "run_features",
    "run_selection",
    "run_stream",
    "run_summarization",
    "sample_mask",
    "score_gradient",
]
