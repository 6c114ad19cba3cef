"""Inner-loop learners: momentum-SGD logistic and MLP heads, closed-form ridge.

fit() trains on the subset a mask selects, minimizing
loss_scale * sum of per-example losses, where loss_scale is 1/budget when a
budget is supplied (the outer loop's convention) and 1/|subset| otherwise.
Iterative training runs on the selected backend (compiled or NumPy).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from . import _backend
from .data import Dataset, InnerConfig, Mask
from .exceptions import ConfigError, DataError, EmptyCoresetError

__all__ = [
    "InnerConfig",
    "LogisticModel",
    "MLPModel",
    "RidgeModel",
    "TrainedModel",
    "fit",
    "empty_model",
    "evaluate_loss",
    "accuracy",
    "loss_and_gradient",
]


def _stable_xent(scores: np.ndarray, labels: np.ndarray) -> np.ndarray:
    zmax = scores.max(axis=1)
    lse = np.log(np.exp(scores - zmax[:, None]).sum(axis=1)) + zmax
    return lse - scores[np.arange(scores.shape[0]), labels]


def _softmax(scores: np.ndarray) -> np.ndarray:
    e = np.exp(scores - scores.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def _one_hot(labels: np.ndarray, num_classes: int) -> np.ndarray:
    out = np.zeros((labels.shape[0], num_classes))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


@dataclass
class LogisticModel:
    """Linear softmax classifier."""

    W: np.ndarray  # (d, C)
    b: np.ndarray  # (C,)
    final_loss: float = float("nan")
    epochs_run: int = 0

    kind: ClassVar[str] = "logistic"

    @property
    def num_classes(self) -> int:
        return self.W.shape[1]

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        return X @ self.W + self.b

    def per_example_loss(self, X: np.ndarray, y: np.ndarray) -> np.ndarray:
        return _stable_xent(self.decision_scores(X), y)

    def predict(self, X: np.ndarray) -> np.ndarray:
        # argmax takes the lowest class index on ties
        return np.argmax(self.decision_scores(X), axis=1)

    def embed(self, X: np.ndarray) -> np.ndarray:
        return self.decision_scores(X)

    def params(self) -> tuple[np.ndarray, ...]:
        return (self.W, self.b)

    def copy(self) -> "LogisticModel":
        return LogisticModel(self.W.copy(), self.b.copy(), self.final_loss, self.epochs_run)


@dataclass
class MLPModel:
    """Two-hidden-layer ReLU network with softmax output."""

    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    W3: np.ndarray
    b3: np.ndarray
    final_loss: float = float("nan")
    epochs_run: int = 0

    kind: ClassVar[str] = "mlp"

    @property
    def num_classes(self) -> int:
        return self.W3.shape[1]

    def forward(self, X: np.ndarray):
        H1 = np.maximum(0.0, X @ self.W1 + self.b1)
        H2 = np.maximum(0.0, H1 @ self.W2 + self.b2)
        return H1, H2, H2 @ self.W3 + self.b3

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        return self.forward(X)[2]

    def per_example_loss(self, X: np.ndarray, y: np.ndarray) -> np.ndarray:
        return _stable_xent(self.decision_scores(X), y)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.decision_scores(X), axis=1)

    def embed(self, X: np.ndarray) -> np.ndarray:
        """Last hidden activations, the representation used by geometric baselines."""
        return self.forward(X)[1]

    def params(self) -> tuple[np.ndarray, ...]:
        return (self.W1, self.b1, self.W2, self.b2, self.W3, self.b3)

    def copy(self) -> "MLPModel":
        return MLPModel(*(p.copy() for p in self.params()), self.final_loss, self.epochs_run)


@dataclass
class RidgeModel:
    """One-hot least squares with an l2 penalty, bias folded into W's last row."""

    W: np.ndarray  # (d + 1, C)
    ridge_lambda: float = 0.0
    final_loss: float = float("nan")
    epochs_run: int = 0

    kind: ClassVar[str] = "ridge"

    @property
    def num_classes(self) -> int:
        return self.W.shape[1]

    @staticmethod
    def _augment(X: np.ndarray) -> np.ndarray:
        return np.hstack([X, np.ones((X.shape[0], 1))])

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        return self._augment(X) @ self.W

    def per_example_loss(self, X: np.ndarray, y: np.ndarray) -> np.ndarray:
        resid = self.decision_scores(X) - _one_hot(y, self.num_classes)
        return (resid * resid).sum(axis=1)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.decision_scores(X), axis=1)

    def embed(self, X: np.ndarray) -> np.ndarray:
        return self.decision_scores(X)

    def params(self) -> tuple[np.ndarray, ...]:
        return (self.W,)

    def copy(self) -> "RidgeModel":
        return RidgeModel(self.W.copy(), self.ridge_lambda, self.final_loss, self.epochs_run)


TrainedModel = LogisticModel | MLPModel | RidgeModel


def _init_logistic(d: int, C: int, scale: float, rng: np.random.Generator) -> LogisticModel:
    W = rng.standard_normal((d, C)) * (scale / np.sqrt(d))
    return LogisticModel(W, np.zeros(C))


def _init_mlp(d: int, H: int, C: int, scale: float, rng: np.random.Generator) -> MLPModel:
    W1 = rng.standard_normal((d, H)) * (scale / np.sqrt(d))
    W2 = rng.standard_normal((H, H)) * (scale / np.sqrt(H))
    W3 = rng.standard_normal((H, C)) * (scale / np.sqrt(H))
    return MLPModel(W1, np.zeros(H), W2, np.zeros(H), W3, np.zeros(C))


def init_model(dataset: Dataset, cfg: InnerConfig, rng: np.random.Generator) -> TrainedModel:
    """Freshly initialized, untrained model of the configured kind."""
    d, C = dataset.feature_dim, dataset.num_classes
    if cfg.kind == "logistic":
        return _init_logistic(d, C, cfg.init_scale, rng)
    if cfg.kind == "mlp":
        return _init_mlp(d, cfg.hidden, C, cfg.init_scale, rng)
    if cfg.kind == "ridge":
        return RidgeModel(np.zeros((d + 1, C)), cfg.ridge_lambda)
    raise ConfigError(f"unknown learner kind: {cfg.kind!r}")


def empty_model(dataset: Dataset, cfg: InnerConfig, rng: np.random.Generator) -> TrainedModel:
    """Canonical inner argmin for the empty subset.

    The empty training objective is constant for logistic/MLP (any weights
    minimize it; the fresh init is taken) and has the unique minimizer W = 0
    for ridge (the penalty remains). Training loss is exactly 0.
    """
    model = init_model(dataset, cfg, rng)
    model.final_loss = 0.0
    model.epochs_run = 0
    return model


def _fit_ridge(X, y, num_classes, loss_scale, lam) -> RidgeModel:
    Xa = RidgeModel._augment(X)
    E = _one_hot(y, num_classes)
    A = Xa.T @ Xa
    if lam > 0.0:
        A = A + (lam / loss_scale) * np.eye(Xa.shape[1])
        W = np.linalg.solve(A, Xa.T @ E)
    else:
        W = np.linalg.lstsq(Xa, E, rcond=None)[0]
    resid = Xa @ W - E
    loss = loss_scale * float((resid * resid).sum())
    return RidgeModel(W, lam, loss, epochs_run=1)


def fit(
    dataset: Dataset,
    mask: Mask,
    cfg: InnerConfig,
    rng: np.random.Generator,
    *,
    budget: int | None = None,
    init: TrainedModel | None = None,
) -> TrainedModel:
    """Train a model on the masked subset.

    Parameters
    ----------
    budget : optional int
        Divisor for the summed loss. The outer loop passes its budget K so
        the objective matches loss_scale = 1/K regardless of the drawn
        cardinality; standalone fits default to 1/|subset|.
    init : optional model
        Starting point (copied, not mutated) for warm starts. Fresh random
        init otherwise.

    Raises
    ------
    EmptyCoresetError
        If the mask selects nothing.
    """
    cfg.validate()
    if len(mask) != len(dataset):
        raise ConfigError(f"mask length {len(mask)} != dataset size {len(dataset)}")
    if mask.cardinality == 0:
        raise EmptyCoresetError("cannot fit on an empty subset")
    idx = mask.support()
    X = dataset.features[idx]
    y = dataset.labels[idx]
    C = dataset.num_classes
    if y.min() < 0 or y.max() >= C:
        raise DataError("subset contains labels outside [0, num_classes)")
    norm = mask.cardinality if budget is None else int(budget)
    if norm < 1:
        raise ConfigError(f"budget must be >= 1, got {budget}")
    loss_scale = 1.0 / norm
    if init is not None and init.kind != cfg.kind:
        raise ConfigError(f"init model kind {init.kind!r} != configured {cfg.kind!r}")

    if cfg.kind == "ridge":
        return _fit_ridge(X, y, C, loss_scale, cfg.ridge_lambda)

    model = init.copy() if init is not None else init_model(dataset, cfg, rng)
    m = X.shape[0]
    perms = None
    if 0 < cfg.batch_size < m:
        perms = np.stack([rng.permutation(m) for _ in range(cfg.epochs)]).astype(np.int64)
    args = (cfg.step_size, cfg.momentum, cfg.epochs, loss_scale, cfg.batch_size,
            perms, cfg.plateau_tol, cfg.plateau_patience)
    if cfg.kind == "logistic":
        loss, epochs_run = _backend.train_logistic(X, y, model.W, model.b, *args)
    else:
        loss, epochs_run = _backend.train_mlp(
            X, y, model.W1, model.b1, model.W2, model.b2, model.W3, model.b3, *args
        )
    model.final_loss = loss
    model.epochs_run = epochs_run
    return model


def evaluate_loss(model: TrainedModel, features: np.ndarray, labels: np.ndarray) -> float:
    """Mean per-example loss of the model on the given examples."""
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if features.shape[0] == 0:
        raise DataError("cannot evaluate on an empty example set")
    return float(model.per_example_loss(features, labels).mean())


def accuracy(model: TrainedModel, dataset: Dataset) -> float:
    """Fraction of examples whose argmax prediction matches the label."""
    if len(dataset) == 0:
        raise DataError("cannot score an empty dataset")
    return float((model.predict(dataset.features) == dataset.labels).mean())


def loss_and_gradient(model: TrainedModel, features, labels, loss_scale: float):
    """Training objective and its analytic gradient at the model's parameters.

    Returns (loss, grads) with grads ordered like model.params(). For ridge
    the objective includes the l2 penalty; for logistic/MLP it is the scaled
    cross-entropy sum, exactly what the trainers descend.
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if isinstance(model, LogisticModel):
        Z = model.decision_scores(X)
        loss = loss_scale * float(_stable_xent(Z, y).sum())
        D = _softmax(Z)
        D[np.arange(y.shape[0]), y] -= 1.0
        D *= loss_scale
        return loss, (X.T @ D, D.sum(axis=0))
    if isinstance(model, MLPModel):
        H1, H2, Z = model.forward(X)
        loss = loss_scale * float(_stable_xent(Z, y).sum())
        D3 = _softmax(Z)
        D3[np.arange(y.shape[0]), y] -= 1.0
        D3 *= loss_scale
        D2 = (D3 @ model.W3.T) * (H2 > 0.0)
        D1 = (D2 @ model.W2.T) * (H1 > 0.0)
        grads = (X.T @ D1, D1.sum(axis=0), H1.T @ D2, D2.sum(axis=0), H2.T @ D3, D3.sum(axis=0))
        return loss, grads
    if isinstance(model, RidgeModel):
        Xa = RidgeModel._augment(X)
        resid = Xa @ model.W - _one_hot(y, model.num_classes)
        loss = loss_scale * float((resid * resid).sum())
        loss += model.ridge_lambda * float((model.W * model.W).sum())
        grad = 2.0 * loss_scale * (Xa.T @ resid) + 2.0 * model.ridge_lambda * model.W
        return loss, (grad,)
    raise ConfigError(f"unknown model type: {type(model).__name__}")
