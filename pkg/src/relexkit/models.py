"""From-scratch binary classifiers and grid-search model selection.

Four trainers: ridge-regularized logistic regression (full-batch gradient
descent with a step derived from the data's smoothness bound, so the
objective is monotone), a linear SVM (deterministic full-batch subgradient
descent with iterate averaging; the returned model and the recorded trace
follow the incumbent, i.e. the best averaged iterate so far, which is the
standard way to get a monotone guarantee out of a subgradient method), an
RBF-kernel SVM solved in the dual by SMO-style pairwise coordinate ascent,
and a two-layer feed-forward net (hidden width equals the input dimension,
ReLU then softmax) trained by seeded mini-batch SGD.

All arithmetic is float64 and every run is deterministic given (data,
config, seed).
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, IntegrityError, TrainingError

__all__ = [
    "TrainConfig",
    "LinearModel",
    "RbfSvmModel",
    "FnnModel",
    "GridSearchPlan",
    "default_plan",
    "train_logistic",
    "train_linear_svm",
    "train_rbf_svm",
    "train_fnn",
    "grid_search",
    "predict",
    "predict_batch",
    "save_model",
    "load_model",
]


@dataclass(frozen=True)
class TrainConfig:
    max_iters: int = 2000
    tolerance: float = 1e-8
    learning_rate: float | None = None  # None: derived from the data
    kkt_tolerance: float = 1e-3
    seed: int = 0


_DEFAULT = TrainConfig()


def _check_classes(y: np.ndarray) -> None:
    if not (np.any(y == 1) and np.any(y == 0)):
        raise TrainingError("training set must contain both classes")


def _as_xy(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ConfigError("features must be (n, d) with one label per row")
    if not np.all(np.isin(y, (0, 1))):
        raise ConfigError("labels must be 0/1")
    return X, y.astype(np.float64)


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    regularization: float  # lambda for logistic, C for hinge
    loss: str  # "logistic" | "hinge"
    objective_trace: tuple[float, ...] = ()

    def margin(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != self.weights.shape:
            raise ConfigError(
                f"feature dimension {x.shape} does not match model "
                f"{self.weights.shape}")
        return float(self.weights @ x + self.bias)


@dataclass
class RbfSvmModel:
    support_vectors: np.ndarray  # (m, d)
    dual_coef: np.ndarray  # (m,), alpha_i * y_i with |.| <= C
    bias: float
    gamma: float
    C: float
    converged: bool = True
    objective_trace: tuple[float, ...] = ()

    def margin(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.support_vectors.shape[1],):
            raise ConfigError("feature dimension does not match model")
        k = _rbf_vector(self.support_vectors, x, self.gamma)
        return float(self.dual_coef @ k + self.bias)


@dataclass
class FnnModel:
    w1: np.ndarray  # (d, d)
    b1: np.ndarray  # (d,)
    w2: np.ndarray  # (d, 2)
    b2: np.ndarray  # (2,)
    config: dict = field(default_factory=dict)

    def forward(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.w1.shape[0]:
            raise ConfigError("feature dimension does not match model")
        hidden = np.maximum(X @ self.w1 + self.b1, 0.0)
        return _softmax(hidden @ self.w2 + self.b2)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _rbf_vector(points: np.ndarray, x: np.ndarray, gamma: float) -> np.ndarray:
    d2 = np.sum((points - x) ** 2, axis=1)
    return np.exp(-gamma * d2)


def _rbf_kernel(X: np.ndarray, gamma: float) -> np.ndarray:
    sq = np.sum(X ** 2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(d2, 0.0, out=d2)
    return np.exp(-gamma * d2)


# --------------------------------------------------------------------------
# Logistic regression with ridge penalty
# --------------------------------------------------------------------------

def logistic_objective(X, y, w, b, lam) -> float:
    z = X @ w + b
    # mean of log(1 + exp(-s*z)) written stably via logaddexp
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    return loss + 0.5 * lam * float(w @ w)


def logistic_gradient(X, y, w, b, lam) -> tuple[np.ndarray, float]:
    n = X.shape[0]
    p = _sigmoid(X @ w + b)
    gw = X.T @ (p - y) / n + lam * w
    gb = float(np.mean(p - y))
    return gw, gb


def train_logistic(X, y, lam: float, config: TrainConfig | None = None) -> LinearModel:
    """Minimize mean logistic loss + (lam/2)||w||^2 by full-batch descent.

    The step is 1/L with L an upper bound on the gradient's Lipschitz
    constant (spectral norm of the biased design matrix), so the objective
    never increases. The bias is not penalized.
    """
    if lam < 0:
        raise ConfigError("lambda must be >= 0")
    config = config or _DEFAULT
    X, y = _as_xy(X, y)
    _check_classes(y)
    n, d = X.shape
    if config.learning_rate is not None:
        step = config.learning_rate
    else:
        design = np.hstack([X, np.ones((n, 1))])
        smax = np.linalg.norm(design, 2)
        step = 1.0 / (smax * smax / (4.0 * n) + lam + 1e-12)
    w = np.zeros(d)
    b = 0.0
    trace = []
    for _ in range(config.max_iters):
        trace.append(logistic_objective(X, y, w, b, lam))
        gw, gb = logistic_gradient(X, y, w, b, lam)
        gnorm = float(np.sqrt(gw @ gw + gb * gb))
        if gnorm < config.tolerance:
            break
        w = w - step * gw
        b = b - step * gb
    return LinearModel(weights=w, bias=b, regularization=lam,
                       loss="logistic", objective_trace=tuple(trace))


# --------------------------------------------------------------------------
# Linear SVM
# --------------------------------------------------------------------------

def hinge_objective(X, s, w, b, C) -> float:
    margins = s * (X @ w + b)
    return 0.5 * float(w @ w) + C * float(np.sum(np.maximum(0.0, 1.0 - margins)))


def train_linear_svm(X, y, C: float, config: TrainConfig | None = None) -> LinearModel:
    """Minimize (1/2)||w||^2 + C * sum hinge by subgradient descent.

    Full-batch deterministic steps on the equivalently scaled objective
    (lam/2)||w||^2 + mean hinge with lam = 1/(C*n), 1/(lam*t) step sizes,
    and projection onto the ||w|| <= 1/sqrt(lam) ball. The averaged iterate
    is evaluated each step and the best one seen is kept; the recorded
    trace is that incumbent's objective, non-increasing by construction.
    """
    if C <= 0:
        raise ConfigError("C must be positive")
    config = config or _DEFAULT
    X, y = _as_xy(X, y)
    _check_classes(y)
    s = 2.0 * y - 1.0
    n, d = X.shape
    lam = 1.0 / (C * n)
    radius = 1.0 / np.sqrt(lam)

    w = np.zeros(d)
    b = 0.0
    sum_w = np.zeros(d)
    sum_b = 0.0
    best_w = np.zeros(d)
    best_b = 0.0
    best_obj = hinge_objective(X, s, best_w, best_b, C)
    trace = []
    for t in range(1, config.max_iters + 1):
        margins = s * (X @ w + b)
        viol = margins < 1.0
        gw = lam * w - (X[viol].T @ s[viol]) / n
        gb = -float(np.sum(s[viol])) / n
        eta = 1.0 / (lam * (t + 1))
        w = w - eta * gw
        b = b - eta * gb
        norm = float(np.linalg.norm(w))
        if norm > radius:
            w = w * (radius / norm)
        sum_w += w
        sum_b += b
        avg_w = sum_w / t
        avg_b = sum_b / t
        obj = hinge_objective(X, s, avg_w, avg_b, C)
        if obj < best_obj:
            best_obj = obj
            best_w = avg_w.copy()
            best_b = avg_b
        trace.append(best_obj)
    return LinearModel(weights=best_w, bias=best_b, regularization=C,
                       loss="hinge", objective_trace=tuple(trace))


# --------------------------------------------------------------------------
# RBF-kernel SVM via SMO
# --------------------------------------------------------------------------

def dual_objective(alpha: np.ndarray, s: np.ndarray, K: np.ndarray) -> float:
    az = alpha * s
    return float(np.sum(alpha) - 0.5 * az @ K @ az)


def train_rbf_svm(X, y, C: float, gamma: float,
                  config: TrainConfig | None = None) -> RbfSvmModel:
    """Solve the kernel dual by deterministic pairwise coordinate ascent.

    Each accepted pair update solves its two-variable subproblem exactly, so
    the dual objective never decreases. Stops when a full pass finds no KKT
    violation beyond the tolerance; if the iteration cap is hit first, the
    best-so-far model is returned with a warning.
    """
    if C <= 0 or gamma <= 0:
        raise ConfigError("C and gamma must be positive")
    config = config or _DEFAULT
    X, y = _as_xy(X, y)
    _check_classes(y)
    s = 2.0 * y - 1.0
    n = X.shape[0]
    K = _rbf_kernel(X, gamma)
    tol = config.kkt_tolerance

    alpha = np.zeros(n)
    b = 0.0
    errors = K @ (alpha * s) + b - s  # f(x_i) - y_i
    trace = [dual_objective(alpha, s, K)]
    converged = False
    max_passes = max(config.max_iters // 10, 50)

    def take_step(i: int, j: int) -> bool:
        nonlocal b, errors
        if i == j:
            return False
        ai_old, aj_old = alpha[i], alpha[j]
        if s[i] != s[j]:
            low = max(0.0, aj_old - ai_old)
            high = min(C, C + aj_old - ai_old)
        else:
            low = max(0.0, ai_old + aj_old - C)
            high = min(C, ai_old + aj_old)
        if low >= high:
            return False
        eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
        if eta >= 0.0:
            return False
        aj = aj_old - s[j] * (errors[i] - errors[j]) / eta
        aj = min(max(aj, low), high)
        if abs(aj - aj_old) < 1e-12 * (aj + aj_old + 1e-12):
            return False
        ai = ai_old + s[i] * s[j] * (aj_old - aj)
        di = s[i] * (ai - ai_old)
        dj = s[j] * (aj - aj_old)
        b1 = b - errors[i] - di * K[i, i] - dj * K[i, j]
        b2 = b - errors[j] - di * K[i, j] - dj * K[j, j]
        if 0.0 < ai < C:
            new_b = b1
        elif 0.0 < aj < C:
            new_b = b2
        else:
            new_b = 0.5 * (b1 + b2)
        errors += di * K[:, i] + dj * K[:, j] + (new_b - b)
        alpha[i] = ai
        alpha[j] = aj
        b = new_b
        return True

    for _ in range(max_passes):
        changed = 0
        for i in range(n):
            r = errors[i] * s[i]
            if (r < -tol and alpha[i] < C) or (r > tol and alpha[i] > 0):
                # second-choice heuristic: largest |E_i - E_j|, ties by index
                gaps = np.abs(errors[i] - errors)
                gaps[i] = -1.0
                j = int(np.argmax(gaps))
                if take_step(i, j):
                    changed += 1
                    continue
                for j in range(n):
                    if take_step(i, j):
                        changed += 1
                        break
        trace.append(dual_objective(alpha, s, K))
        if changed == 0:
            converged = True
            break
    if not converged:
        warnings.warn("SMO hit the iteration cap before meeting the KKT "
                      "tolerance; returning the best model so far")

    mask = alpha > 1e-12
    return RbfSvmModel(
        support_vectors=X[mask].copy(),
        dual_coef=(alpha * s)[mask].copy(),
        bias=b,
        gamma=gamma,
        C=C,
        converged=converged,
        objective_trace=tuple(trace),
    )


# --------------------------------------------------------------------------
# Feed-forward network
# --------------------------------------------------------------------------

def fnn_loss_and_grads(model: FnnModel, X: np.ndarray, y: np.ndarray):
    """Mean cross-entropy and gradients for every parameter."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    pre = X @ model.w1 + model.b1
    hidden = np.maximum(pre, 0.0)
    probs = _softmax(hidden @ model.w2 + model.b2)
    onehot = np.zeros_like(probs)
    onehot[np.arange(n), y.astype(int)] = 1.0
    loss = float(-np.mean(np.log(probs[np.arange(n), y.astype(int)] + 1e-300)))
    dlogits = (probs - onehot) / n
    gw2 = hidden.T @ dlogits
    gb2 = dlogits.sum(axis=0)
    dhidden = dlogits @ model.w2.T
    dpre = dhidden * (pre > 0.0)
    gw1 = X.T @ dpre
    gb1 = dpre.sum(axis=0)
    return loss, (gw1, gb1, gw2, gb2)


def train_fnn(X, y, epochs: int, batch_size: int = 32,
              learning_rate: float = 0.01, seed: int = 0) -> FnnModel:
    """Mini-batch SGD on softmax cross-entropy; deterministic per seed.

    Hidden width equals the input dimension; weights start uniform scaled by
    fan-in, biases at zero. epochs=0 returns the initialization.
    """
    if epochs < 0 or batch_size <= 0:
        raise ConfigError("epochs must be >= 0 and batch_size positive")
    X, y = _as_xy(X, y)
    _check_classes(y)
    n, d = X.shape
    rng = np.random.default_rng(seed)
    bound1 = 1.0 / np.sqrt(d)
    model = FnnModel(
        w1=rng.uniform(-bound1, bound1, size=(d, d)),
        b1=np.zeros(d),
        w2=rng.uniform(-bound1, bound1, size=(d, 2)),
        b2=np.zeros(2),
        config={"epochs": epochs, "batch_size": batch_size,
                "learning_rate": learning_rate, "seed": seed},
    )
    for epoch in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            batch = order[start:start + batch_size]
            loss, (gw1, gb1, gw2, gb2) = fnn_loss_and_grads(
                model, X[batch], y[batch])
            if not np.isfinite(loss):
                raise TrainingError(
                    f"non-finite loss at epoch {epoch}, batch offset {start}")
            model.w1 -= learning_rate * gw1
            model.b1 -= learning_rate * gb1
            model.w2 -= learning_rate * gw2
            model.b2 -= learning_rate * gb2
    return model


# --------------------------------------------------------------------------
# Prediction and selection
# --------------------------------------------------------------------------

def predict(model, x) -> tuple[int, float]:
    """(label, score); score is a margin for SVMs and a positive-class
    probability for logistic regression and the network. Labels use a strict
    threshold (margin > 0, probability > 0.5), so an exactly neutral score
    predicts negative."""
    if isinstance(model, LinearModel):
        m = model.margin(np.asarray(x, dtype=np.float64))
        if model.loss == "logistic":
            p = float(_sigmoid(np.array([m]))[0])
            return (1 if p > 0.5 else 0), p
        return (1 if m > 0.0 else 0), m
    if isinstance(model, RbfSvmModel):
        m = model.margin(np.asarray(x, dtype=np.float64))
        return (1 if m > 0.0 else 0), m
    if isinstance(model, FnnModel):
        p = float(model.forward(np.asarray(x, dtype=np.float64))[0, 1])
        return (1 if p > 0.5 else 0), p
    raise ConfigError(f"unknown model type {type(model).__name__}")


def predict_batch(model, X) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=np.float64)
    labels = np.zeros(X.shape[0], dtype=int)
    scores = np.zeros(X.shape[0], dtype=np.float64)
    for i in range(X.shape[0]):
        labels[i], scores[i] = predict(model, X[i])
    return labels, scores


def _binary_f1(pred: np.ndarray, gold: np.ndarray) -> float:
    tp = int(np.sum((pred == 1) & (gold == 1)))
    fp = int(np.sum((pred == 1) & (gold == 0)))
    fn = int(np.sum((pred == 0) & (gold == 1)))
    denom = 2 * tp + fp + fn
    return (2.0 * tp / denom) if denom else 0.0


@dataclass(frozen=True)
class GridSearchPlan:
    model_kind: str  # logistic | linear_svm | rbf_svm | fnn
    grid: tuple[Mapping[str, object], ...]

    def __post_init__(self):
        if not self.grid:
            raise ConfigError("hyperparameter grid must be nonempty")


def default_plan(model_kind: str, dimension: int) -> GridSearchPlan:
    """Built-in grids; the paper pins only the epoch list and batch size."""
    if model_kind == "logistic":
        grid = tuple({"lam": lam} for lam in (0.001, 0.01, 0.1, 1.0))
    elif model_kind == "linear_svm":
        grid = tuple({"C": C} for C in (0.1, 1.0, 10.0))
    elif model_kind == "rbf_svm":
        grid = tuple({"C": C, "gamma": g}
                     for C in (0.1, 1.0, 10.0)
                     for g in (0.01, 0.1, 1.0 / max(dimension, 1)))
    elif model_kind == "fnn":
        grid = tuple({"learning_rate": lr, "epochs": e}
                     for lr in (0.01, 0.001)
                     for e in (2, 10, 100, 500))
    else:
        raise ConfigError(f"unknown model kind {model_kind!r}")
    return GridSearchPlan(model_kind=model_kind, grid=grid)


def train_model(model_kind: str, X, y, params: Mapping[str, object],
                config: TrainConfig | None = None, seed: int = 0):
    params = dict(params)
    if model_kind == "logistic":
        return train_logistic(X, y, lam=float(params.get("lam", 0.01)),
                              config=config)
    if model_kind == "linear_svm":
        return train_linear_svm(X, y, C=float(params.get("C", 1.0)),
                                config=config)
    if model_kind == "rbf_svm":
        return train_rbf_svm(X, y, C=float(params.get("C", 1.0)),
                             gamma=float(params.get("gamma", 0.1)),
                             config=config)
    if model_kind == "fnn":
        return train_fnn(
            X, y,
            epochs=int(params.get("epochs", 10)),
            batch_size=int(params.get("batch_size", 32)),
            learning_rate=float(params.get("learning_rate", 0.01)),
            seed=int(params.get("seed", seed)))
    raise ConfigError(f"unknown model kind {model_kind!r}")


def grid_search(plan: GridSearchPlan, X_train, y_train, X_dev, y_dev,
                config: TrainConfig | None = None, seed: int = 0):
    """Train one model per grid point; return the best by dev F1 plus the
    full trace. Ties break toward the earlier grid point."""
    best = None
    best_f1 = -1.0
    trace = []
    X_dev = np.asarray(X_dev, dtype=np.float64)
    y_dev = np.asarray(y_dev, dtype=int)
    for params in plan.grid:
        row = {"params": dict(params)}
        try:
            model = train_model(plan.model_kind, X_train, y_train, params,
                                config=config, seed=seed)
        except TrainingError as err:
            row["error"] = str(err)
            trace.append(row)
            continue
        pred, _ = predict_batch(model, X_dev)
        f1 = _binary_f1(pred, y_dev)
        row["dev_f1"] = f1
        trace.append(row)
        if f1 > best_f1:
            best_f1 = f1
            best = model
    if best is None:
        raise TrainingError("every grid point failed to train")
    return best, trace


# --------------------------------------------------------------------------
# Serialization
# --------------------------------------------------------------------------

_MODEL_FORMAT = "relexkit-model"
_MODEL_VERSION = 1


def save_model(model, path: str | Path, space_hash: str = "",
               extra: Mapping[str, object] | None = None) -> None:
    if isinstance(model, LinearModel):
        kind = "logistic" if model.loss == "logistic" else "linear_svm"
        payload = {
            "kind": kind,
            "hyperparameters": {"regularization": model.regularization},
            "parameters": {
                "weights": model.weights.tolist(),
                "bias": model.bias,
            },
        }
    elif isinstance(model, RbfSvmModel):
        payload = {
            "kind": "rbf_svm",
            "hyperparameters": {"C": model.C, "gamma": model.gamma},
            "parameters": {
                "support_vectors": model.support_vectors.tolist(),
                "dual_coef": model.dual_coef.tolist(),
                "bias": model.bias,
            },
        }
    elif isinstance(model, FnnModel):
        payload = {
            "kind": "fnn",
            "hyperparameters": dict(model.config),
            "parameters": {
                "w1": model.w1.tolist(), "b1": model.b1.tolist(),
                "w2": model.w2.tolist(), "b2": model.b2.tolist(),
            },
        }
    else:
        raise ConfigError(f"cannot serialize {type(model).__name__}")
    payload["format"] = _MODEL_FORMAT
    payload["version"] = _MODEL_VERSION
    payload["space_hash"] = space_hash
    if extra:
        payload["extra"] = dict(sorted(extra.items()))
    Path(path).write_text(json.dumps(payload, sort_keys=True) + "\n", "utf-8")


def load_model(path: str | Path):
    data = json.loads(Path(path).read_text("utf-8"))
    if data.get("format") != _MODEL_FORMAT or data.get("version") != _MODEL_VERSION:
        raise IntegrityError(f"{path}: not a version-{_MODEL_VERSION} model file")
    kind = data["kind"]
    params = data["parameters"]
    if kind in ("logistic", "linear_svm"):
        model = LinearModel(
            weights=np.asarray(params["weights"], dtype=np.float64),
            bias=float(params["bias"]),
            regularization=float(data["hyperparameters"]["regularization"]),
            loss="logistic" if kind == "logistic" else "hinge")
    elif kind == "rbf_svm":
        model = RbfSvmModel(
            support_vectors=np.asarray(params["support_vectors"], dtype=np.float64),
            dual_coef=np.asarray(params["dual_coef"], dtype=np.float64),
            bias=float(params["bias"]),
            gamma=float(data["hyperparameters"]["gamma"]),
            C=float(data["hyperparameters"]["C"]))
    elif kind == "fnn":
        model = FnnModel(
            w1=np.asarray(params["w1"], dtype=np.float64),
            b1=np.asarray(params["b1"], dtype=np.float64),
            w2=np.asarray(params["w2"], dtype=np.float64),
            b2=np.asarray(params["b2"], dtype=np.float64),
            config=dict(data["hyperparameters"]))
    else:
        raise IntegrityError(f"{path}: unknown model kind {kind!r}")
    return model, data
