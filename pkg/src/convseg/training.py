"""Training loop for the linear boundary classifier.

Mini-batch gradient descent on mean cross-entropy (plus optional L2 and
positive-class weighting), with per-epoch seeded shuffling and checkpoint
selection by validation F1.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import TrainingError
from .segmenters import FEATURE_NAMES, ClassifierModel, feature_matrix, sigmoid

EPSILON = 1e-12


@dataclass
class TrainConfig:
    epochs: int = 20
    batch_size: int = 16
    learning_rate: float = 1e-2
    seed: int = 0
    l2: float = 0.0
    momentum: float = 0.0
    pos_weight: float = 1.0
    decision_threshold: float = 0.5

    def __post_init__(self):
        if self.epochs < 1:
            raise TrainingError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise TrainingError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate < 0:
            raise TrainingError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.l2 < 0:
            raise TrainingError(f"l2 must be >= 0, got {self.l2}")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_precision: float
    val_recall: float
    val_f1: float


@dataclass
class TrainReport:
    epochs: list = field(default_factory=list)
    best_epoch: int = 0
    model: ClassifierModel = None

    def to_dict(self):
        return {
            "best_epoch": self.best_epoch,
            "train_loss": [e.train_loss for e in self.epochs],
            "val_precision": [e.val_precision for e in self.epochs],
            "val_recall": [e.val_recall for e in self.epochs],
            "val_f1": [e.val_f1 for e in self.epochs],
        }


def cross_entropy(y, y_hat):
    """Binary cross-entropy with the prediction clamped to [eps, 1 - eps]."""
    y_hat = np.clip(y_hat, EPSILON, 1.0 - EPSILON)
    return -(y * np.log(y_hat) + (1.0 - y) * np.log(1.0 - y_hat))


def cross_entropy_grad(y, y_hat):
    """d(cross_entropy)/d(y_hat)."""
    y_hat = np.clip(y_hat, EPSILON, 1.0 - EPSILON)
    return -(y / y_hat) + (1.0 - y) / (1.0 - y_hat)


def binary_prf(y_true, y_pred):
    """Precision/recall/F1 of the positive class over binary label arrays."""
    y_true = np.asarray(y_true, dtype=bool)
    y_pred = np.asarray(y_pred, dtype=bool)
    tp = int(np.sum(y_true & y_pred))
    n_pred = int(np.sum(y_pred))
    n_true = int(np.sum(y_true))
    if n_pred == 0:
        precision = 1.0 if n_true == 0 else 0.0
    else:
        precision = tp / n_pred
    if n_true == 0:
        recall = 1.0 if n_pred == 0 else 0.0
    else:
        recall = tp / n_true
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
    return precision, recall, f1


def batch_loss(weights, bias, X, y, l2=0.0, pos_weight=1.0):
    p = sigmoid(X @ weights + bias)
    sample_w = np.where(y == 1, pos_weight, 1.0)
    return float(np.mean(sample_w * cross_entropy(y, p)) + l2 * np.sum(weights**2))


def batch_gradient(weights, bias, X, y, l2=0.0, pos_weight=1.0):
    """Analytic gradient of batch_loss w.r.t. (weights, bias)."""
    p = sigmoid(X @ weights + bias)
    sample_w = np.where(y == 1, pos_weight, 1.0)
    residual = sample_w * (p - y) / len(y)
    grad_w = X.T @ residual + 2.0 * l2 * weights
    grad_b = float(np.sum(residual))
    return grad_w, grad_b


def train(X_train, y_train, X_val, y_val, config=None, feature_names=None):
    """Fit the classifier and return the best checkpoint by validation F1.

    Ties in validation F1 go to the earliest epoch. Raises on single-class
    training data or a NaN loss (reported with the epoch index).
    """
    config = config or TrainConfig()
    X_train = np.asarray(X_train, dtype=float)
    y_train = np.asarray(y_train, dtype=float)
    X_val = np.asarray(X_val, dtype=float)
    y_val = np.asarray(y_val, dtype=float)
    if len(X_train) == 0:
        raise TrainingError("empty training set")
    if len(set(y_train.tolist())) < 2:
        raise TrainingError("training data contains a single class")

    n, dim = X_train.shape
    weights = np.zeros(dim)
    bias = 0.0
    velocity_w = np.zeros(dim)
    velocity_b = 0.0
    rng = np.random.default_rng(config.seed)

    report = TrainReport()
    best_f1 = -1.0
    best = (weights.copy(), bias, 0)

    for epoch in range(config.epochs):
        order = rng.permutation(n)
        total_loss = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            Xb, yb = X_train[idx], y_train[idx]
            loss = batch_loss(weights, bias, Xb, yb, config.l2, config.pos_weight)
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss at epoch {epoch}")
            total_loss += loss * len(idx)
            grad_w, grad_b = batch_gradient(
                weights, bias, Xb, yb, config.l2, config.pos_weight
            )
            if config.momentum > 0:
                velocity_w = config.momentum * velocity_w - config.learning_rate * grad_w
                velocity_b = config.momentum * velocity_b - config.learning_rate * grad_b
                weights = weights + velocity_w
                bias = bias + velocity_b
            else:
                weights = weights - config.learning_rate * grad_w
                bias = bias - config.learning_rate * grad_b

        val_pred = sigmoid(X_val @ weights + bias) > config.decision_threshold
        precision, recall, f1 = binary_prf(y_val, val_pred)
        report.epochs.append(
            EpochRecord(
                epoch=epoch,
                train_loss=total_loss / n,
                val_precision=precision,
                val_recall=recall,
                val_f1=f1,
            )
        )
        if f1 > best_f1:
            best_f1 = f1
            best = (weights.copy(), bias, epoch)

    best_w, best_b, best_epoch = best
    report.best_epoch = best_epoch
    report.model = ClassifierModel(
        feature_names=list(feature_names or FEATURE_NAMES),
        weights=best_w,
        bias=best_b,
        decision_threshold=config.decision_threshold,
        seed=config.seed,
    )
    return report


def boundary_dataset(docs, lexicon=None):
    """Feature matrix and break labels over every candidate of a doc list."""
    mats, labels = [], []
    for doc in docs:
        if not doc.candidates:
            continue
        mats.append(feature_matrix(doc, lexicon))
        gold = set(doc.step_offsets)
        labels.append(np.array([1.0 if c in gold else 0.0 for c in doc.candidates]))
    if not mats:
        return np.zeros((0, len(FEATURE_NAMES))), np.zeros(0)
    return np.concatenate(mats), np.concatenate(labels)


def train_on_documents(train_docs, validation_docs, config=None, lexicon=None):
    X_train, y_train = boundary_dataset(train_docs, lexicon)
    X_val, y_val = boundary_dataset(validation_docs, lexicon)
    report = train(X_train, y_train, X_val, y_val, config=config)
    report.model.trained_on = f"{len(train_docs)} documents"
    return report


def save_model(model, path):
    payload = {
        "feature_names": list(model.feature_names),
        "weights": [float(w) for w in model.weights],
        "bias": float(model.bias),
        "threshold": float(model.decision_threshold),
        "seed": int(model.seed),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    return ClassifierModel(
        feature_names=list(payload["feature_names"]),
        weights=np.asarray(payload["weights"], dtype=float),
        bias=float(payload["bias"]),
        decision_threshold=float(payload["threshold"]),
        seed=int(payload.get("seed", 0)),
    )
