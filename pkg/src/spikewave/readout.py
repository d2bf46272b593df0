"""Linear readout: multinomial logistic regression by full-batch gradient descent."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


@dataclass
class LinearClassifier:
    W: np.ndarray  # (n_classes, n_features)
    b: np.ndarray  # (n_classes,)
    classes: np.ndarray
    feat_mean: np.ndarray
    feat_scale: np.ndarray

    def _transform(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.feat_mean) / self.feat_scale

    def decision(self, X: np.ndarray) -> np.ndarray:
        return self._transform(X) @ self.W.T + self.b

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.classes[np.argmax(self.decision(X), axis=1)]

    def save(self, path):
        obj = {
            "W": self.W.tolist(),
            "b": self.b.tolist(),
            "classes": self.classes.tolist(),
            "feat_mean": self.feat_mean.tolist(),
            "feat_scale": self.feat_scale.tolist(),
        }
        with open(path, "w") as fh:
            json.dump(obj, fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "LinearClassifier":
        with open(path) as fh:
            obj = json.load(fh)
        return cls(
            W=np.array(obj["W"], dtype=np.float64),
            b=np.array(obj["b"], dtype=np.float64),
            classes=np.array(obj["classes"]),
            feat_mean=np.array(obj["feat_mean"], dtype=np.float64),
            feat_scale=np.array(obj["feat_scale"], dtype=np.float64),
        )


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def train_readout(
    features: np.ndarray,
    labels: np.ndarray,
    l2: float = 1e-4,
    epochs: int = 300,
    lr: float = 0.5,
    standardize: bool = True,
) -> LinearClassifier:
    """Fit softmax regression with L2 penalty by deterministic full-batch GD.

    Weights start at zero, so the fit is a pure function of its inputs.
    Standardization (an affine feature rescale, folded into the model) keeps
    the fixed learning rate well-conditioned across feature scales.
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError(f"feature matrix {X.shape} does not match {y.shape[0]} labels")
    classes = np.unique(y)
    if classes.size < 2:
        raise ValueError("training set must contain at least two classes")
    if standardize:
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0] = 1.0
    else:
        mean = np.zeros(X.shape[1])
        scale = np.ones(X.shape[1])
    Xs = (X - mean) / scale

    n, d = Xs.shape
    k = classes.size
    onehot = (y[:, None] == classes[None, :]).astype(np.float64)
    W = np.zeros((k, d))
    b = np.zeros(k)
    for _ in range(epochs):
        P = _softmax(Xs @ W.T + b)
        G = (P - onehot) / n  # (n, k)
        W -= lr * (G.T @ Xs + l2 * W)
        b -= lr * G.sum(axis=0)
    return LinearClassifier(W=W, b=b, classes=classes, feat_mean=mean, feat_scale=scale)


def evaluate(classifier: LinearClassifier, features: np.ndarray, labels: np.ndarray) -> float:
    """Fraction of correctly classified rows."""
    pred = classifier.predict(features)
    return float(np.mean(pred == np.asarray(labels)))
