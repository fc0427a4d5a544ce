"""MLP driving-style classifier and the estimator that feeds the observation's style channel."""
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from app.inference.dataset import StyleDataset, vehicle_features
from app.rl.checkpoint import load_checkpoint, save_checkpoint
from app.rl.mlp import MomentumSGD, Mlp, softmax_nll_loss
from app.utils.logger import logger

COOPERATIVE = 1
UNKNOWN_PROBABILITY = 0.5


class StyleClassifier:
    """Normalised features -> softmax over (aggressive, cooperative)"""

    def __init__(self, mlp: Mlp, mean, std, window=10):
        self.mlp = mlp
        self.mean = np.asarray(mean, dtype=float)
        self.std = np.asarray(std, dtype=float)
        self.window = window

    @classmethod
    def create(cls, n_features, hidden=(64, 64), rng=None, window=10):
        mlp = Mlp([n_features, *hidden, 2], output="softmax", rng=rng)
        return cls(mlp, np.zeros(n_features), np.ones(n_features), window)

    def fit_normalisation(self, features):
        self.mean = features.mean(axis=0).astype(float)
        self.std = np.maximum(features.std(axis=0).astype(float), 1e-6)

    def normalise(self, features):
        return (np.asarray(features, dtype=float) - self.mean) / self.std

    def predict_proba(self, features):
        features = np.atleast_2d(features)
        return self.mlp.predict(self.normalise(features))

    def accuracy(self, features, labels):
        if len(labels) == 0:
            return float("nan")
        return float(np.mean(self.predict_proba(features).argmax(axis=1) == labels))

    def to_arrays(self, prefix="style"):
        arrays = self.mlp.to_arrays(f"{prefix}.mlp")
        arrays[f"{prefix}.mean"] = self.mean
        arrays[f"{prefix}.std"] = self.std
        arrays[f"{prefix}.window"] = np.array(self.window)
        return arrays

    @classmethod
    def from_arrays(cls, arrays, prefix="style"):
        return cls(Mlp.from_arrays(arrays, f"{prefix}.mlp"), arrays[f"{prefix}.mean"], arrays[f"{prefix}.std"],
                   int(arrays[f"{prefix}.window"]))

    def save(self, path):
        return save_checkpoint(path, self.to_arrays(), {"kind": "style_classifier", "window": self.window})

    @classmethod
    def load(cls, path):
        arrays, meta = load_checkpoint(path)
        if meta.get("kind") != "style_classifier":
            raise ValueError(f"{path} does not hold a style classifier")
        return cls.from_arrays(arrays)


@dataclass
class TrainingResult:
    classifier: StyleClassifier
    history: pd.DataFrame
    test_accuracy: float
    best_epoch: int = 0
    extra: dict = field(default_factory=dict)


def _mean_loss(classifier, features, labels):
    if len(labels) == 0:
        return float("nan")
    probs = classifier.mlp.predict(classifier.normalise(features))
    return softmax_nll_loss(probs, labels)[0]


def train_classifier(dataset: StyleDataset, epochs=200, lr=0.01, batch_size=256, patience=20, hidden=(64, 64),
                     momentum=0.9, seed=0):
    """Mini-batch NLL minimisation with early stopping on the validation loss

    Args:
        dataset (StyleDataset): Samples with train/val/test splits
        epochs (int): Maximum passes over the training split
        lr (float): Learning rate
        patience (int): Epochs without validation improvement before stopping

    Returns:
        TrainingResult: Classifier restored to its best-validation weights, per-epoch losses and
        test accuracy
    """
    x_train, y_train = dataset.split("train")
    if len(y_train) == 0:
        logger.error("train_classifier called without training samples")
        raise ValueError("Training split is empty")
    x_val, y_val = dataset.split("val")
    x_test, y_test = dataset.split("test")

    rng = np.random.default_rng(seed)
    classifier = StyleClassifier.create(x_train.shape[1], hidden, rng, dataset.window)
    classifier.fit_normalisation(x_train)
    optimizer = MomentumSGD(classifier.mlp.params, lr, momentum)
    x_norm = classifier.normalise(x_train)
    monitor = (x_val, y_val) if len(y_val) else (x_train, y_train)

    rows = []
    best_loss, best_epoch, best_params = np.inf, 0, [p.copy() for p in classifier.mlp.params]
    for epoch in range(1, epochs + 1):
        order = rng.permutation(len(y_train))
        batch_losses = []
        for start in range(0, len(order), batch_size):
            idx = order[start:start + batch_size]
            loss, grads = classifier.mlp.gradient(x_norm[idx], softmax_nll_loss, y_train[idx])
            if not np.isfinite(loss):
                logger.error(f"Style classifier loss diverged at epoch {epoch}")
                raise FloatingPointError(f"Classifier loss is {loss} at epoch {epoch}")
            optimizer.step(grads)
            batch_losses.append(loss * len(idx))
        train_loss = float(np.sum(batch_losses) / len(y_train))
        val_loss = _mean_loss(classifier, *monitor)
        rows.append((epoch, train_loss, val_loss))

        if val_loss < best_loss - 1e-9:
            best_loss, best_epoch = val_loss, epoch
            best_params = [p.copy() for p in classifier.mlp.params]
        elif epoch - best_epoch >= patience:
            logger.info(f"Early stopping at epoch {epoch} (best {best_epoch}, val loss {best_loss:.4f})")
            break

    for param, best in zip(classifier.mlp.params, best_params):
        param[...] = best
    history = pd.DataFrame(rows, columns=["epoch", "train_loss", "val_loss"])
    test_accuracy = classifier.accuracy(x_test, y_test) if len(y_test) else classifier.accuracy(x_train, y_train)
    logger.info(f"Style classifier trained for {len(rows)} epochs, test accuracy {test_accuracy:.4f}")
    return TrainingResult(classifier, history, test_accuracy, best_epoch)


class StyleEstimator:
    """Binds a classifier to world histories: ``estimator(world, ids) -> {id: P(cooperative)}``"""

    def __init__(self, classifier: StyleClassifier):
        self.classifier = classifier
        self.window = classifier.window

    def __call__(self, world, vehicle_ids):
        ids, rows = [], []
        for vid in vehicle_ids:
            features = vehicle_features(world, vid, self.window)
            if features is not None:
                ids.append(vid)
                rows.append(features)
        if not rows:
            return {}
        probs = self.classifier.predict_proba(np.array(rows))
        return {vid: float(p) for vid, p in zip(ids, probs[:, COOPERATIVE])}


def predict_styles(classifier: StyleClassifier, obs, world):
    """P(cooperative) for every occupied slot of an observation

    Vehicles without a full history window get the unknown probability 0.5.
    """
    ids = [vid for *_, vid in obs.slot_ids()]
    if not ids:
        return {}
    estimates = StyleEstimator(classifier)(world, ids)
    return {vid: estimates.get(vid, UNKNOWN_PROBABILITY) for vid in ids}
