"""Seeded mini-batch training of the forecaster with the Adam optimizer.

Batches are formed by a seeded shuffle each epoch; the last partial batch
is used as-is with its actual size. All arithmetic runs in a fixed order,
so a given seed and sample list reproduces bit-identical parameters and
loss traces on one machine.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .epidata import Sample
from .losses import DensityHistogram, density_weights, mse_weights
from .lstm import HORIZON, LstmModel, backward_batch, forward_batch, init_model

STANDARD_MSE = "standard_mse"
ADAPTIVE = "adaptive"

MODEL_FORMAT = "epicast-lstm-v1"


class TrainingDiverged(RuntimeError):
    """Raised when a non-finite loss appears; names the epoch and batch."""


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_epsilon: float = 1e-8
    batch_size: int = 32
    epochs: int = 500
    loss_kind: str = STANDARD_MSE
    hidden_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ValueError("beta1 and beta2 must lie in (0, 1)")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.loss_kind not in (STANDARD_MSE, ADAPTIVE):
            raise ValueError(f"unknown loss kind {self.loss_kind!r}")


class AdamState:
    """First/second moment accumulators for one named parameter set."""

    def __init__(self, model: LstmModel):
        self.m = {name: np.zeros_like(p) for name, p in model.parameters()}
        self.v = {name: np.zeros_like(p) for name, p in model.parameters()}
        self.t = 0

    def step(self, model: LstmModel, grads: dict[str, np.ndarray], config: TrainConfig):
        self.t += 1
        b1, b2 = config.beta1, config.beta2
        for name, param in model.parameters():
            g = grads[name]
            self.m[name] = b1 * self.m[name] + (1.0 - b1) * g
            self.v[name] = b2 * self.v[name] + (1.0 - b2) * g**2
            m_hat = self.m[name] / (1.0 - b1**self.t)
            v_hat = self.v[name] / (1.0 - b2**self.t)
            param -= config.learning_rate * m_hat / (np.sqrt(v_hat) + config.adam_epsilon)


def train(samples: list[Sample], config: TrainConfig,
          density: DensityHistogram | None = None) -> tuple[LstmModel, list[float]]:
    """Fit a model to the samples; returns (model, per-epoch loss trace).

    The adaptive loss needs the ``density`` histogram built from the
    training targets; per-element weights are constants with respect to
    the predictions, so the gradient is the weighted-MSE gradient.
    """
    if not samples:
        raise ValueError("no training samples")
    if config.loss_kind == ADAPTIVE and density is None:
        raise ValueError("adaptive loss requires a density histogram")

    x_all = np.stack([np.asarray(s.input_window, dtype=float) for s in samples])
    y_all = np.stack([np.asarray(s.target_window, dtype=float) for s in samples])
    if config.loss_kind == ADAPTIVE:
        w_all = density_weights(y_all, density)
    else:
        w_all = mse_weights(y_all)

    model = init_model(config.hidden_size, seed=config.seed)
    adam = AdamState(model)
    rng = np.random.default_rng(config.seed)
    total = len(samples)

    trace = []
    for epoch in range(config.epochs):
        order = rng.permutation(total)
        epoch_loss = 0.0
        for batch_index, start in enumerate(range(0, total, config.batch_size)):
            rows = order[start:start + config.batch_size]
            n = len(rows)
            outputs, cache = forward_batch(model, x_all[rows])
            err = outputs - y_all[rows]
            weights = w_all[rows]
            batch_loss = float(np.sum(err**2 * weights) / n)
            if not np.isfinite(batch_loss):
                raise TrainingDiverged(
                    f"non-finite loss at epoch {epoch}, batch {batch_index}"
                )
            grads = backward_batch(model, cache, 2.0 * err * weights / n)
            adam.step(model, grads, config)
            epoch_loss += batch_loss * n
        trace.append(epoch_loss / total)
    return model, trace


def predict(model: LstmModel, normalized_input, scale: float, offset: float) -> np.ndarray:
    """Forecast HORIZON days of case counts from a normalized input window.

    The network output is mapped back to case units and clamped at zero.
    """
    if scale < offset:
        raise ValueError("scale must be at least offset")
    outputs, _ = forward_batch(model, np.asarray(normalized_input, dtype=float)[None, :])
    return np.maximum(outputs[0] * (scale - offset) + offset, 0.0)


def model_to_dict(model: LstmModel, extra: dict | None = None) -> dict:
    doc = {
        "format": MODEL_FORMAT,
        "hidden_size": model.hidden_size,
        "horizon": HORIZON,
        "seed": model.seed,
        "params": {
            name: {"shape": list(tensor.shape), "data": tensor.ravel().tolist()}
            for name, tensor in model.parameters()
        },
    }
    if extra:
        doc.update(extra)
    return doc


def model_from_dict(doc: dict) -> LstmModel:
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError(f"unrecognized model format {doc.get('format')!r}")
    params = {
        name: np.array(entry["data"], dtype=float).reshape(entry["shape"])
        for name, entry in doc["params"].items()
    }
    return LstmModel(hidden_size=int(doc["hidden_size"]), seed=int(doc.get("seed", 0)),
                     **params)


def save_model(model: LstmModel, path, extra: dict | None = None) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(model_to_dict(model, extra), handle, sort_keys=True)
        handle.write("\n")


def load_model(path) -> tuple[LstmModel, dict]:
    """Load a serialized model; returns (model, full document)."""
    with open(path, encoding="utf-8") as handle:
        doc = json.load(handle)
    return model_from_dict(doc), doc
