"""Training losses: plain squared error and a density-weighted variant.

Epi-curves are dominated by zero-case days (periodic testing, troughs
between waves), which biases a squared-error-trained model toward
predicting zeros. The adaptive loss divides each day's squared error by
10 * ln^2(count of the target's value in the training set), so abundant
target values contribute less and rare ones more. Counts come from an
equal-width histogram of the training targets and are floored at e^2,
which bounds every per-element weight by 1/40 and keeps the weight
monotone in the count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

COUNT_FLOOR = math.e**2  # ln^2 floor of 4 -> per-element weight at most 1/40
DEFAULT_BINS = 64


@dataclass
class DensityHistogram:
    """Equal-width histogram of training target values with floored lookup."""

    bin_edges: np.ndarray  # B+1 ascending edges spanning the target range
    counts: np.ndarray  # B non-negative integers
    epsilon_floor: float = COUNT_FLOOR

    def __post_init__(self):
        self.bin_edges = np.asarray(self.bin_edges, dtype=float)
        self.counts = np.asarray(self.counts, dtype=int)
        if self.bin_edges.size != self.counts.size + 1:
            raise ValueError("need exactly one more edge than bins")

    def lookup(self, value) -> np.ndarray:
        """Count of the bin holding ``value``; top-edge values use the last bin."""
        idx = np.searchsorted(self.bin_edges, np.asarray(value, dtype=float),
                              side="right") - 1
        idx = np.clip(idx, 0, self.counts.size - 1)
        return self.counts[idx].astype(float)


def build_density(training_targets, bins: int = DEFAULT_BINS) -> DensityHistogram:
    """Histogram the training target values into ``bins`` equal-width bins."""
    targets = np.asarray(training_targets, dtype=float).ravel()
    if targets.size < 1:
        raise ValueError("need at least one target value")
    if bins < 1:
        raise ValueError("need at least one bin")
    lo = float(targets.min())
    hi = float(targets.max())
    if hi == lo:
        # Degenerate range: park all mass in the first bin.
        edges = np.linspace(lo, lo + 1.0, bins + 1)
        counts = np.zeros(bins, dtype=int)
        counts[0] = targets.size
        return DensityHistogram(bin_edges=edges, counts=counts)
    counts, edges = np.histogram(targets, bins=bins, range=(lo, hi))
    return DensityHistogram(bin_edges=edges, counts=counts)


def density_weights(y_true, density: DensityHistogram) -> np.ndarray:
    """Per-element weights 1 / (10 * ln^2(max(count, e^2)))."""
    counts = np.maximum(density.lookup(y_true), density.epsilon_floor)
    return 1.0 / (10.0 * np.log(counts) ** 2)


def mse_weights(y_true) -> np.ndarray:
    """Uniform 1/10 weights making plain MSE commensurate with the adaptive loss."""
    return np.full(np.shape(y_true), 1.0 / 10.0)


def adaptive_loss(y_true, y_pred, density: DensityHistogram, n: int = 1) -> float:
    """Density-weighted squared error of one sample, scaled by batch size n."""
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    w = density_weights(y_true, density)
    return float(np.sum((y_true - y_pred) ** 2 * w) / n)


def adaptive_loss_batch(y_true, y_pred, density: DensityHistogram) -> float:
    """Batch form: mean over samples of the per-sample weighted error sums."""
    y_true = np.atleast_2d(np.asarray(y_true, dtype=float))
    y_pred = np.atleast_2d(np.asarray(y_pred, dtype=float))
    w = density_weights(y_true, density)
    return float(np.sum((y_true - y_pred) ** 2 * w) / y_true.shape[0])


def standard_mse_loss(y_true, y_pred, n: int = 1) -> float:
    """Plain squared error with the same 1/10 horizon scaling, over batch size n."""
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    return float(np.sum((y_true - y_pred) ** 2) / (10.0 * n))
