"""A small LSTM sequence model written directly in numpy.

The recurrence consumes one scalar per day for 50 days and a linear head
maps the final hidden state to a 10-day forecast. Gates follow the
standard formulation: for each step, with v = [h_prev, x_t],

    i = sigmoid(Wi v + bi)      f = sigmoid(Wf v + bf)
    g = tanh(Wg v + bg)         o = sigmoid(Wo v + bo)
    c = f * c_prev + i * g      h = o * tanh(c)

Gradients are computed analytically by backpropagation through time and
are verified against central finite differences in ``gradient_check``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .losses import DensityHistogram, density_weights, mse_weights

INPUT_LEN = 50
HORIZON = 10

GATE_NAMES = ("i", "f", "g", "o")


@dataclass
class LstmModel:
    hidden_size: int
    w_i: np.ndarray  # (H, H+1): recurrent and input weights, concatenated
    w_f: np.ndarray
    w_g: np.ndarray
    w_o: np.ndarray
    b_i: np.ndarray  # (H,)
    b_f: np.ndarray
    b_g: np.ndarray
    b_o: np.ndarray
    w_out: np.ndarray  # (HORIZON, H)
    b_out: np.ndarray  # (HORIZON,)
    seed: int = 0

    def __post_init__(self):
        h = self.hidden_size
        expected = {
            "w_i": (h, h + 1), "w_f": (h, h + 1), "w_g": (h, h + 1),
            "w_o": (h, h + 1), "b_i": (h,), "b_f": (h,), "b_g": (h,),
            "b_o": (h,), "w_out": (HORIZON, h), "b_out": (HORIZON,),
        }
        for name, shape in expected.items():
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise ValueError(f"{name}: expected shape {shape}, got {arr.shape}")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name}: non-finite parameter values")
            setattr(self, name, arr)

    def parameters(self) -> list[tuple[str, np.ndarray]]:
        """Named parameter tensors in a fixed order."""
        return [(name, getattr(self, name)) for name in (
            "w_i", "w_f", "w_g", "w_o", "b_i", "b_f", "b_g", "b_o",
            "w_out", "b_out",
        )]


def init_model(hidden_size: int, seed: int = 0) -> LstmModel:
    """Seeded uniform(-k, k) initialization with k = 1/sqrt(hidden_size)."""
    rng = np.random.default_rng(seed)
    k = 1.0 / np.sqrt(hidden_size)

    def u(*shape):
        return rng.uniform(-k, k, size=shape)

    return LstmModel(
        hidden_size=hidden_size,
        w_i=u(hidden_size, hidden_size + 1), w_f=u(hidden_size, hidden_size + 1),
        w_g=u(hidden_size, hidden_size + 1), w_o=u(hidden_size, hidden_size + 1),
        b_i=u(hidden_size), b_f=u(hidden_size),
        b_g=u(hidden_size), b_o=u(hidden_size),
        w_out=u(HORIZON, hidden_size), b_out=u(HORIZON),
        seed=seed,
    )


def zero_model(hidden_size: int) -> LstmModel:
    z = np.zeros
    return LstmModel(
        hidden_size=hidden_size,
        w_i=z((hidden_size, hidden_size + 1)), w_f=z((hidden_size, hidden_size + 1)),
        w_g=z((hidden_size, hidden_size + 1)), w_o=z((hidden_size, hidden_size + 1)),
        b_i=z(hidden_size), b_f=z(hidden_size),
        b_g=z(hidden_size), b_o=z(hidden_size),
        w_out=z((HORIZON, hidden_size)), b_out=z(HORIZON),
    )


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def forward_batch(model: LstmModel, inputs: np.ndarray):
    """Run the recurrence on a (n, INPUT_LEN) batch.

    Returns (outputs (n, HORIZON), cache) where the cache holds the per-step
    activations needed by ``backward_batch``.
    """
    inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
    n, steps = inputs.shape
    hsize = model.hidden_size
    h = np.zeros((n, hsize))
    c = np.zeros((n, hsize))
    states = []
    for t in range(steps):
        v = np.concatenate([h, inputs[:, t:t + 1]], axis=1)  # (n, H+1)
        i = _sigmoid(v @ model.w_i.T + model.b_i)
        f = _sigmoid(v @ model.w_f.T + model.b_f)
        g = np.tanh(v @ model.w_g.T + model.b_g)
        o = _sigmoid(v @ model.w_o.T + model.b_o)
        c_prev = c
        c = f * c_prev + i * g
        tanh_c = np.tanh(c)
        h = o * tanh_c
        states.append((v, i, f, g, o, c_prev, tanh_c))
    outputs = h @ model.w_out.T + model.b_out
    if not np.all(np.isfinite(outputs)):
        raise ArithmeticError("non-finite values in the recurrence output")
    return outputs, (states, h)


def backward_batch(model: LstmModel, cache, d_outputs: np.ndarray) -> dict[str, np.ndarray]:
    """Analytic gradients of a scalar loss given d(loss)/d(outputs)."""
    states, h_final = cache
    d_outputs = np.atleast_2d(np.asarray(d_outputs, dtype=float))
    hsize = model.hidden_size

    grads = {name: np.zeros_like(tensor) for name, tensor in model.parameters()}
    grads["w_out"] = d_outputs.T @ h_final
    grads["b_out"] = d_outputs.sum(axis=0)

    dh = d_outputs @ model.w_out
    dc = np.zeros_like(dh)
    for v, i, f, g, o, c_prev, tanh_c in reversed(states):
        do = dh * tanh_c
        dc = dc + dh * o * (1.0 - tanh_c**2)
        di = dc * g
        dg = dc * i
        df = dc * c_prev
        dz_i = di * i * (1.0 - i)
        dz_f = df * f * (1.0 - f)
        dz_g = dg * (1.0 - g**2)
        dz_o = do * o * (1.0 - o)
        grads["w_i"] += dz_i.T @ v
        grads["w_f"] += dz_f.T @ v
        grads["w_g"] += dz_g.T @ v
        grads["w_o"] += dz_o.T @ v
        grads["b_i"] += dz_i.sum(axis=0)
        grads["b_f"] += dz_f.sum(axis=0)
        grads["b_g"] += dz_g.sum(axis=0)
        grads["b_o"] += dz_o.sum(axis=0)
        dh = (dz_i @ model.w_i + dz_f @ model.w_f
              + dz_g @ model.w_g + dz_o @ model.w_o)[:, :hsize]
        dc = dc * f
    return grads


def lstm_forward(model: LstmModel, input_window) -> np.ndarray:
    """Forecast HORIZON values from one INPUT_LEN-day window."""
    outputs, _ = forward_batch(model, np.asarray(input_window, dtype=float)[None, :])
    return outputs[0]


def _loss_and_grads(model, x, y_true, weights, n: int = 1):
    """Weighted squared-error loss over one batch and its parameter gradients."""
    outputs, cache = forward_batch(model, x)
    err = outputs - y_true
    loss = float(np.sum(err**2 * weights) / n)
    grads = backward_batch(model, cache, 2.0 * err * weights / n)
    return loss, grads


def gradient_check(model: LstmModel, sample, loss_kind: str = "standard_mse",
                   density: DensityHistogram | None = None,
                   step: float = 1e-5) -> float:
    """Max relative error of analytic vs central-difference gradients.

    Perturbs every parameter entry; intended for small hidden sizes.
    """
    x = np.asarray(sample.input_window, dtype=float)[None, :]
    y = np.asarray(sample.target_window, dtype=float)[None, :]
    if loss_kind == "adaptive":
        if density is None:
            raise ValueError("adaptive loss requires a density histogram")
        weights = density_weights(y, density)
    else:
        weights = mse_weights(y)

    _, grads = _loss_and_grads(model, x, y, weights)

    worst = 0.0
    for name, tensor in model.parameters():
        flat = tensor.ravel()
        analytic = grads[name].ravel()
        for idx in range(flat.size):
            original = flat[idx]
            flat[idx] = original + step
            up, _ = forward_batch(model, x)
            loss_up = float(np.sum((up - y) ** 2 * weights))
            flat[idx] = original - step
            down, _ = forward_batch(model, x)
            loss_down = float(np.sum((down - y) ** 2 * weights))
            flat[idx] = original
            numeric = (loss_up - loss_down) / (2.0 * step)
            scale = max(abs(analytic[idx]), abs(numeric), 1e-8)
            worst = max(worst, abs(analytic[idx] - numeric) / scale)
    return worst
