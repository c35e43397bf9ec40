"""Trainable feed-forward predictor with one softmax hidden layer.

The network maps the per-bin energy feature of an observation window to a
prediction row (real and imaginary halves stacked). It is initialized so
its output matches the compressed filter-bank predictor exactly, and is
then trained on the mean squared prediction error with freshly simulated
minibatches. Gradients are derived by hand; the only nonlinearity is the
softmax.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ModelParams, ObservationBatch, make_batch
from .errors import TrainingError
from .linalg import softmax
from .structured import StructuredModel, feature_compressed

OPTIMIZER_ADAM = "adam"
OPTIMIZER_SGD = "sgd"


@dataclass
class NNWeights:
    """Real-valued parameters of the two-layer predictor network."""

    hidden_weights: np.ndarray  # shape (N, K)
    hidden_bias: np.ndarray     # shape (N,)
    output_weights: np.ndarray  # shape (2M, N), real over imaginary half
    output_bias: np.ndarray     # shape (2M,)

    @property
    def obs_len(self) -> int:
        return self.output_weights.shape[0] // 2

    def copy(self) -> "NNWeights":
        return NNWeights(self.hidden_weights.copy(), self.hidden_bias.copy(),
                         self.output_weights.copy(), self.output_bias.copy())

    def blocks(self) -> dict[str, np.ndarray]:
        return {"hidden_weights": self.hidden_weights,
                "hidden_bias": self.hidden_bias,
                "output_weights": self.output_weights,
                "output_bias": self.output_bias}

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(b)) for b in self.blocks().values())


@dataclass(frozen=True)
class TrainConfig:
    """Budget and optimizer settings for one training run."""

    minibatches: int = 3000
    batch_size: int = 50
    learning_rate: float = 1e-3
    optimizer: str = OPTIMIZER_ADAM
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.minibatches < 1:
            raise ValueError("minibatches must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.optimizer not in (OPTIMIZER_ADAM, OPTIMIZER_SGD):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


def init_from_structured(model: StructuredModel) -> NNWeights:
    """Copy the compressed predictor into network weights.

    Hidden layer takes the spectral weights and bias; the output layer
    stacks the real and imaginary parts of the output rows; the output
    bias starts at zero.
    """
    out = model.output_rows.T  # (M, N), columns are per-sample rows
    return NNWeights(
        hidden_weights=model.spectral_weights.copy(),
        hidden_bias=model.bias.copy(),
        output_weights=np.vstack([out.real, out.imag]),
        output_bias=np.zeros(2 * model.obs_len),
    )


def forward(weights: NNWeights, feature: np.ndarray) -> np.ndarray:
    """Network output for one feature (K,) or a batch (K, B)."""
    feature = np.asarray(feature, dtype=float)
    batched = feature.ndim == 2
    pre = weights.hidden_weights @ feature
    pre = pre + (weights.hidden_bias[:, None] if batched else weights.hidden_bias)
    hidden = softmax(pre, axis=0)
    out = weights.output_weights @ hidden
    return out + (weights.output_bias[:, None] if batched else weights.output_bias)


def output_to_row(out: np.ndarray) -> np.ndarray:
    """Recombine stacked real/imaginary halves into a complex row."""
    m = out.shape[0] // 2
    return out[:m] + 1j * out[m:]


def predict_nn(weights: NNWeights, feature: np.ndarray,
               window: np.ndarray) -> complex:
    """Predicted coefficient: complex row from the network applied to y."""
    window = np.asarray(window)
    if window.shape != (weights.obs_len,):
        raise ValueError(f"expected window of length {weights.obs_len}, "
                         f"got shape {window.shape}")
    return complex(output_to_row(forward(weights, feature)) @ window)


def loss_and_grad(weights: NNWeights, batch: ObservationBatch, q: np.ndarray,
                  noise_var: float) -> tuple[float, NNWeights]:
    """Batch MSE and its analytic gradient in an NNWeights-shaped container."""
    if batch.size < 1:
        raise ValueError("batch must be non-empty")
    y = batch.observations.T                      # (M, B)
    z = q @ y
    features = (z.real ** 2 + z.imag ** 2) / noise_var  # (K, B)
    m = weights.obs_len
    b = batch.size

    pre = weights.hidden_weights @ features + weights.hidden_bias[:, None]
    hidden = softmax(pre, axis=0)                 # (N, B)
    out = weights.output_weights @ hidden + weights.output_bias[:, None]
    if not np.all(np.isfinite(out)):
        bad = int(np.argmax(~np.isfinite(out).all(axis=0)))
        raise TrainingError("non-finite network output", step=bad)
    rows = out[:m] + 1j * out[m:]                 # (M, B)
    estimates = np.einsum("mb,mb->b", rows, y)
    errors = batch.targets - estimates
    mse = float(np.mean(np.abs(errors) ** 2))

    # d|e|^2/d out: stack of -2 Re(conj(e) y) and +2 Im(conj(e) y)
    ey = errors.conj()[None, :] * y               # (M, B)
    g_out = np.vstack([-2.0 * ey.real, 2.0 * ey.imag])
    g_output_weights = (g_out @ hidden.T) / b
    g_output_bias = g_out.mean(axis=1)
    g_hidden = weights.output_weights.T @ g_out
    # softmax Jacobian: p * (g - <p, g>)
    g_pre = hidden * (g_hidden - np.einsum("nb,nb->b", hidden, g_hidden)[None, :])
    g_hidden_weights = (g_pre @ features.T) / b
    g_hidden_bias = g_pre.mean(axis=1)
    grads = NNWeights(g_hidden_weights, g_hidden_bias,
                      g_output_weights, g_output_bias)
    return mse, grads


@dataclass
class _AdamState:
    first: dict[str, np.ndarray] = field(default_factory=dict)
    second: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0

    def update(self, weights: NNWeights, grads: NNWeights, cfg: TrainConfig):
        self.step += 1
        blocks = weights.blocks()
        gblocks = grads.blocks()
        for name, value in blocks.items():
            g = gblocks[name]
            if name not in self.first:
                self.first[name] = np.zeros_like(value)
                self.second[name] = np.zeros_like(value)
            m = self.first[name]
            v = self.second[name]
            m *= cfg.beta1
            m += (1 - cfg.beta1) * g
            v *= cfg.beta2
            v += (1 - cfg.beta2) * g * g
            m_hat = m / (1 - cfg.beta1 ** self.step)
            v_hat = v / (1 - cfg.beta2 ** self.step)
            value -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.eps)


def train(weights: NNWeights, params: ModelParams, step: int, noise_var: float,
          q: np.ndarray, cfg: TrainConfig,
          rng: np.random.Generator) -> tuple[NNWeights, np.ndarray]:
    """Run the minibatch loop; returns trained weights and the loss trace.

    Every minibatch is freshly simulated (no epoch reuse). A non-finite
    value aborts with the failing step index and the last finite weights.
    """
    current = weights.copy()
    adam = _AdamState()
    trace = np.empty(cfg.minibatches)
    for i in range(cfg.minibatches):
        batch = make_batch(params, step, cfg.batch_size, noise_var, rng)
        try:
            mse, grads = loss_and_grad(current, batch, q, noise_var)
        except TrainingError as exc:
            raise TrainingError(f"training failed at minibatch {i}: {exc}",
                                step=i, last_weights=current) from exc
        trace[i] = mse
        before = current.copy()
        if cfg.optimizer == OPTIMIZER_ADAM:
            adam.update(current, grads, cfg)
        else:
            gblocks = grads.blocks()
            for name, value in current.blocks().items():
                value -= cfg.learning_rate * gblocks[name]
        if not current.all_finite():
            raise TrainingError(f"non-finite weights after minibatch {i}",
                                step=i, last_weights=before)
    return current, trace
