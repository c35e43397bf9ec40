"""Uniform, batch-vectorized interface over all benchmark predictors.

Every predictor exposes ``predict_batch`` mapping an ObservationBatch to
one complex estimate per realization. Builders assemble the filter banks,
compressed models and trained networks for one velocity / SNR setting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gridded, nn, structured
from .channel import ModelParams, ObservationBatch
from .gridded import FilterBank, GridStrategy
from .linalg import softmax
from .lmmse import jakes_spec, lmmse_direct
from .nn import NNWeights, TrainConfig
from .structured import StructuredModel

# Display names in the order results are reported.
PREDICTOR_ORDER = (
    "LMMSE Perfect",
    "LMMSE Jakes",
    "Gridded",
    "Structured Toep",
    "Structured Circ",
    "NN Toep",
    "NN Circ",
)

_SLUGS = {
    "lmmse_perfect": "LMMSE Perfect",
    "lmmse_jakes": "LMMSE Jakes",
    "gridded": "Gridded",
    "structured_toep": "Structured Toep",
    "structured_circ": "Structured Circ",
    "nn_toep": "NN Toep",
    "nn_circ": "NN Circ",
}
_DISPLAY = {v: k for k, v in _SLUGS.items()}


def canonical_name(name: str) -> str:
    """Map a slug or display name to the display form; raise on unknown."""
    if name in _DISPLAY:
        return name
    slug = name.strip().lower().replace(" ", "_").replace("-", "_")
    slug = slug.replace("toeplitz", "toep").replace("circulant", "circ")
    if slug in _SLUGS:
        return _SLUGS[slug]
    raise ValueError(f"unknown predictor {name!r}; known: {sorted(_SLUGS)}")


def predictor_slug(display: str) -> str:
    return _DISPLAY[canonical_name(display)]


def table_rank(display: str) -> int:
    return PREDICTOR_ORDER.index(canonical_name(display))


class FixedRowPredictor:
    """One precomputed linear row applied to every window."""

    def __init__(self, name: str, row: np.ndarray, step: int):
        self.name = name
        self.row = np.asarray(row, dtype=np.complex128)
        self.step = step

    def predict_batch(self, batch: ObservationBatch, params: ModelParams) -> np.ndarray:
        return batch.observations @ self.row


class PerfectPredictor:
    """Genie-aided LMMSE: rebuilds the Wiener row per realization from the
    true per-path Dopplers and powers (mode "scenario"), or once per
    velocity from the DoA-marginal covariance (mode "marginal")."""

    name = "LMMSE Perfect"

    def __init__(self, step: int, noise_var: float, mode: str = "scenario"):
        if mode not in ("scenario", "marginal"):
            raise ValueError(f"unknown perfect-predictor mode {mode!r}")
        self.step = step
        self.noise_var = noise_var
        self.mode = mode

    def predict_batch(self, batch: ObservationBatch, params: ModelParams) -> np.ndarray:
        m = params.obs_len
        if self.mode == "marginal":
            row = lmmse_direct(jakes_spec(params), m, self.step, self.noise_var)
            return batch.observations @ row.weights
        ts = params.symbol_duration_s
        # Per realization: cov(i, j) = sum_p pow_p e^{2j pi f_p Ts (j - i)},
        # corr(i) = sum_p pow_p e^{2j pi f_p Ts (step + i)}
        waves = np.exp(2j * np.pi * ts * batch.dopplers[:, :, None]
                       * np.arange(m)[None, None, :])  # (B, P, M)
        cov = np.einsum("bpi,bp,bpj->bij", waves.conj(), batch.powers, waves)
        cov += self.noise_var * np.eye(m)[None, :, :]
        ahead = batch.powers * np.exp(2j * np.pi * ts * batch.dopplers * self.step)
        corr = np.einsum("bp,bpi->bi", ahead, waves)
        z = np.linalg.solve(cov, corr.conj()[:, :, None])[:, :, 0]
        return np.einsum("bi,bi->b", z.conj(), batch.observations)


class GriddedPredictor:
    """Filter bank scored per observation via quadratic forms."""

    name = "Gridded"

    def __init__(self, bank: FilterBank):
        self.bank = bank

    def predict_batch(self, batch: ObservationBatch, params: ModelParams) -> np.ndarray:
        y = batch.observations  # (B, M)
        blocks = self.bank.observation_blocks
        forms = np.einsum("bi,nij,bj->bn", y.conj(), blocks, y, optimize=True)
        scores = forms.real / self.bank.noise_var + self.bank.bias[None, :]
        weights = softmax(scores, axis=1)
        rows = weights @ self.bank.out_rows  # (B, M)
        return np.einsum("bm,bm->b", rows, y)


class StructuredPredictor:
    """Compressed bank evaluated from the per-bin energy feature."""

    def __init__(self, model: StructuredModel, name: str | None = None):
        self.model = model
        self.name = name or ("Structured Toep" if model.q_kind == structured.Q_TOEPLITZ
                             else "Structured Circ")

    def predict_batch(self, batch: ObservationBatch, params: ModelParams) -> np.ndarray:
        model = self.model
        y = batch.observations.T  # (M, B)
        z = model.q @ y
        features = (z.real ** 2 + z.imag ** 2) / model.noise_var
        scores = model.spectral_weights @ features + model.bias[:, None]
        weights = softmax(scores, axis=0)  # (N, B)
        rows = weights.T @ model.output_rows  # (B, M)
        return np.einsum("bm,mb->b", rows, y)


class NetworkPredictor:
    """Trained network producing one prediction row per observation."""

    def __init__(self, weights: NNWeights, q: np.ndarray, noise_var: float,
                 name: str):
        self.weights = weights
        self.q = q
        self.noise_var = noise_var
        self.name = name

    def predict_batch(self, batch: ObservationBatch, params: ModelParams) -> np.ndarray:
        y = batch.observations.T  # (M, B)
        z = self.q @ y
        features = (z.real ** 2 + z.imag ** 2) / self.noise_var
        out = nn.forward(self.weights, features)  # (2M, B)
        m = self.weights.obs_len
        rows = out[:m] + 1j * out[m:]
        return np.einsum("mb,mb->b", rows, y)


def grid_strategy_for(params: ModelParams, num_samples: int) -> GridStrategy:
    """Uniform cos-spaced grid for one path, random DoA tuples otherwise."""
    if params.num_paths == 1:
        return GridStrategy(num_samples, gridded.SAMPLING_UNIFORM, 1)
    return GridStrategy(num_samples, gridded.SAMPLING_RANDOM, params.num_paths)


def samples_for_kind(base_samples: int, q_kind: str) -> int:
    """Bank size per basis: doubled when the feature length doubles."""
    return 2 * base_samples if q_kind == structured.Q_TOEPLITZ else base_samples


def build_filter_bank(params: ModelParams, step: int, noise_var: float,
                      num_samples: int,
                      rng: np.random.Generator | None = None) -> FilterBank:
    strategy = grid_strategy_for(params, num_samples)
    return gridded.build_bank(strategy, params, step, noise_var, rng)


def build_jakes(params: ModelParams, step: int, noise_var: float) -> FixedRowPredictor:
    row = lmmse_direct(jakes_spec(params), params.obs_len, step, noise_var)
    return FixedRowPredictor("LMMSE Jakes", row.weights, step)


def build_structured(bank: FilterBank, q_kind: str) -> StructuredPredictor:
    return StructuredPredictor(structured.from_bank(bank, q_kind))


@dataclass
class TrainedNetwork:
    predictor: NetworkPredictor
    loss_trace: np.ndarray
    model: StructuredModel


def train_network(bank: FilterBank, q_kind: str, params: ModelParams,
                  cfg: TrainConfig, rng: np.random.Generator) -> TrainedNetwork:
    """Compress the bank, initialize the network from it, and train."""
    model = structured.from_bank(bank, q_kind)
    weights = nn.init_from_structured(model)
    trained, trace = nn.train(weights, params, bank.step, bank.noise_var,
                              model.q, cfg, rng)
    name = "NN Toep" if q_kind == structured.Q_TOEPLITZ else "NN Circ"
    predictor = NetworkPredictor(trained, model.q, bank.noise_var, name)
    return TrainedNetwork(predictor, trace, model)
