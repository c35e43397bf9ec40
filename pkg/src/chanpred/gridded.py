"""Softmax-weighted bank of LMMSE filters over sampled DoA scenarios.

A bank holds one extended-window filter per sampled DoA tuple. At run time
each filter gets a Gaussian log-likelihood score from the observation's
outer-product feature, and the prediction row is the softmax-weighted
convex combination of the per-filter output rows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ModelParams
from .covariance import CovarianceSpec
from .linalg import logdet, softmax
from .lmmse import PredictorRow, lmmse_extended

SAMPLING_UNIFORM = "uniform"
SAMPLING_RANDOM = "random"

# Tolerance on the imaginary residue of the log-determinant bias terms.
_BIAS_IMAG_TOL = 1e-9


@dataclass(frozen=True)
class GridStrategy:
    """How the DoA prior is discretized.

    ``uniform`` (single path only) places samples at midpoint angles over
    [0, pi), so the induced Doppler shifts follow the same edge-weighted
    density as the uniform DoA prior; ``random`` draws i.i.d. DoA tuples
    from that prior.
    """

    num_samples: int
    doa_sampling: str = SAMPLING_UNIFORM
    num_paths: int = 1

    def __post_init__(self):
        if self.num_samples < 1:
            raise ValueError("num_samples must be >= 1")
        if self.doa_sampling not in (SAMPLING_UNIFORM, SAMPLING_RANDOM):
            raise ValueError(f"unknown doa_sampling {self.doa_sampling!r}")
        if self.doa_sampling == SAMPLING_UNIFORM and self.num_paths != 1:
            raise ValueError("uniform grids are defined for a single path only")
        if self.num_paths < 1:
            raise ValueError("num_paths must be >= 1")


@dataclass(frozen=True)
class FilterBank:
    """Per-sample filters, output rows and log-likelihood bias terms."""

    doas: np.ndarray      # radians, shape (N, P)
    dopplers: np.ndarray  # Hz, shape (N, P)
    powers: np.ndarray    # shape (N, P), rows sum to 1
    filters: np.ndarray   # complex, shape (N, M+step, M)
    out_rows: np.ndarray  # complex, shape (N, M)
    bias: np.ndarray      # real, shape (N,)
    obs_len: int
    step: int
    noise_var: float

    @property
    def num_samples(self) -> int:
        return self.filters.shape[0]

    @property
    def observation_blocks(self) -> np.ndarray:
        """Bottom M x M block of every filter, shape (N, M, M)."""
        return self.filters[:, self.step:, :]


def grid_doas(strategy: GridStrategy, rng: np.random.Generator | None) -> np.ndarray:
    """DoA tuples for every bank sample, shape (N, P)."""
    n = strategy.num_samples
    if strategy.doa_sampling == SAMPLING_UNIFORM:
        # Midpoint angles: cos covers (-1, 1) without endpoint duplication
        # and the sample density matches the uniform-DoA prior.
        return (np.pi * (np.arange(n) + 0.5) / n)[:, None]
    if rng is None:
        raise ValueError("random DoA sampling requires an rng")
    return rng.uniform(-np.pi, np.pi, (n, strategy.num_paths))


def build_bank(strategy: GridStrategy, params: ModelParams, step: int,
               noise_var: float, rng: np.random.Generator | None = None) -> FilterBank:
    """Construct the filter bank for one velocity / SNR setting."""
    if noise_var <= 0:
        raise ValueError("noise_var must be positive")
    doas = grid_doas(strategy, rng)
    n, p = doas.shape
    dopplers = params.doppler_bandwidth_hz * np.cos(doas)
    powers = np.full((n, p), 1.0 / p)

    m = params.obs_len
    filters = np.empty((n, m + step, m), dtype=np.complex128)
    bias = np.empty(n)
    eye = np.eye(m)
    for i in range(n):
        spec = CovarianceSpec.from_lines(dopplers[i], powers[i],
                                         params.symbol_duration_s)
        filt = lmmse_extended(spec, m, step, noise_var)
        filters[i] = filt.matrix
        b = logdet(eye - filt.observation_block)
        if abs(b.imag) > _BIAS_IMAG_TOL:
            raise ValueError(f"bias term {i} has imaginary residue {b.imag:.3e}")
        bias[i] = b.real
    return FilterBank(doas, dopplers, powers, filters, filters[:, 0, :].copy(),
                      bias, m, step, noise_var)


def feature_full(window: np.ndarray, noise_var: float) -> np.ndarray:
    """Rank-one Hermitian feature: outer(y, y*) / noise_var.

    Symmetrized so the result is exactly Hermitian despite rounding in the
    complex outer product.
    """
    if noise_var <= 0:
        raise ValueError("noise_var must be positive")
    y = np.asarray(window, dtype=np.complex128)
    outer = np.outer(y, y.conj()) / noise_var
    return 0.5 * (outer + outer.conj().T)


def bank_scores(bank: FilterBank, feature: np.ndarray) -> np.ndarray:
    """Log-likelihood score per sample: Re tr(block @ feature) + bias."""
    traces = np.einsum("nij,ji->n", bank.observation_blocks, feature)
    return traces.real + bank.bias


def quadratic_scores(bank: FilterBank, window: np.ndarray) -> np.ndarray:
    """Same scores computed as quadratic forms, without the M x M feature."""
    y = np.asarray(window, dtype=np.complex128)
    forms = np.einsum("i,nij,j->n", y.conj(), bank.observation_blocks, y)
    return forms.real / bank.noise_var + bank.bias


def gridded_row(bank: FilterBank, feature: np.ndarray) -> PredictorRow:
    """Softmax-weighted combination of the bank's output rows."""
    weights = softmax(bank_scores(bank, feature))
    return PredictorRow(weights @ bank.out_rows, bank.obs_len, bank.step)
