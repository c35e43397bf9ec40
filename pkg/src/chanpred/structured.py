"""DFT-compressed form of the filter bank.

Each bank filter's observation block is approximated as Q^H diag(w) Q for
a shared DFT-derived Q, so the per-sample likelihood score collapses to an
inner product between the real weight vector w and a periodogram-like
feature of the observation window. The whole predictor then needs only two
small matrices and a bias vector.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import IllPosedDecompositionError
from .gridded import FilterBank
from .linalg import dft_matrix, softmax
from .lmmse import PredictorRow

Q_CIRCULANT = "circulant"
Q_TOEPLITZ = "toeplitz"

_SYMMETRY_RTOL = 1e-9
_REAL_RESIDUE_WARN = 1e-8
_GRAM_RCOND = 1e-10


@dataclass(frozen=True)
class StructuredModel:
    """Compressed bank: spectral weights, output rows and bias terms."""

    q_kind: str
    q: np.ndarray                 # complex, shape (K, M)
    spectral_weights: np.ndarray  # real, shape (N, K)
    output_rows: np.ndarray       # complex, shape (N, M)
    bias: np.ndarray              # real, shape (N,)
    obs_len: int
    step: int
    noise_var: float

    @property
    def num_samples(self) -> int:
        return self.spectral_weights.shape[0]

    @property
    def feature_len(self) -> int:
        return self.q.shape[0]


def q_matrix(kind: str, obs_len: int) -> np.ndarray:
    """Shared decomposition basis: M-point DFT or first M columns of the
    2M-point DFT, rows normalized to unit norm."""
    if kind == Q_CIRCULANT:
        return dft_matrix(obs_len, obs_len)
    if kind == Q_TOEPLITZ:
        return dft_matrix(2 * obs_len, obs_len)
    raise ValueError(f"unknown q_kind {kind!r}")


def fit_spectral_weights(block: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Least-squares w minimizing ||block - Q^H diag(w) Q||_F over real w.

    Solves the normal equations of the rank-one row projectors through an
    eigendecomposition pseudo-solve: the 2M-row basis carries an exact
    one-dimensional gauge freedom (the alternating-sign combination of the
    projectors vanishes), so the minimum-norm solution is taken. The block
    must be Hermitian within 1e-9 relative tolerance; it is symmetrized
    before fitting.
    """
    a = np.asarray(block, dtype=np.complex128)
    scale = np.max(np.abs(a))
    if scale > 0 and np.max(np.abs(a - a.conj().T)) > _SYMMETRY_RTOL * scale:
        raise ValueError("filter block is not Hermitian within tolerance")
    a = 0.5 * (a + a.conj().T)

    inner = q @ q.conj().T               # (K, K), entries q_k . q_l^H
    gram = np.abs(inner) ** 2
    qa = q @ a
    quad = np.einsum("ki,ki->k", qa, q.conj())
    residue = np.max(np.abs(quad.imag))
    if residue > _REAL_RESIDUE_WARN * max(scale, 1.0):
        warnings.warn(f"spectral fit dropped imaginary residue {residue:.3e}",
                      RuntimeWarning, stacklevel=2)
    rhs = quad.real

    vals, vecs = np.linalg.eigh(gram)
    top = vals[-1]
    if not np.isfinite(top) or top <= 0:
        raise IllPosedDecompositionError(
            "Gram matrix of the spectral fit is degenerate")
    keep = vals > _GRAM_RCOND * top
    inv = np.zeros_like(vals)
    inv[keep] = 1.0 / vals[keep]
    return vecs @ (inv * (vecs.T @ rhs))


def circulant_fast_weights(cov: np.ndarray, noise_var: float) -> np.ndarray:
    """Spectral-ratio weights c/(c + noise_var) for an exactly circulant
    covariance; agrees with the least-squares fit in that case."""
    m = cov.shape[0]
    q = dft_matrix(m, m)
    eig = np.einsum("ki,ij,kj->k", q, np.asarray(cov, dtype=np.complex128),
                    q.conj()).real
    return eig / (eig + noise_var)


def feature_compressed(window: np.ndarray, q: np.ndarray,
                       noise_var: float) -> np.ndarray:
    """Per-bin energy feature |Q y|^2 / noise_var, length K."""
    if noise_var <= 0:
        raise ValueError("noise_var must be positive")
    z = q @ np.asarray(window, dtype=np.complex128)
    return (z.real ** 2 + z.imag ** 2) / noise_var


def from_bank(bank: FilterBank, q_kind: str) -> StructuredModel:
    """Compress every bank filter against the shared basis for ``q_kind``."""
    q = q_matrix(q_kind, bank.obs_len)
    spectral = np.stack([fit_spectral_weights(block, q)
                         for block in bank.observation_blocks])
    return StructuredModel(q_kind, q, spectral, bank.out_rows.copy(),
                           bank.bias.copy(), bank.obs_len, bank.step,
                           bank.noise_var)


def structured_row(model: StructuredModel, feature: np.ndarray) -> PredictorRow:
    """Softmax-weighted output row from the compressed feature."""
    feature = np.asarray(feature, dtype=float)
    if feature.shape != (model.feature_len,):
        raise ValueError(f"expected feature of length {model.feature_len}, "
                         f"got shape {feature.shape}")
    scores = model.spectral_weights @ feature + model.bias
    weights = softmax(scores)
    return PredictorRow(weights @ model.output_rows, model.obs_len, model.step)
