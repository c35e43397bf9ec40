"""Linear MMSE prediction of a future fading coefficient.

Supports the direct Wiener solution (correlation row against the noisy
window covariance) and the equivalent extended-window form whose full
filter matrix the bank-based predictors require.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ModelParams
from .covariance import CovarianceSpec, covariance_at, extended_cov
from .linalg import hermitian_solve


@dataclass(frozen=True)
class PredictorRow:
    """A linear predictor applied as weights @ y on a newest-first window.

    The weights store the conjugated Wiener form, so no conjugation happens
    at application time.
    """

    weights: np.ndarray  # complex, shape (M,)
    obs_len: int
    step: int


@dataclass(frozen=True)
class ExtendedFilter:
    """Full (M+step) x M prediction filter of the extended-window form."""

    matrix: np.ndarray  # complex, shape (M+step, M)
    noise_var: float

    @property
    def obs_len(self) -> int:
        return self.matrix.shape[1]

    @property
    def step(self) -> int:
        return self.matrix.shape[0] - self.matrix.shape[1]

    @property
    def output_row(self) -> np.ndarray:
        """First row: the weights that produce the predicted coefficient."""
        return self.matrix[0]

    @property
    def observation_block(self) -> np.ndarray:
        """Bottom M x M block; Hermitian with spectrum in [0, 1)."""
        return self.matrix[self.step:]


def lmmse_direct(spec: CovarianceSpec, obs_len: int, step: int,
                 noise_var: float) -> PredictorRow:
    """Wiener row: corr @ inv(Sigma_h + noise_var*I), via a Hermitian solve.

    ``corr`` holds [R[l], ..., R[M-1+l]]; the solve runs against its
    conjugate and is conjugated back, which equals the row product because
    the system matrix is Hermitian.
    """
    if noise_var <= 0:
        raise ValueError("noise_var must be positive")
    ext = extended_cov(spec, obs_len, step)
    corr = ext[0, step:]
    cov_y = ext[step:, step:] + noise_var * np.eye(obs_len)
    z = hermitian_solve(cov_y, np.conj(corr))
    return PredictorRow(np.conj(z), obs_len, step)


def lmmse_extended(spec: CovarianceSpec, obs_len: int, step: int,
                   noise_var: float) -> ExtendedFilter:
    """Extended-window filter; its first row equals the direct Wiener row."""
    if noise_var <= 0:
        raise ValueError("noise_var must be positive")
    ext = extended_cov(spec, obs_len, step)
    cross = ext[:, step:]                                   # (M+l, M)
    cov_y = ext[step:, step:] + noise_var * np.eye(obs_len)  # (M, M)
    # W = cross @ cov_y^-1, via W^H = cov_y^-1 cross^H (cov_y Hermitian PD)
    w = hermitian_solve(cov_y, cross.conj().T).conj().T
    return ExtendedFilter(w, noise_var)


def predict(row: PredictorRow, window: np.ndarray) -> complex:
    """Apply the predictor row to one newest-first observation window."""
    window = np.asarray(window)
    if window.shape != (row.obs_len,):
        raise ValueError(f"expected window of length {row.obs_len}, "
                         f"got shape {window.shape}")
    return complex(row.weights @ window)


def jakes_spec(params: ModelParams) -> CovarianceSpec:
    """Infinite-path covariance for the velocity in ``params``."""
    return CovarianceSpec.from_jakes(params.doppler_bandwidth_hz,
                                     params.symbol_duration_s)


def scenario_spec(dopplers_hz, powers, symbol_duration_s: float) -> CovarianceSpec:
    """Line-spectrum covariance matching one realized scenario."""
    return CovarianceSpec.from_lines(dopplers_hz, powers, symbol_duration_s)


def analytic_single_path_mse(obs_len: int, noise_var: float) -> float:
    """Closed-form genie-LMMSE MSE for a single path: s / (M + s).

    For one path the window covariance is rank one with eigenvalue M, so
    the Wiener error reduces to this ratio independent of Doppler and step.
    """
    return noise_var / (obs_len + noise_var)


def covariance_row(spec: CovarianceSpec, obs_len: int, step: int) -> np.ndarray:
    """Correlation row [R[l], ..., R[M-1+l]] between target and window."""
    return np.atleast_1d(covariance_at(spec, np.arange(step, obs_len + step)))
