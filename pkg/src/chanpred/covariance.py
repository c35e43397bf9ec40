"""Covariance functions, Toeplitz covariance matrices and window selectors.

Two covariance kinds are supported: a finite line spectrum (weighted sum of
complex exponentials at the per-path Doppler shifts) and the infinite-path
limit whose autocorrelation is the Bessel function J0. Both are normalized
to R[0] = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz

from .linalg import bessel_j0

KIND_LINES = "lines"
KIND_JAKES = "jakes"

_POWER_SUM_TOL = 1e-8


@dataclass(frozen=True)
class CovarianceSpec:
    """Second-order description of the fading process at one symbol spacing."""

    kind: str
    symbol_duration_s: float
    dopplers_hz: np.ndarray | None = None   # shape (P,), lines only
    powers: np.ndarray | None = None        # shape (P,), sums to 1, lines only
    doppler_bandwidth_hz: float | None = None  # jakes only

    def __post_init__(self):
        if self.kind == KIND_LINES:
            if self.dopplers_hz is None or self.powers is None:
                raise ValueError("line spectrum requires dopplers_hz and powers")
            total = float(np.sum(self.powers))
            if abs(total - 1.0) > _POWER_SUM_TOL:
                raise ValueError(f"path powers must sum to 1, got {total}")
        elif self.kind == KIND_JAKES:
            if self.doppler_bandwidth_hz is None or self.doppler_bandwidth_hz < 0:
                raise ValueError("jakes spectrum requires doppler_bandwidth_hz >= 0")
        else:
            raise ValueError(f"unknown covariance kind {self.kind!r}")

    @classmethod
    def from_lines(cls, dopplers_hz, powers, symbol_duration_s: float) -> "CovarianceSpec":
        return cls(KIND_LINES, symbol_duration_s,
                   dopplers_hz=np.asarray(dopplers_hz, dtype=float),
                   powers=np.asarray(powers, dtype=float))

    @classmethod
    def from_jakes(cls, doppler_bandwidth_hz: float, symbol_duration_s: float) -> "CovarianceSpec":
        return cls(KIND_JAKES, symbol_duration_s,
                   doppler_bandwidth_hz=float(doppler_bandwidth_hz))


def covariance_at(spec: CovarianceSpec, lags) -> np.ndarray | complex:
    """Autocorrelation R[k] at the given lag(s), complex for line spectra."""
    k = np.asarray(lags, dtype=float)
    if spec.kind == KIND_LINES:
        phases = 2.0 * np.pi * spec.symbol_duration_s * np.multiply.outer(
            k, spec.dopplers_hz)
        out = np.exp(1j * phases) @ spec.powers
    else:
        out = np.asarray(bessel_j0(2.0 * np.pi * spec.doppler_bandwidth_hz
                                   * spec.symbol_duration_s * k),
                         dtype=np.complex128)
    if np.ndim(lags) == 0:
        return complex(out)
    return out


def toeplitz_cov(spec: CovarianceSpec, size: int) -> np.ndarray:
    """Hermitian Toeplitz covariance with entry (i, j) = R[j - i] for j >= i."""
    if size < 1:
        raise ValueError("size must be >= 1")
    row = np.atleast_1d(covariance_at(spec, np.arange(size)))
    return toeplitz(np.conj(row), row)


def extended_cov(spec: CovarianceSpec, obs_len: int, step: int) -> np.ndarray:
    """Covariance of the window augmented by ``step`` future coefficients."""
    if step < 1:
        raise ValueError("step must be >= 1")
    return toeplitz_cov(spec, obs_len + step)


@dataclass(frozen=True)
class SelectionOps:
    """Explicit selector pair: first unit row and the shift-down embedding.

    ``first_row`` picks the newest (predicted) coefficient from the extended
    window; ``embed`` maps the observation window into the bottom of the
    extended window.
    """

    obs_len: int
    step: int
    first_row: np.ndarray  # shape (M+l,)
    embed: np.ndarray      # shape (M+l, M), [0; I_M]


def selection_ops(obs_len: int, step: int) -> SelectionOps:
    if obs_len < 1 or step < 1:
        raise ValueError("obs_len and step must be >= 1")
    total = obs_len + step
    first_row = np.zeros(total)
    first_row[0] = 1.0
    embed = np.zeros((total, obs_len))
    embed[step:, :] = np.eye(obs_len)
    return SelectionOps(obs_len, step, first_row, embed)


def extract_parts(ext: np.ndarray, ops: SelectionOps) -> tuple[np.ndarray, np.ndarray]:
    """Slice the correlation row and the window covariance out of ``ext``.

    Equivalent to first_row^T * ext * embed and embed^T * ext * embed, done
    by slicing so the identities are exact.
    """
    total = ops.obs_len + ops.step
    if ext.shape != (total, total):
        raise ValueError(f"expected extended covariance of shape ({total}, {total}), "
                         f"got {ext.shape}")
    corr_row = ext[0, ops.step:].copy()
    cov = ext[ops.step:, ops.step:].copy()
    return corr_row, cov
