"""Flat-fading channel simulation.

A channel block is a superposition of plane waves: each path has a random
direction of arrival (mapped to a Doppler shift through the user velocity)
and a random phase, both held constant over the block. The process has
zero mean and unit variance; observations are the newest-first window of
the block plus circularly-symmetric complex white noise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact SI value


@dataclass(frozen=True)
class ModelParams:
    """Physical and window parameters of one simulation setting."""

    carrier_freq_hz: float
    symbol_duration_s: float
    velocity_mps: float
    num_paths: int
    obs_len: int
    pred_len: int

    def __post_init__(self):
        if self.carrier_freq_hz <= 0:
            raise ValueError("carrier_freq_hz must be positive")
        if self.symbol_duration_s <= 0:
            raise ValueError("symbol_duration_s must be positive")
        if self.velocity_mps < 0:
            raise ValueError("velocity_mps must be non-negative")
        if self.num_paths < 1 or self.obs_len < 1 or self.pred_len < 1:
            raise ValueError("num_paths, obs_len and pred_len must be >= 1")

    @property
    def doppler_bandwidth_hz(self) -> float:
        """Maximum Doppler shift v*f_c/c."""
        return self.velocity_mps * self.carrier_freq_hz / SPEED_OF_LIGHT

    @property
    def block_len(self) -> int:
        return self.obs_len + self.pred_len


@dataclass(frozen=True)
class ChannelScenario:
    """One block's propagation state: per-path DoA, phase, Doppler, amplitude."""

    doas: np.ndarray        # radians, shape (P,)
    phases: np.ndarray      # radians, shape (P,)
    dopplers: np.ndarray    # Hz, shape (P,)
    amplitudes: np.ndarray  # complex, |a_p| = 1/sqrt(P), shape (P,)


@dataclass
class ObservationBatch:
    """A batch of noisy observation windows with their prediction targets.

    ``observations[b]`` holds the window newest-first, i.e. entry k is the
    noisy coefficient at time index obs_len-1-k. ``targets[b]`` is the clean
    coefficient ``step`` symbols past the newest observation. The true
    per-realization Doppler shifts and path powers are kept so that
    genie-aided predictors can be evaluated on the same draws.
    """

    observations: np.ndarray  # complex, shape (B, M)
    targets: np.ndarray       # complex, shape (B,)
    noise_var: float
    dopplers: np.ndarray = field(repr=False, default=None)  # Hz, shape (B, P)
    powers: np.ndarray = field(repr=False, default=None)    # shape (B, P)

    @property
    def size(self) -> int:
        return self.observations.shape[0]


def sample_scenario(params: ModelParams, rng: np.random.Generator) -> ChannelScenario:
    """Draw one scenario: DoAs and phases uniform on [-pi, pi)."""
    doas = rng.uniform(-np.pi, np.pi, params.num_paths)
    phases = rng.uniform(-np.pi, np.pi, params.num_paths)
    dopplers = params.doppler_bandwidth_hz * np.cos(doas)
    amplitudes = np.exp(1j * phases) / np.sqrt(params.num_paths)
    return ChannelScenario(doas, phases, dopplers, amplitudes)


def generate_block(scenario: ChannelScenario, params: ModelParams) -> np.ndarray:
    """Channel coefficients h[0..M+N-1] by direct plane-wave summation."""
    m = np.arange(params.block_len)
    waves = np.exp(2j * np.pi * scenario.dopplers[:, None]
                   * params.symbol_duration_s * m[None, :])
    return scenario.amplitudes @ waves


def add_noise(window: np.ndarray, noise_var: float,
              rng: np.random.Generator) -> np.ndarray:
    """Add circularly-symmetric complex Gaussian noise of total variance noise_var."""
    if noise_var <= 0:
        raise ValueError("noise_var must be positive")
    scale = np.sqrt(noise_var / 2.0)
    noise = rng.standard_normal(window.shape) + 1j * rng.standard_normal(window.shape)
    return window + scale * noise


def make_batch(params: ModelParams, step: int, batch_size: int, noise_var: float,
               rng: np.random.Generator) -> ObservationBatch:
    """Generate ``batch_size`` independent noisy windows and their targets.

    Each realization gets its own scenario. The observation window is
    ordered newest-first and the target is the coefficient ``step`` symbols
    ahead of the newest observation.
    """
    if not 1 <= step <= params.pred_len:
        raise ValueError(f"step must lie in [1, pred_len={params.pred_len}], got {step}")
    if noise_var <= 0:
        raise ValueError("noise_var must be positive")
    p, m = params.num_paths, params.obs_len
    doas = rng.uniform(-np.pi, np.pi, (batch_size, p))
    phases = rng.uniform(-np.pi, np.pi, (batch_size, p))
    dopplers = params.doppler_bandwidth_hz * np.cos(doas)
    amplitudes = np.exp(1j * phases) / np.sqrt(p)

    idx = np.arange(m - 1, -1, -1)  # window indices newest-first: M-1, ..., 0
    waves = np.exp(2j * np.pi * params.symbol_duration_s
                   * dopplers[:, :, None] * idx[None, None, :])
    clean = np.einsum("bp,bpl->bl", amplitudes, waves)
    targets = amplitudes * np.exp(2j * np.pi * params.symbol_duration_s
                                  * dopplers * (m - 1 + step))
    targets = targets.sum(axis=1)

    scale = np.sqrt(noise_var / 2.0)
    noise = rng.standard_normal(clean.shape) + 1j * rng.standard_normal(clean.shape)
    observations = clean + scale * noise
    return ObservationBatch(observations, targets, noise_var,
                            dopplers=dopplers, powers=np.full((batch_size, p), 1.0 / p))
