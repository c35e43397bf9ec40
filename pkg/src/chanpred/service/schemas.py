"""Pydantic request/response models for the service API."""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class ChannelSettings(BaseModel):
    """Channel and window parameters shared by train/eval requests."""

    velocity_kmh: float = Field(ge=0)
    snr_db: float
    paths: int = Field(default=1, ge=1)
    obs_len: int = Field(default=16, ge=1)
    step: int = Field(default=4, ge=1)
    carrier_freq_hz: float = Field(default=2e9, gt=0)
    symbol_duration_s: float = Field(default=20.57e-6, gt=0)


class TrainSettings(BaseModel):
    minibatches: int = Field(default=3000, ge=1)
    batch_size: int = Field(default=50, ge=1)
    learning_rate: float = Field(default=1e-3, gt=0)


class TrainRequest(BaseModel):
    channel: ChannelSettings
    q_kind: str = "toeplitz"
    grid_samples: int = Field(default=16, ge=1,
                              description="base bank size; doubled for toeplitz")
    train: TrainSettings = TrainSettings()
    seed: int = 0


class TrainResponse(BaseModel):
    model: dict[str, Any]
    steps: int
    initial_loss: float
    final_loss: float


class EvalRequest(BaseModel):
    predictor: str
    channel: ChannelSettings
    grid_samples: int = Field(default=16, ge=1)
    eval_samples: int = Field(default=20_000, ge=1)
    train: TrainSettings = TrainSettings()
    seed: int = 0
    model: Optional[dict[str, Any]] = Field(
        default=None, description="pre-trained model document; skips building")


class MetricRecordModel(BaseModel):
    predictor: str
    velocity_kmh: float
    snr_db: float
    paths: int
    mse: float
    eval_samples: int
    seed: int


class SweepRequest(BaseModel):
    obs_len: int = 16
    step: int = 4
    paths: int = 1
    snr_db: list[float] = [10.0]
    velocities_kmh: list[float] = [float(v) for v in range(0, 101, 10)]
    grid_samples: int = 16
    q_kinds: list[str] = ["circulant", "toeplitz"]
    predictors: Optional[list[str]] = None
    eval_samples: int = 20_000
    minibatches: int = 3000
    batch_size: int = 50
    learning_rate: float = 1e-3
    seed: int = 0
    carrier_freq_hz: float = 2e9
    symbol_duration_s: float = 20.57e-6


class SweepResponse(BaseModel):
    records: list[MetricRecordModel]


class PredictRequest(BaseModel):
    model: dict[str, Any]
    observations: list[list[float]] = Field(
        description="newest-first window as [re, im] pairs")


class PredictResponse(BaseModel):
    estimate: list[float]
    model_kind: str


class SelftestResponse(BaseModel):
    passed: bool
    checks: list[dict[str, Any]]
