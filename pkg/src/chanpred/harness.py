"""Experiment orchestration: velocity/SNR sweeps, MSE evaluation, CSV output.

All randomness flows from one root seed through named substreams, so a
sweep emits byte-identical CSV output across runs regardless of execution
order.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, fields, replace

import numpy as np

from . import predictors as pred
from .channel import ModelParams, make_batch
from .errors import ConfigError
from .nn import TrainConfig
from .predictors import PREDICTOR_ORDER

logger = logging.getLogger(__name__)

KMH_TO_MPS = 1.0 / 3.6
DEFAULT_VELOCITIES = tuple(float(v) for v in range(0, 101, 10))
PAPER_EVAL_SAMPLES = 200_000

# Fixed evaluation chunk so the random-stream consumption is reproducible.
_EVAL_CHUNK = 4096

# Substream labels (final key component) for each consumer of randomness.
_STREAM_BANK = 900
_STREAM_BUILD = 0
_STREAM_EVAL = 1


@dataclass
class ExperimentConfig:
    """Declarative description of one sweep."""

    obs_len: int = 16
    step: int = 4
    paths: int = 1
    snr_db: tuple[float, ...] = (10.0,)
    velocities_kmh: tuple[float, ...] = DEFAULT_VELOCITIES
    grid_samples: int = 16
    q_kinds: tuple[str, ...] = ("circulant", "toeplitz")
    predictors: tuple[str, ...] = tuple(pred.predictor_slug(n) for n in PREDICTOR_ORDER)
    eval_samples: int = 20_000
    minibatches: int = 3000
    batch_size: int = 50
    learning_rate: float = 1e-3
    seed: int = 0
    carrier_freq_hz: float = 2e9
    symbol_duration_s: float = 20.57e-6
    output: str = "results.csv"

    def __post_init__(self):
        if self.eval_samples < 1:
            raise ConfigError("eval_samples must be >= 1", key="eval_samples")
        if any(v < 0 for v in self.velocities_kmh):
            raise ConfigError("velocities must be non-negative", key="velocities_kmh")
        if any(not math.isfinite(s) for s in self.snr_db):
            raise ConfigError("snr_db values must be finite", key="snr_db")
        self.predictors = tuple(pred.predictor_slug(n) for n in self.predictors)
        self.q_kinds = tuple(self.q_kinds)
        self.snr_db = tuple(float(s) for s in self.snr_db)
        self.velocities_kmh = tuple(float(v) for v in self.velocities_kmh)

    def model_params(self, velocity_kmh: float) -> ModelParams:
        return ModelParams(self.carrier_freq_hz, self.symbol_duration_s,
                           velocity_kmh * KMH_TO_MPS, self.paths,
                           self.obs_len, self.step)

    def train_config(self) -> TrainConfig:
        return TrainConfig(minibatches=self.minibatches,
                           batch_size=self.batch_size,
                           learning_rate=self.learning_rate, seed=self.seed)


@dataclass(frozen=True)
class MetricRecord:
    """One result row of a sweep."""

    predictor: str  # display name
    velocity_kmh: float
    snr_db: float
    paths: int
    mse: float
    eval_samples: int
    seed: int


def snr_db_to_noise_var(snr_db: float) -> float:
    """Unit channel power, so noise variance is the inverse linear SNR."""
    return 10.0 ** (-snr_db / 10.0)


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for one (seed, key...) coordinate."""
    return np.random.default_rng(np.random.SeedSequence([seed, *key]))


def evaluate_mse(predictor, params: ModelParams, step: int, noise_var: float,
                 n_eval: int, rng: np.random.Generator) -> float:
    """Mean squared prediction error over ``n_eval`` fresh realizations."""
    if n_eval < 1:
        raise ValueError("n_eval must be >= 1")
    total = 0.0
    remaining = n_eval
    while remaining > 0:
        size = min(_EVAL_CHUNK, remaining)
        batch = make_batch(params, step, size, noise_var, rng)
        estimates = predictor.predict_batch(batch, params)
        total += float(np.sum(np.abs(batch.targets - estimates) ** 2))
        remaining -= size
    return total / n_eval


class PointBuilder:
    """Builds predictors for one (velocity, snr) sweep point, sharing the
    filter banks between the gridded, structured and network predictors."""

    def __init__(self, cfg: ExperimentConfig, params: ModelParams,
                 noise_var: float, vel_idx: int, snr_idx: int):
        self.cfg = cfg
        self.params = params
        self.noise_var = noise_var
        self.vel_idx = vel_idx
        self.snr_idx = snr_idx
        self._banks: dict[int, object] = {}

    def bank(self, num_samples: int):
        if num_samples not in self._banks:
            rng = substream(self.cfg.seed, self.vel_idx, self.snr_idx,
                            _STREAM_BANK, num_samples)
            self._banks[num_samples] = pred.build_filter_bank(
                self.params, self.cfg.step, self.noise_var, num_samples, rng)
        return self._banks[num_samples]

    def build(self, slug: str, rng_build: np.random.Generator):
        cfg = self.cfg
        if slug == "lmmse_perfect":
            return pred.PerfectPredictor(cfg.step, self.noise_var)
        if slug == "lmmse_jakes":
            return pred.build_jakes(self.params, cfg.step, self.noise_var)
        if slug == "gridded":
            return pred.GriddedPredictor(self.bank(cfg.grid_samples))
        if slug in ("structured_toep", "structured_circ"):
            kind = "toeplitz" if slug.endswith("toep") else "circulant"
            bank = self.bank(pred.samples_for_kind(cfg.grid_samples, kind))
            return pred.build_structured(bank, kind)
        if slug in ("nn_toep", "nn_circ"):
            kind = "toeplitz" if slug.endswith("toep") else "circulant"
            bank = self.bank(pred.samples_for_kind(cfg.grid_samples, kind))
            trained = pred.train_network(bank, kind, self.params,
                                         cfg.train_config(), rng_build)
            return trained.predictor
        raise ValueError(f"unknown predictor slug {slug!r}")


def run_experiment(cfg: ExperimentConfig) -> list[MetricRecord]:
    """Evaluate every requested predictor on every sweep point.

    A failed build or evaluation is recorded as an NaN row and the sweep
    continues.
    """
    records = []
    for vel_idx, velocity in enumerate(cfg.velocities_kmh):
        params = cfg.model_params(velocity)
        for snr_idx, snr in enumerate(cfg.snr_db):
            noise_var = snr_db_to_noise_var(snr)
            builder = PointBuilder(cfg, params, noise_var, vel_idx, snr_idx)
            for pred_idx, slug in enumerate(cfg.predictors):
                rng_build = substream(cfg.seed, vel_idx, snr_idx, pred_idx,
                                      _STREAM_BUILD)
                rng_eval = substream(cfg.seed, vel_idx, snr_idx, pred_idx,
                                     _STREAM_EVAL)
                try:
                    predictor = builder.build(slug, rng_build)
                    mse = evaluate_mse(predictor, params, cfg.step, noise_var,
                                       cfg.eval_samples, rng_eval)
                except Exception:
                    logger.exception("sweep point failed: %s at v=%g km/h, "
                                     "SNR=%g dB", slug, velocity, snr)
                    mse = float("nan")
                records.append(MetricRecord(pred.canonical_name(slug), velocity,
                                            snr, cfg.paths, mse,
                                            cfg.eval_samples, cfg.seed))
    return records


CSV_HEADER = "predictor,velocity_kmh,snr_db,paths,mse,eval_samples,seed"


def write_csv(records: list[MetricRecord], path: str):
    """Write records sorted by velocity, SNR, then reporting order."""
    ordered = sorted(records, key=lambda r: (r.velocity_kmh, r.snr_db,
                                             pred.table_rank(r.predictor)))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in ordered:
            fh.write(f"{r.predictor},{r.velocity_kmh:.6e},{r.snr_db:.6e},"
                     f"{r.paths:d},{r.mse:.6e},{r.eval_samples:d},{r.seed:d}\n")


# --- config file handling -------------------------------------------------

_LIST_FIELDS = {"snr_db", "velocities_kmh", "q_kinds", "predictors"}
_INT_FIELDS = {"obs_len", "step", "paths", "grid_samples", "eval_samples",
               "minibatches", "batch_size", "seed"}
_FLOAT_FIELDS = {"learning_rate", "carrier_freq_hz", "symbol_duration_s"}
_STR_FIELDS = {"output"}


def _parse_value(key: str, raw: str, line_no: int):
    raw = raw.strip()
    try:
        if key in _INT_FIELDS:
            return int(raw)
        if key in _FLOAT_FIELDS:
            return float(raw)
        if key == "snr_db" or key == "velocities_kmh":
            return tuple(float(v) for v in raw.split(","))
        if key in _LIST_FIELDS:
            return tuple(v.strip() for v in raw.split(","))
        return raw
    except ValueError as exc:
        raise ConfigError(f"line {line_no}: bad value for {key!r}: {raw!r}",
                          key=key, line=line_no) from exc


def load_config(path: str) -> ExperimentConfig:
    """Parse a flat ``key = value`` config file (lists comma-separated)."""
    known = {f.name for f in fields(ExperimentConfig)}
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ConfigError(f"line {line_no}: expected 'key = value', "
                                  f"got {stripped!r}", line=line_no)
            key, _, raw = stripped.partition("=")
            key = key.strip()
            if key not in known:
                raise ConfigError(f"line {line_no}: unknown key {key!r}",
                                  key=key, line=line_no)
            values[key] = _parse_value(key, raw, line_no)
    try:
        return ExperimentConfig(**values)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def save_config(cfg: ExperimentConfig, path: str):
    """Write a config file that ``load_config`` reads back identically."""
    lines = []
    for f in fields(ExperimentConfig):
        value = getattr(cfg, f.name)
        if f.name in _LIST_FIELDS:
            rendered = ", ".join(str(v) for v in value)
        else:
            rendered = str(value)
        lines.append(f"{f.name} = {rendered}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def with_paper_scale(cfg: ExperimentConfig) -> ExperimentConfig:
    return replace(cfg, eval_samples=PAPER_EVAL_SAMPLES)
