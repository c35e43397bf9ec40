"""FastAPI application wrapping the predictor library.

The service is stateless: training returns the model document in the
response body and prediction takes a document back in. Long sweeps run
synchronously.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__, harness, modelio, nn, predictors, structured
from ..errors import ConfigError, TrainingError
from ..gridded import feature_full, gridded_row
from ..lmmse import predict as row_predict
from ..selftest import CHECKS
from ..structured import feature_compressed, structured_row
from . import schemas


def _model_params(ch: schemas.ChannelSettings):
    cfg = harness.ExperimentConfig(
        obs_len=ch.obs_len, step=ch.step, paths=ch.paths,
        snr_db=(ch.snr_db,), velocities_kmh=(ch.velocity_kmh,),
        carrier_freq_hz=ch.carrier_freq_hz,
        symbol_duration_s=ch.symbol_duration_s)
    return cfg.model_params(ch.velocity_kmh)


def create_app() -> FastAPI:
    app = FastAPI(title="chanpred service", version=__version__)

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/train", response_model=schemas.TrainResponse)
    def train(req: schemas.TrainRequest):
        if req.q_kind not in (structured.Q_CIRCULANT, structured.Q_TOEPLITZ):
            raise HTTPException(400, f"unknown q_kind {req.q_kind!r}")
        params = _model_params(req.channel)
        noise_var = harness.snr_db_to_noise_var(req.channel.snr_db)
        num_samples = predictors.samples_for_kind(req.grid_samples, req.q_kind)
        bank_rng = harness.substream(req.seed, 0, 0, 900, num_samples)
        train_rng = harness.substream(req.seed, 0, 0, 0, 0)
        try:
            bank = predictors.build_filter_bank(params, req.channel.step,
                                                noise_var, num_samples, bank_rng)
            cfg = nn.TrainConfig(minibatches=req.train.minibatches,
                                 batch_size=req.train.batch_size,
                                 learning_rate=req.train.learning_rate,
                                 seed=req.seed)
            trained = predictors.train_network(bank, req.q_kind, params, cfg,
                                               train_rng)
        except TrainingError as exc:
            raise HTTPException(500, f"training failed: {exc}") from exc
        trace = trained.loss_trace
        head = trace[: min(100, len(trace))]
        tail = trace[-min(100, len(trace)):]
        doc = modelio.network_document(
            trained.predictor.weights, obs_len=req.channel.obs_len,
            step=req.channel.step, noise_var=noise_var, q_kind=req.q_kind,
            velocity_kmh=req.channel.velocity_kmh, paths=req.channel.paths,
            seed=req.seed)
        return schemas.TrainResponse(model=doc, steps=len(trace),
                                     initial_loss=float(head.mean()),
                                     final_loss=float(tail.mean()))

    @app.post("/eval", response_model=schemas.MetricRecordModel)
    def evaluate(req: schemas.EvalRequest):
        try:
            display = predictors.canonical_name(req.predictor)
            slug = predictors.predictor_slug(display)
        except ValueError as exc:
            raise HTTPException(400, str(exc)) from exc
        params = _model_params(req.channel)
        noise_var = harness.snr_db_to_noise_var(req.channel.snr_db)
        try:
            predictor = _predictor_for_eval(req, slug, params, noise_var)
            rng_eval = harness.substream(req.seed, 0, 0, 0, 1)
            mse = harness.evaluate_mse(predictor, params, req.channel.step,
                                       noise_var, req.eval_samples, rng_eval)
        except TrainingError as exc:
            raise HTTPException(500, f"numeric failure: {exc}") from exc
        except ValueError as exc:
            raise HTTPException(400, str(exc)) from exc
        return schemas.MetricRecordModel(
            predictor=display, velocity_kmh=req.channel.velocity_kmh,
            snr_db=req.channel.snr_db, paths=req.channel.paths, mse=mse,
            eval_samples=req.eval_samples, seed=req.seed)

    def _predictor_for_eval(req: schemas.EvalRequest, slug: str, params,
                            noise_var: float):
        if req.model is not None and slug in ("nn_toep", "nn_circ",
                                              "structured_toep", "structured_circ",
                                              "gridded"):
            return _predictor_from_document(req.model, noise_var)
        cfg = harness.ExperimentConfig(
            obs_len=req.channel.obs_len, step=req.channel.step,
            paths=req.channel.paths, snr_db=(req.channel.snr_db,),
            velocities_kmh=(req.channel.velocity_kmh,),
            grid_samples=req.grid_samples, eval_samples=req.eval_samples,
            minibatches=req.train.minibatches, batch_size=req.train.batch_size,
            learning_rate=req.train.learning_rate, seed=req.seed,
            carrier_freq_hz=req.channel.carrier_freq_hz,
            symbol_duration_s=req.channel.symbol_duration_s)
        builder = harness.PointBuilder(cfg, params, noise_var, 0, 0)
        rng_build = harness.substream(req.seed, 0, 0, 0, 0)
        return builder.build(slug, rng_build)

    def _predictor_from_document(doc: dict, noise_var: float):
        obj, header = modelio.load_document(doc)
        if doc["kind"] == modelio.KIND_BANK:
            return predictors.GriddedPredictor(obj)
        if doc["kind"] == modelio.KIND_STRUCTURED:
            return predictors.StructuredPredictor(obj)
        q = structured.q_matrix(header["q_kind"], int(header["obs_len"]))
        name = "NN Toep" if header["q_kind"] == structured.Q_TOEPLITZ else "NN Circ"
        return predictors.NetworkPredictor(obj, q, float(header["noise_var"]), name)

    @app.post("/sweep", response_model=schemas.SweepResponse)
    def sweep(req: schemas.SweepRequest):
        kwargs = req.model_dump()
        if kwargs.get("predictors") is None:
            kwargs.pop("predictors")
        for key in ("snr_db", "velocities_kmh", "q_kinds", "predictors"):
            if key in kwargs and kwargs[key] is not None:
                kwargs[key] = tuple(kwargs[key])
        try:
            cfg = harness.ExperimentConfig(**kwargs)
        except (ConfigError, ValueError) as exc:
            raise HTTPException(400, str(exc)) from exc
        records = harness.run_experiment(cfg)
        return schemas.SweepResponse(
            records=[schemas.MetricRecordModel(**dataclasses.asdict(r))
                     for r in records])

    @app.post("/predict", response_model=schemas.PredictResponse)
    def predict(req: schemas.PredictRequest):
        try:
            obj, header = modelio.load_document(req.model)
        except (KeyError, ValueError) as exc:
            raise HTTPException(400, f"bad model document: {exc}") from exc
        window = np.array([complex(re, im) for re, im in req.observations])
        obs_len = int(header["obs_len"])
        if window.shape != (obs_len,):
            raise HTTPException(400, f"expected {obs_len} observations, "
                                     f"got {len(window)}")
        noise_var = float(header["noise_var"])
        kind = req.model["kind"]
        if kind == modelio.KIND_BANK:
            row = gridded_row(obj, feature_full(window, noise_var))
            estimate = row_predict(row, window)
        elif kind == modelio.KIND_STRUCTURED:
            feat = feature_compressed(window, obj.q, noise_var)
            estimate = row_predict(structured_row(obj, feat), window)
        else:
            q = structured.q_matrix(header["q_kind"], obs_len)
            feat = feature_compressed(window, q, noise_var)
            estimate = nn.predict_nn(obj, feat, window)
        return schemas.PredictResponse(estimate=[estimate.real, estimate.imag],
                                       model_kind=kind)

    @app.post("/selftest", response_model=schemas.SelftestResponse)
    def selftest():
        results = []
        passed = True
        for name, check in CHECKS:
            try:
                ok = bool(check())
            except Exception:
                ok = False
            results.append({"name": name, "passed": ok})
            passed = passed and ok
        return schemas.SelftestResponse(passed=passed, checks=results)

    return app


app = create_app()
