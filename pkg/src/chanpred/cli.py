"""Command-line client for the predictor service.

Compute commands (sweep, train, eval) go through the HTTP API: against a
remote server when --url is given, otherwise against an in-process
instance of the same app. File handling (configs, CSV output, model files)
stays on the client side.

Exit codes: 0 success, 2 config error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .errors import ConfigError
from .harness import (ExperimentConfig, MetricRecord, load_config,
                      with_paper_scale, write_csv)
from .selftest import run_selftest

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class ServiceClient:
    """httpx-based client; in-process ASGI transport when no URL is given."""

    def __init__(self, url: str | None = None):
        if url:
            import httpx

            self._client = httpx.Client(base_url=url, timeout=None)
        else:
            from fastapi.testclient import TestClient

            from .service import create_app

            self._client = TestClient(create_app(),
                                      raise_server_exceptions=False)

    def post(self, path: str, payload: dict) -> dict:
        response = self._client.post(path, json=payload)
        if response.status_code >= 400:
            detail = response.json().get("detail", response.text)
            raise ServiceError(response.status_code, str(detail))
        return response.json()

    def close(self):
        self._client.close()


class ServiceError(RuntimeError):
    def __init__(self, status: int, detail: str):
        super().__init__(f"service returned {status}: {detail}")
        self.status = status
        self.detail = detail

    @property
    def exit_code(self) -> int:
        return EXIT_CONFIG if self.status in (400, 422) else EXIT_NUMERIC


def _add_common_channel_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--velocity-kmh", type=float, default=60.0)
    parser.add_argument("--snr-db", type=float, default=10.0)
    parser.add_argument("--paths", type=int, default=1)
    parser.add_argument("--obs-len", type=int, default=16)
    parser.add_argument("--step", type=int, default=4)
    parser.add_argument("--carrier-freq-hz", type=float, default=2e9)
    parser.add_argument("--symbol-duration-s", type=float, default=20.57e-6)


def _add_train_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--grid-samples", type=int, default=16)
    parser.add_argument("--minibatches", type=int, default=3000)
    parser.add_argument("--batch-size", type=int, default=50)
    parser.add_argument("--learning-rate", type=float, default=1e-3)
    parser.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chanpred",
        description="Benchmark and serve fading-channel predictors.")
    parser.add_argument("--url", default=None,
                        help="service base URL; defaults to an in-process app")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)

    sweep = sub.add_parser("sweep", help="run a velocity/SNR sweep, write CSV")
    sweep.add_argument("--config", help="flat key = value config file")
    sweep.add_argument("--out", help="output CSV path (overrides config)")
    sweep.add_argument("--velocities",
                       help="comma-separated velocities in km/h")
    sweep.add_argument("--snr-db", help="comma-separated SNRs in dB")
    sweep.add_argument("--predictors", help="comma-separated predictor names")
    sweep.add_argument("--paths", type=int)
    sweep.add_argument("--grid-samples", type=int)
    sweep.add_argument("--eval-samples", type=int)
    sweep.add_argument("--seed", type=int)
    sweep.add_argument("--paper-scale", action="store_true",
                       help="evaluate 200000 predictions per point")

    train = sub.add_parser("train", help="train one network, save model file")
    _add_common_channel_flags(train)
    _add_train_flags(train)
    train.add_argument("--q-kind", choices=["circulant", "toeplitz"],
                       default="toeplitz")
    train.add_argument("--out", required=True, help="model file path")

    evaluate = sub.add_parser("eval", help="evaluate one predictor, print MSE")
    _add_common_channel_flags(evaluate)
    _add_train_flags(evaluate)
    evaluate.add_argument("--predictor", required=True)
    evaluate.add_argument("--eval-samples", type=int, default=20_000)
    evaluate.add_argument("--model", help="trained model file to evaluate")

    sub.add_parser("selftest", help="run the built-in numeric checks")
    return parser


def _sweep_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    updates = {}
    if args.velocities:
        updates["velocities_kmh"] = tuple(
            float(v) for v in args.velocities.split(","))
    if args.snr_db:
        updates["snr_db"] = tuple(float(v) for v in args.snr_db.split(","))
    if args.predictors:
        updates["predictors"] = tuple(p.strip()
                                      for p in args.predictors.split(","))
    for name in ("paths", "grid_samples", "eval_samples", "seed"):
        value = getattr(args, name)
        if value is not None:
            updates[name] = value
    if args.out:
        updates["output"] = args.out
    if updates:
        cfg = dataclasses.replace(cfg, **updates)
    if args.paper_scale:
        cfg = with_paper_scale(cfg)
    return cfg


def _channel_payload(args) -> dict:
    return {"velocity_kmh": args.velocity_kmh, "snr_db": args.snr_db,
            "paths": args.paths, "obs_len": args.obs_len, "step": args.step,
            "carrier_freq_hz": args.carrier_freq_hz,
            "symbol_duration_s": args.symbol_duration_s}


def _cmd_sweep(args) -> int:
    try:
        cfg = _sweep_config(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    payload = dataclasses.asdict(cfg)
    payload.pop("output")
    client = ServiceClient(args.url)
    try:
        body = client.post("/sweep", payload)
    finally:
        client.close()
    records = [MetricRecord(**r) for r in body["records"]]
    write_csv(records, cfg.output)
    print(f"wrote {len(records)} records to {cfg.output}")
    return EXIT_OK


def _cmd_train(args) -> int:
    payload = {"channel": _channel_payload(args), "q_kind": args.q_kind,
               "grid_samples": args.grid_samples, "seed": args.seed,
               "train": {"minibatches": args.minibatches,
                         "batch_size": args.batch_size,
                         "learning_rate": args.learning_rate}}
    client = ServiceClient(args.url)
    try:
        body = client.post("/train", payload)
    finally:
        client.close()
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(body["model"], fh)
    print(f"trained {body['steps']} minibatches, "
          f"loss {body['initial_loss']:.6e} -> {body['final_loss']:.6e}; "
          f"saved {args.out}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    payload = {"predictor": args.predictor, "channel": _channel_payload(args),
               "grid_samples": args.grid_samples,
               "eval_samples": args.eval_samples, "seed": args.seed,
               "train": {"minibatches": args.minibatches,
                         "batch_size": args.batch_size,
                         "learning_rate": args.learning_rate}}
    if args.model:
        try:
            with open(args.model, "r", encoding="utf-8") as fh:
                payload["model"] = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"config error: cannot read model file: {exc}",
                  file=sys.stderr)
            return EXIT_CONFIG
    client = ServiceClient(args.url)
    try:
        body = client.post("/eval", payload)
    finally:
        client.close()
    print(f"{body['predictor']},{body['velocity_kmh']:.6e},"
          f"{body['snr_db']:.6e},{body['paths']:d},{body['mse']:.6e},"
          f"{body['eval_samples']:d},{body['seed']:d}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("chanpred.service.app:app", host=args.host, port=args.port)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "serve":
            return _cmd_serve(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "train":
            return _cmd_train(args)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "selftest":
            return EXIT_OK if run_selftest(verbose=True) else EXIT_NUMERIC
    except ServiceError as exc:
        print(str(exc), file=sys.stderr)
        return exc.exit_code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
