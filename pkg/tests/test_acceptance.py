"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines while the suite executes.
"""

import time

import numpy as np
import pytest

from chanpred import predictors as pred
from chanpred import structured
from chanpred.channel import ModelParams, make_batch
from chanpred.covariance import CovarianceSpec
from chanpred.harness import (ExperimentConfig, evaluate_mse, run_experiment,
                              snr_db_to_noise_var, substream, write_csv)
from chanpred.linalg import logdet, softmax
from chanpred.lmmse import (analytic_single_path_mse, lmmse_direct,
                            lmmse_extended)
from chanpred.nn import (TrainConfig, forward, init_from_structured,
                         loss_and_grad, output_to_row)
from chanpred.structured import (Q_CIRCULANT, Q_TOEPLITZ, feature_compressed,
                                 fit_spectral_weights, from_bank, q_matrix,
                                 structured_row)

TS = 20.57e-6
FC = 2e9


def _params(velocity_kmh: float, obs_len: int = 16, step: int = 4,
            paths: int = 1) -> ModelParams:
    return ModelParams(FC, TS, velocity_kmh / 3.6, paths, obs_len, step)


def _report(num: int, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE CRITERION {num}: {'PASS' if ok else 'FAIL'} ({detail})")


def test_criterion_1_reformulation_exactness():
    """Extended-window filter row equals the direct Wiener row, 500 cases."""
    start = time.time()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(500):
        paths = int(rng.integers(1, 5))
        spec = CovarianceSpec.from_lines(rng.uniform(-250, 250, paths),
                                         rng.dirichlet(np.ones(paths)), TS)
        m = int(rng.integers(1, 17))
        step = int(rng.integers(1, 5))
        noise_var = float(10 ** rng.uniform(-3, 1))
        direct = lmmse_direct(spec, m, step, noise_var).weights
        ext_row = lmmse_extended(spec, m, step, noise_var).output_row
        scale = max(np.max(np.abs(direct)), 1e-300)
        worst = max(worst, np.max(np.abs(ext_row - direct)) / scale)
    elapsed = time.time() - start
    ok = worst <= 1e-12 and elapsed < 5.0
    _report(1, ok, f"max relative gap {worst:.2e}, {elapsed:.1f}s")
    assert worst <= 1e-12
    assert elapsed < 5.0


def test_criterion_2_single_path_analytic_baseline():
    """Genie LMMSE matches s/(M+s) at three SNRs, independent of velocity."""
    start = time.time()
    n_eval = 20_000
    failures = []
    for snr_db in (10.0, 0.0, -10.0):
        noise_var = snr_db_to_noise_var(snr_db)
        expected = analytic_single_path_mse(16, noise_var)
        band = 3.0 * expected * np.sqrt(2.0 / n_eval)
        for velocity in (0.0, 50.0, 100.0):
            params = _params(velocity)
            genie = pred.PerfectPredictor(4, noise_var)
            mse = evaluate_mse(genie, params, 4, noise_var, n_eval,
                               substream(0, int(snr_db), int(velocity)))
            if abs(mse - expected) > band:
                failures.append((snr_db, velocity, mse, expected))
    elapsed = time.time() - start
    analytic = {10.0: 6.211e-3, 0.0: 5.882e-2, -10.0: 3.846e-1}
    for snr_db, rounded in analytic.items():
        assert analytic_single_path_mse(16, snr_db_to_noise_var(snr_db)) == \
            pytest.approx(rounded, rel=1e-3)
    ok = not failures and elapsed < 30.0
    _report(2, ok, f"{9 - len(failures)}/9 points in the 3-sigma band, "
                   f"{elapsed:.1f}s")
    assert not failures, failures
    assert elapsed < 30.0


def test_criterion_3_initialization_equality():
    """Freshly initialized network reproduces the compressed predictor."""
    start = time.time()
    rng = np.random.default_rng(7)
    worst = 0.0
    for kind in (Q_CIRCULANT, Q_TOEPLITZ):
        params = _params(60.0)
        num = pred.samples_for_kind(16, kind)
        bank = pred.build_filter_bank(params, 4, 0.1, num)
        model = from_bank(bank, kind)
        weights = init_from_structured(model)
        for _ in range(100):
            window = rng.standard_normal(16) + 1j * rng.standard_normal(16)
            feat = feature_compressed(window, model.q, 0.1)
            expected = structured_row(model, feat).weights
            got = output_to_row(forward(weights, feat))
            worst = max(worst, float(np.max(np.abs(got - expected))))
    elapsed = time.time() - start
    ok = worst <= 1e-12 and elapsed < 1.0
    _report(3, ok, f"max deviation {worst:.2e}, {elapsed:.2f}s")
    assert worst <= 1e-12
    assert elapsed < 1.0


def test_criterion_4_gradient_correctness():
    """Analytic gradients match central finite differences on all blocks."""
    start = time.time()
    params = _params(50.0, obs_len=4, step=2)
    noise_var = 0.5
    bank = pred.build_filter_bank(params, 2, noise_var, 4)
    model = from_bank(bank, Q_CIRCULANT)
    weights = init_from_structured(model)
    batch = make_batch(params, 2, 3, noise_var, np.random.default_rng(11))
    _, grads = loss_and_grad(weights, batch, model.q, noise_var)
    eps = 1e-5
    worst = 0.0
    for name, block in weights.blocks().items():
        g_block = grads.blocks()[name]
        it = np.nditer(block, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            orig = block[idx]
            block[idx] = orig + eps
            up, _ = loss_and_grad(weights, batch, model.q, noise_var)
            block[idx] = orig - eps
            down, _ = loss_and_grad(weights, batch, model.q, noise_var)
            block[idx] = orig
            fd = (up - down) / (2 * eps)
            scale = max(abs(fd), abs(g_block[idx]), 1e-8)
            worst = max(worst, abs(fd - g_block[idx]) / scale)
            it.iternext()
    elapsed = time.time() - start
    ok = worst <= 1e-5 and elapsed < 5.0
    _report(4, ok, f"max relative gradient gap {worst:.2e}, {elapsed:.1f}s")
    assert worst <= 1e-5
    assert elapsed < 5.0


def _trained_network(kind: str, params: ModelParams, noise_var: float,
                     seed: int, vel_idx: int, snr_idx: int,
                     base_samples: int = 16):
    num = pred.samples_for_kind(base_samples, kind)
    bank = pred.build_filter_bank(params, 4, noise_var, num)
    cfg = TrainConfig(minibatches=3000, batch_size=50, learning_rate=1e-3,
                      seed=seed)
    slug_idx = 5 if kind == Q_TOEPLITZ else 6
    rng = substream(seed, vel_idx, snr_idx, slug_idx, 0)
    return bank, pred.train_network(bank, kind, params, cfg, rng)


def test_criterion_5_low_snr10_figure_orderings():
    """Trained NN (doubled basis) beats the J0-based filter at every
    velocity and the genie filter at low velocity, three seeds."""
    start = time.time()
    noise_var = snr_db_to_noise_var(10.0)
    n_eval = 20_000
    velocities = [float(v) for v in range(10, 101, 10)]
    jakes_failures, perfect_failures = [], []
    for seed in (0, 1, 2):
        for vel_idx, velocity in enumerate(velocities):
            params = _params(velocity)
            _, trained = _trained_network(Q_TOEPLITZ, params, noise_var, seed,
                                          vel_idx, 0)
            mse_nn = evaluate_mse(trained.predictor, params, 4, noise_var,
                                  n_eval, substream(seed, vel_idx, 0, 5, 1))
            jakes = pred.build_jakes(params, 4, noise_var)
            mse_jakes = evaluate_mse(jakes, params, 4, noise_var, n_eval,
                                     substream(seed, vel_idx, 0, 1, 1))
            if not mse_nn < mse_jakes:
                jakes_failures.append((seed, velocity, mse_nn, mse_jakes))
            if velocity in (10.0, 20.0):
                genie = pred.PerfectPredictor(4, noise_var)
                mse_perfect = evaluate_mse(genie, params, 4, noise_var, n_eval,
                                           substream(seed, vel_idx, 0, 0, 1))
                if not mse_nn < mse_perfect:
                    perfect_failures.append((seed, velocity, mse_nn,
                                             mse_perfect))
    elapsed = time.time() - start
    ok = not jakes_failures and not perfect_failures and elapsed < 600.0
    _report(5, ok, f"{len(jakes_failures)} J0-ordering misses, "
                   f"{len(perfect_failures)} genie-ordering misses, "
                   f"{elapsed:.0f}s")
    assert not jakes_failures, jakes_failures
    assert not perfect_failures, perfect_failures
    assert elapsed < 600.0


def test_criterion_6_snr_minus10_networks_beat_everything():
    """At -10 dB both trained networks outperform the five classical
    predictors at every velocity on the default grid, three seeds."""
    start = time.time()
    noise_var = snr_db_to_noise_var(-10.0)
    n_eval = 20_000
    velocities = [float(v) for v in range(0, 101, 10)]
    failures = []
    for seed in (0, 1, 2):
        for vel_idx, velocity in enumerate(velocities):
            params = _params(velocity)
            bank16 = pred.build_filter_bank(params, 4, noise_var, 16)
            bank32 = pred.build_filter_bank(params, 4, noise_var, 32)
            others = {
                "perfect": evaluate_mse(pred.PerfectPredictor(4, noise_var),
                                        params, 4, noise_var, n_eval,
                                        substream(seed, vel_idx, 0, 0, 1)),
                "jakes": evaluate_mse(pred.build_jakes(params, 4, noise_var),
                                      params, 4, noise_var, n_eval,
                                      substream(seed, vel_idx, 0, 1, 1)),
                "gridded": evaluate_mse(pred.GriddedPredictor(bank16),
                                        params, 4, noise_var, n_eval,
                                        substream(seed, vel_idx, 0, 2, 1)),
                "structured_toep": evaluate_mse(
                    pred.build_structured(bank32, Q_TOEPLITZ), params, 4,
                    noise_var, n_eval, substream(seed, vel_idx, 0, 3, 1)),
                "structured_circ": evaluate_mse(
                    pred.build_structured(bank16, Q_CIRCULANT), params, 4,
                    noise_var, n_eval, substream(seed, vel_idx, 0, 4, 1)),
            }
            cfg = TrainConfig(minibatches=3000, batch_size=50,
                              learning_rate=1e-3, seed=seed)
            for slug_idx, (kind, bank) in ((5, (Q_TOEPLITZ, bank32)),
                                           (6, (Q_CIRCULANT, bank16))):
                trained = pred.train_network(
                    bank, kind, params, cfg,
                    substream(seed, vel_idx, 0, slug_idx, 0))
                mse_nn = evaluate_mse(trained.predictor, params, 4, noise_var,
                                      n_eval,
                                      substream(seed, vel_idx, 0, slug_idx, 1))
                beaten = {name: mse_nn < other
                          for name, other in others.items()}
                if not all(beaten.values()):
                    losers = [name for name, win in beaten.items() if not win]
                    failures.append((seed, velocity, kind, mse_nn,
                                     {k: round(others[k], 5) for k in losers}))
    elapsed = time.time() - start
    ok = not failures and elapsed < 600.0
    _report(6, ok, f"{len(failures)} ordering misses "
                   f"({sorted(set((f[1]) for f in failures))} km/h), "
                   f"{elapsed:.0f}s")
    assert not failures, failures
    assert elapsed < 600.0


def test_criterion_7_grid_refinement():
    """A 256-sample bank sits within 10% of the genie value and is no
    worse than the 16-sample bank on a common evaluation stream."""
    start = time.time()
    noise_var = snr_db_to_noise_var(10.0)
    params = _params(10.0)
    n_eval = 20_000
    g16 = pred.GriddedPredictor(pred.build_filter_bank(params, 4, noise_var, 16))
    g256 = pred.GriddedPredictor(pred.build_filter_bank(params, 4, noise_var, 256))
    mse16 = evaluate_mse(g16, params, 4, noise_var, n_eval, substream(0, 7))
    mse256 = evaluate_mse(g256, params, 4, noise_var, n_eval, substream(0, 7))
    expected = analytic_single_path_mse(16, noise_var)
    elapsed = time.time() - start
    within = mse256 <= 1.10 * expected
    monotone = mse256 <= mse16 * (1 + 1e-9)
    ok = within and monotone and elapsed < 120.0
    _report(7, ok, f"256-sample bank at {mse256 / expected:.3f}x the genie "
                   f"value, refinement gap {mse16 - mse256:+.2e}, "
                   f"{elapsed:.0f}s")
    assert within, (mse256, expected)
    assert monotone, (mse16, mse256)
    assert elapsed < 120.0


def test_criterion_8_structural_invariants(tmp_path):
    """Bias terms, softmax behavior, fit-residual ordering, determinism."""
    start = time.time()
    rng = np.random.default_rng(99)
    # Hermitian positive-definite residue with real negative log-determinant
    for velocity in (30.0, 90.0):
        params = _params(velocity, obs_len=8, step=2)
        bank = pred.build_filter_bank(params, 2, 0.1, 8)
        for i, block in enumerate(bank.observation_blocks):
            residue = np.eye(8) - block
            assert np.max(np.abs(residue - residue.conj().T)) <= 1e-10
            assert np.linalg.eigvalsh(
                0.5 * (residue + residue.conj().T)).min() > 0
            value = logdet(residue)
            assert abs(value.imag) <= 1e-9
            assert value.real <= 0
            assert bank.bias[i] == pytest.approx(value.real, abs=1e-12)

    # softmax convexity, normalization and shift invariance
    scores = rng.standard_normal(32) * 50
    p = softmax(scores)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(p > 0)
    np.testing.assert_allclose(p, softmax(scores + 1e3), atol=1e-13)

    # fit residual ordering: doubled basis never worse, strictly better on
    # single-path filters
    params = _params(70.0, obs_len=8, step=2)
    bank = pred.build_filter_bank(params, 2, 0.1, 6)
    q1 = q_matrix(Q_CIRCULANT, 8)
    q2 = q_matrix(Q_TOEPLITZ, 8)
    for block in bank.observation_blocks:
        r1 = np.linalg.norm(block - q1.conj().T @ np.diag(
            fit_spectral_weights(block, q1)) @ q1, "fro")
        r2 = np.linalg.norm(block - q2.conj().T @ np.diag(
            fit_spectral_weights(block, q2)) @ q2, "fro")
        assert r2 < r1

    # CSV determinism under a fixed seed
    cfg = ExperimentConfig(obs_len=8, step=2, velocities_kmh=(20.0,),
                           snr_db=(0.0,), grid_samples=4,
                           predictors=("lmmse_perfect", "gridded", "nn_circ"),
                           eval_samples=500, minibatches=10, batch_size=10,
                           seed=1)
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    write_csv(run_experiment(cfg), str(first))
    write_csv(run_experiment(cfg), str(second))
    assert first.read_bytes() == second.read_bytes()

    elapsed = time.time() - start
    ok = elapsed < 60.0
    _report(8, ok, f"invariants hold, {elapsed:.0f}s")
    assert elapsed < 60.0
