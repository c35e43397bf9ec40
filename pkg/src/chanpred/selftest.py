"""Built-in numeric self-checks, runnable from the CLI.

Each check re-derives an expected value through an independent route
(series expansion, brute-force summation, finite differences) and compares
the library against it. Returns True when every check passes.
"""

from __future__ import annotations

import numpy as np

from . import linalg, nn, structured
from .channel import ModelParams, make_batch
from .covariance import CovarianceSpec, extended_cov
from .gridded import GridStrategy, build_bank, feature_full, gridded_row
from .lmmse import lmmse_direct, lmmse_extended
from .nn import init_from_structured, loss_and_grad
from .predictors import build_filter_bank


def _bessel_series(x: float, terms: int = 40) -> float:
    total, term = 0.0, 1.0
    q = -(x * x) / 4.0
    for k in range(terms):
        total += term
        term *= q / ((k + 1) * (k + 1))
    return total


def _check_bessel() -> bool:
    xs = np.linspace(-10, 10, 81)
    return all(abs(linalg.bessel_j0(float(x)) - _bessel_series(float(x))) <= 1e-12
               for x in xs)


def _check_dft() -> bool:
    for m in (1, 4, 16):
        q = linalg.dft_matrix(m, m)
        if np.max(np.abs(q @ q.conj().T - np.eye(m))) > 1e-13:
            return False
    q = linalg.dft_matrix(8, 4)
    return np.max(np.abs(q.conj().T @ q - np.eye(4))) <= 1e-13


def _check_solve() -> bool:
    rng = np.random.default_rng(7)
    a = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    a = a @ a.conj().T + 8 * np.eye(8)
    b = rng.standard_normal((8, 3)) + 1j * rng.standard_normal((8, 3))
    x = linalg.hermitian_solve(a, b)
    return np.linalg.norm(a @ x - b) <= 1e-10 * np.linalg.norm(b)


def _check_lmmse_equivalence() -> bool:
    rng = np.random.default_rng(11)
    for _ in range(20):
        p = int(rng.integers(1, 4))
        f = rng.uniform(-200, 200, p)
        w = rng.dirichlet(np.ones(p))
        spec = CovarianceSpec.from_lines(f, w, 20.57e-6)
        m = int(rng.integers(2, 17))
        step = int(rng.integers(1, 5))
        nv = float(10 ** rng.uniform(-3, 1))
        direct = lmmse_direct(spec, m, step, nv).weights
        ext = lmmse_extended(spec, m, step, nv).output_row
        if np.max(np.abs(direct - ext)) > 1e-12 * max(np.max(np.abs(direct)), 1e-300):
            return False
    return True


def _check_embedding() -> bool:
    spec = CovarianceSpec.from_lines([120.0, -60.0], [0.5, 0.5], 20.57e-6)
    ext = extended_cov(spec, 6, 2)
    from .covariance import extract_parts, selection_ops, toeplitz_cov
    ops = selection_ops(6, 2)
    corr, cov = extract_parts(ext, ops)
    ok1 = np.array_equal(cov, toeplitz_cov(spec, 6))
    ok2 = np.array_equal(corr, ops.first_row @ ext @ ops.embed)
    return ok1 and ok2


def _check_init_equality() -> bool:
    params = ModelParams(2e9, 20.57e-6, 60 / 3.6, 1, 8, 4)
    bank = build_filter_bank(params, 2, 0.1, 8)
    rng = np.random.default_rng(3)
    for kind in (structured.Q_CIRCULANT, structured.Q_TOEPLITZ):
        model = structured.from_bank(bank, kind)
        weights = init_from_structured(model)
        for _ in range(10):
            y = rng.standard_normal(8) + 1j * rng.standard_normal(8)
            feat = structured.feature_compressed(y, model.q, 0.1)
            row = structured.structured_row(model, feat).weights
            out = nn.forward(weights, feat)
            if np.max(np.abs(nn.output_to_row(out) - row)) > 1e-12:
                return False
    return True


def _check_gradients() -> bool:
    params = ModelParams(2e9, 20.57e-6, 50 / 3.6, 1, 4, 2)
    bank = build_filter_bank(params, 2, 0.5, 4)
    model = structured.from_bank(bank, structured.Q_CIRCULANT)
    weights = init_from_structured(model)
    rng = np.random.default_rng(5)
    batch = make_batch(params, 2, 3, 0.5, rng)
    _, grads = loss_and_grad(weights, batch, model.q, 0.5)
    eps = 1e-5
    for name, block in weights.blocks().items():
        it = np.nditer(block, flags=["multi_index"])
        for _ in range(min(block.size, 5)):
            idx = it.multi_index
            orig = block[idx]
            block[idx] = orig + eps
            up, _ = loss_and_grad(weights, batch, model.q, 0.5)
            block[idx] = orig - eps
            dn, _ = loss_and_grad(weights, batch, model.q, 0.5)
            block[idx] = orig
            fd = (up - dn) / (2 * eps)
            an = grads.blocks()[name][idx]
            if abs(fd - an) > 1e-5 * max(abs(fd), abs(an), 1e-8):
                return False
            it.iternext()
    return True


def _check_bank_bias() -> bool:
    params = ModelParams(2e9, 20.57e-6, 80 / 3.6, 1, 8, 4)
    bank = build_bank(GridStrategy(8), params, 2, 0.1)
    if not np.all(bank.bias <= 1e-12):
        return False
    feat = feature_full(np.ones(8, dtype=complex), 0.1)
    row = gridded_row(bank, feat)
    return bool(np.all(np.isfinite(row.weights)))


CHECKS = [
    ("bessel j0 vs power series", _check_bessel),
    ("dft unitarity", _check_dft),
    ("hermitian solve residual", _check_solve),
    ("wiener direct vs extended", _check_lmmse_equivalence),
    ("covariance embedding identities", _check_embedding),
    ("network init equality", _check_init_equality),
    ("analytic vs finite-difference gradients", _check_gradients),
    ("bank bias terms", _check_bank_bias),
]


def run_selftest(verbose: bool = True) -> bool:
    """Run every check; prints one line per check when verbose."""
    all_ok = True
    for name, check in CHECKS:
        try:
            ok = bool(check())
        except Exception as exc:  # a crashed check is a failed check
            ok = False
            if verbose:
                print(f"FAIL {name}: {exc}")
                all_ok = False
                continue
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'} {name}")
        all_ok = all_ok and ok
    return all_ok
