import numpy as np
import pytest

from chanpred.covariance import (CovarianceSpec, covariance_at, extended_cov,
                                 extract_parts, selection_ops, toeplitz_cov)

TS = 20.57e-6

J0_FIRST_ROOT = 2.404825557695773


def random_line_spec(rng, paths: int = 3) -> CovarianceSpec:
    dopplers = rng.uniform(-200, 200, paths)
    powers = rng.dirichlet(np.ones(paths))
    return CovarianceSpec.from_lines(dopplers, powers, TS)


def white_spec(span: int) -> CovarianceSpec:
    """Line spectrum whose lags 1..span-1 vanish: equally spaced tones
    covering the full digital frequency circle."""
    p = span
    dopplers = np.arange(p) / (p * TS)
    return CovarianceSpec.from_lines(dopplers, np.full(p, 1 / p), TS)


class TestSpec:
    def test_rejects_unnormalized_powers(self):
        with pytest.raises(ValueError, match="sum to 1"):
            CovarianceSpec.from_lines([10.0], [0.5], TS)

    def test_rejects_negative_bandwidth(self):
        with pytest.raises(ValueError):
            CovarianceSpec.from_jakes(-1.0, TS)

    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError, match="kind"):
            CovarianceSpec("fancy", TS)


class TestCovarianceAt:
    def test_unit_variance_at_zero(self):
        rng = np.random.default_rng(0)
        assert covariance_at(random_line_spec(rng), 0) == pytest.approx(1.0)
        jakes = CovarianceSpec.from_jakes(100.0, TS)
        assert covariance_at(jakes, 0) == pytest.approx(1.0)

    def test_jakes_first_root(self):
        # choose the bandwidth so lag 1 hits the first J0 root
        bd = J0_FIRST_ROOT / (2 * np.pi * TS)
        jakes = CovarianceSpec.from_jakes(bd, TS)
        assert abs(covariance_at(jakes, 1)) <= 1e-10

    def test_single_tone_unit_modulus(self):
        spec = CovarianceSpec.from_lines([123.0], [1.0], TS)
        lags = np.arange(10)
        values = covariance_at(spec, lags)
        np.testing.assert_allclose(np.abs(values), np.ones(10), atol=1e-14)
        np.testing.assert_allclose(values,
                                   np.exp(2j * np.pi * 123.0 * TS * lags),
                                   atol=1e-14)

    def test_jakes_real_and_bounded(self):
        jakes = CovarianceSpec.from_jakes(185.0, TS)
        values = covariance_at(jakes, np.arange(200))
        assert np.max(np.abs(values.imag)) == 0.0
        assert np.max(np.abs(values)) <= 1.0 + 1e-15


class TestToeplitzCov:
    def test_size_one(self):
        spec = CovarianceSpec.from_jakes(50.0, TS)
        np.testing.assert_allclose(toeplitz_cov(spec, 1), [[1.0]], atol=1e-15)

    def test_four_by_four_layout(self):
        # diagonal holds R[0], entry (i, j) holds R[j-i] above the diagonal
        # and its conjugate below
        rng = np.random.default_rng(1)
        spec = random_line_spec(rng)
        r = covariance_at(spec, np.arange(4))
        cov = toeplitz_cov(spec, 4)
        for i in range(4):
            for j in range(4):
                expected = r[j - i] if j >= i else np.conj(r[i - j])
                assert cov[i, j] == pytest.approx(expected, abs=1e-15)

    def test_hermitian_exactly(self):
        rng = np.random.default_rng(2)
        cov = toeplitz_cov(random_line_spec(rng), 8)
        np.testing.assert_array_equal(cov, cov.conj().T)

    def test_psd_eigenvalues(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            cov = toeplitz_cov(random_line_spec(rng, paths=4), 12)
            eigs = np.linalg.eigvalsh(cov)
            assert eigs.min() >= -1e-10


class TestExtendedCov:
    def test_example_layout_m4_l1(self):
        rng = np.random.default_rng(4)
        spec = random_line_spec(rng)
        ext = extended_cov(spec, 4, 1)
        r = covariance_at(spec, np.arange(5))
        assert ext.shape == (5, 5)
        np.testing.assert_allclose(ext[0], r, atol=1e-15)
        # bottom-right block is the window covariance
        np.testing.assert_array_equal(ext[1:, 1:], toeplitz_cov(spec, 4))

    def test_rejects_zero_step(self):
        spec = CovarianceSpec.from_jakes(50.0, TS)
        with pytest.raises(ValueError):
            extended_cov(spec, 4, 0)

    def test_embedding_identity_on_window(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            spec = random_line_spec(rng)
            m = int(rng.integers(2, 33))
            step = int(rng.integers(1, 9))
            ext = extended_cov(spec, m, step)
            ops = selection_ops(m, step)
            _, cov = extract_parts(ext, ops)
            np.testing.assert_array_equal(cov, toeplitz_cov(spec, m))


class TestSelectionOps:
    def test_selector_shapes_and_identities(self):
        ops = selection_ops(4, 1)
        assert ops.first_row.shape == (5,)
        assert ops.embed.shape == (5, 4)
        assert ops.first_row @ ops.first_row == 1.0
        np.testing.assert_array_equal(ops.embed.T @ ops.embed, np.eye(4))
        # the embedding never touches the top rows
        assert np.all(ops.embed[:1] == 0)


class TestExtractParts:
    def test_example_corr_row_m4_l1(self):
        rng = np.random.default_rng(6)
        spec = random_line_spec(rng)
        ext = extended_cov(spec, 4, 1)
        corr, _ = extract_parts(ext, selection_ops(4, 1))
        np.testing.assert_allclose(corr, covariance_at(spec, np.arange(1, 5)),
                                   atol=1e-15)

    def test_white_process_unpredictable(self):
        m, step = 6, 2
        spec = white_spec(m + step)
        ext = extended_cov(spec, m, step)
        corr, _ = extract_parts(ext, selection_ops(m, step))
        np.testing.assert_allclose(corr, np.zeros(m), atol=1e-12)

    def test_matches_direct_indexing_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            spec = random_line_spec(rng)
            m = int(rng.integers(2, 17))
            step = int(rng.integers(1, 5))
            ext = extended_cov(spec, m, step)
            corr, cov = extract_parts(ext, selection_ops(m, step))
            expected_corr = covariance_at(spec, np.arange(step, m + step))
            assert np.max(np.abs(corr - expected_corr)) <= 1e-15
            # matrix-product route agrees exactly with the slicing route
            ops = selection_ops(m, step)
            np.testing.assert_array_equal(corr, ops.first_row @ ext @ ops.embed)
            np.testing.assert_array_equal(cov, ops.embed.T @ ext @ ops.embed)

    def test_dimension_mismatch(self):
        spec = CovarianceSpec.from_jakes(10.0, TS)
        ext = extended_cov(spec, 4, 1)
        with pytest.raises(ValueError, match="shape"):
            extract_parts(ext, selection_ops(4, 2))
