"""Tests for compressive measurement matrices and the projected atom manifold.

Derivative checks use central finite differences of the exact normalized
atom, and the FFT grid path is checked against direct per-node evaluation.
"""

import numpy as np
import pytest

from nomp import (
    CompressiveAtoms,
    EstimatorConfig,
    MaxIterStop,
    MeasurementMatrix,
    compressive_provider,
    extract_spectrum,
    gen_matrix,
    glrt,
    glrt_grid,
    wrap_dist,
)
from nomp import signal_io

M, N = 64, 256


@pytest.fixture(scope="module")
def qpsk():
    return gen_matrix(M, N, "qpsk", seed=123)


class TestGenMatrix:
    def test_qpsk_alphabet(self, qpsk):
        """Every entry is one of the four unit-modulus symbols over sqrt(N)."""
        scaled = qpsk.entries * np.sqrt(N)
        symbols = np.array([1.0, -1.0, 1.0j, -1.0j])
        dist = np.abs(scaled[..., None] - symbols[None, None, :]).min(axis=-1)
        assert dist.max() < 1e-12
        assert qpsk.m == M and qpsk.n == N

    def test_pm_one_alphabet(self):
        mat = gen_matrix(8, 32, "pm_one", seed=1)
        scaled = mat.entries * np.sqrt(32)
        assert np.all(np.isin(scaled.real, (-1.0, 1.0)))
        assert np.all(scaled.imag == 0.0)

    def test_gaussian_moments(self):
        mat = gen_matrix(200, 400, "gaussian", seed=2)
        assert abs(mat.entries.real.mean()) < 0.001
        assert mat.entries.real.var() == pytest.approx(1.0 / 400, rel=0.02)
        assert np.all(mat.entries.imag == 0.0)

    def test_seed_determinism(self):
        a = gen_matrix(16, 64, "qpsk", seed=9)
        b = gen_matrix(16, 64, "qpsk", seed=9)
        np.testing.assert_array_equal(a.entries, b.entries)

    def test_bad_dist(self):
        with pytest.raises(ValueError):
            gen_matrix(8, 32, "bernoulli")

    def test_bad_shape(self):
        with pytest.raises(ValueError):
            gen_matrix(0, 32)


class TestProjectedAtoms:
    def test_unit_norm_everywhere(self, qpsk):
        provider = CompressiveAtoms(qpsk)
        for w in np.linspace(0.0, 2 * np.pi, 17, endpoint=False):
            assert np.linalg.norm(provider.value(w)) == pytest.approx(1.0, abs=1e-12)
        assert provider.atom_norm_sq(1.0) == 1.0

    def test_derivative_tangent_to_sphere(self, qpsk):
        """Normalization keeps ds orthogonal to s in the real inner product."""
        provider = CompressiveAtoms(qpsk)
        for w in (0.3, 1.7, 4.4):
            s, ds, _ = provider.derivs(w)
            assert abs(np.vdot(s, ds).real) < 1e-10

    def test_first_deriv_finite_difference(self, qpsk):
        provider = CompressiveAtoms(qpsk)
        h = 1e-6
        for w in (0.5, 2.2):
            fd = (provider.value(w + h) - provider.value(w - h)) / (2 * h)
            np.testing.assert_allclose(provider.first_deriv(w), fd, atol=1e-4)

    def test_second_deriv_finite_difference(self, qpsk):
        provider = CompressiveAtoms(qpsk)
        # wider step: the second difference amplifies roundoff by 1/h^2
        h = 1e-5
        for w in (0.5, 2.2):
            fd = (provider.value(w + h) - 2 * provider.value(w) + provider.value(w - h)) / h**2
            np.testing.assert_allclose(provider.second_deriv(w), fd, atol=1e-2)

    def test_unnormalized_norm_concentrates(self, qpsk):
        """||A x(omega)|| hovers near sqrt(M/N) by the variance-1/N scaling."""
        provider = CompressiveAtoms(qpsk)
        vals = [provider.unnormalized_norm(w) for w in np.linspace(0, 2 * np.pi, 33)]
        expect = np.sqrt(M / N)
        assert np.median(vals) == pytest.approx(expect, rel=0.3)


class TestGridEvaluation:
    def test_factory_matches_constructor(self, qpsk):
        """compressive_provider builds a provider identical to CompressiveAtoms."""
        prov = compressive_provider(qpsk)
        ref = CompressiveAtoms(qpsk)
        assert prov.dim == M and prov.n == N
        rng = np.random.default_rng(9)
        y = rng.standard_normal(M) + 1j * rng.standard_normal(M)
        np.testing.assert_array_equal(prov.grid_values(y, 2), ref.grid_values(y, 2))

    @pytest.mark.parametrize("gamma", [1, 2, 4])
    def test_grid_matches_pointwise(self, qpsk, gamma):
        """The padded-FFT grid scan equals per-node direct evaluation."""
        provider = CompressiveAtoms(qpsk)
        rng = np.random.default_rng(4)
        y = rng.standard_normal(M) + 1j * rng.standard_normal(M)
        grid = glrt_grid(y, provider, gamma)
        size = gamma * N
        assert grid.size == size
        for k in range(0, size, size // 16):
            w = 2 * np.pi * k / size
            assert grid[k] == pytest.approx(glrt(y, provider, w), rel=1e-9)

    def test_norm_cache_reused(self, qpsk):
        provider = CompressiveAtoms(qpsk)
        y = np.ones(M, dtype=complex)
        provider.grid_values(y, 2)
        cached = provider._norm_cache[2]
        provider.grid_values(y, 2)
        assert provider._norm_cache[2] is cached

    def test_zero_matrix_rejected(self):
        mat = MeasurementMatrix(entries=np.zeros((4, 16), dtype=complex), dist="file")
        provider = CompressiveAtoms(mat)
        with pytest.raises(ValueError):
            provider.grid_values(np.ones(4, dtype=complex), 1)


class TestEndToEnd:
    def test_noiseless_recovery(self):
        """96 projected samples pin down 3 well-separated frequencies."""
        mat = gen_matrix(96, 256, "qpsk", seed=55)
        provider = CompressiveAtoms(mat)
        omegas = [0.7, 2.5, 4.9]
        gains = [1.0, 0.8j, -0.6]
        y = np.zeros(96, dtype=complex)
        for w, g in zip(omegas, gains):
            y = y + g * provider.unnormalized_norm(w) * provider.value(w)
        cfg = EstimatorConfig(gamma=4, r_s=1, r_c=3, stopping=MaxIterStop(3))
        report = extract_spectrum(y, provider, cfg)
        assert report.order == 3
        for w in omegas:
            assert min(wrap_dist(p.omega, w) for p in report.params) < 1e-6
        assert report.residual_trajectory[-1] < 1e-12 * report.residual_trajectory[0]

    def test_matrix_file_round_trip(self, qpsk, tmp_path):
        """A matrix written to disk reconstructs the identical provider."""
        path = tmp_path / "mat.bin"
        signal_io.write_matrix_bin(path, qpsk.entries)
        back = MeasurementMatrix(entries=signal_io.read_matrix_bin(path), dist="file")
        pa = CompressiveAtoms(qpsk)
        pb = CompressiveAtoms(back)
        np.testing.assert_array_equal(pa.value(1.3), pb.value(1.3))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
