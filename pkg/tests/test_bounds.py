"""Tests for the frequency error floors: single-tone CRB, Fisher-matrix CRBs
for mixtures, and the Ziv-Zakai bound.

The multi-tone oracle is the closed-form single-tone CRB itself: tones half
a spectrum apart are essentially orthogonal, so their joint bound must match
the isolated one, while tones half a bin apart must inflate it sharply.
"""

import numpy as np
import pytest

from nomp import (
    FourierAtoms,
    SinusoidParam,
    crb_frequencies,
    crb_single,
    fisher_matrix,
    zzb_single,
)

SNR_25DB = 10 ** 2.5


class TestCrbSingle:
    def test_closed_form(self):
        assert crb_single(SNR_25DB, 256) == pytest.approx(
            6.0 / (SNR_25DB * (256**2 - 1)), rel=1e-15
        )

    @pytest.mark.parametrize("n", [16, 64, 256])
    def test_matches_fisher_inverse(self, n):
        """Inverting the 3x3 single-tone Fisher matrix recovers the formula."""
        provider = FourierAtoms(n)
        snr = SNR_25DB
        # snr is |gain|^2 / sigma^2 with the gain referred to the unit-norm atom
        gain = np.sqrt(snr) * np.exp(0.7j)
        crbs = crb_frequencies([SinusoidParam(gain, 1.234)], 1.0, provider)
        assert crbs[0] == pytest.approx(crb_single(snr, n), rel=1e-9)

    def test_validation(self):
        with pytest.raises(ValueError):
            crb_single(0.0, 256)
        with pytest.raises(ValueError):
            crb_single(1.0, 1)


class TestFisherMatrix:
    def test_symmetric_positive_definite(self):
        provider = FourierAtoms(64)
        params = [SinusoidParam(2.0 + 1.0j, 0.7), SinusoidParam(1.0 - 0.5j, 2.9)]
        f = fisher_matrix(params, 0.5, provider)
        assert f.shape == (6, 6)
        np.testing.assert_allclose(f, f.T, atol=1e-10)
        assert np.all(np.linalg.eigvalsh(f) > 0)

    def test_random_mixtures_symmetric_psd(self):
        """Symmetry and positive semidefiniteness across 100 random mixtures."""
        provider = FourierAtoms(64)
        rng = np.random.default_rng(3)
        for _ in range(100):
            k = int(rng.integers(1, 5))
            params = [
                SinusoidParam(
                    gain=complex(rng.standard_normal(), rng.standard_normal()),
                    omega=rng.uniform(0.0, 2 * np.pi),
                )
                for _ in range(k)
            ]
            f = fisher_matrix(params, 1.0, provider)
            np.testing.assert_allclose(f, f.T, atol=1e-8)
            # close random tones can make F nearly singular, never indefinite
            assert np.linalg.eigvalsh(f).min() > -1e-8

    def test_noise_scaling(self):
        provider = FourierAtoms(64)
        params = [SinusoidParam(1.0, 1.0)]
        f1 = fisher_matrix(params, 1.0, provider)
        f4 = fisher_matrix(params, 4.0, provider)
        np.testing.assert_allclose(f4, f1 / 4.0, rtol=1e-12)

    def test_zero_gain_rejected(self):
        provider = FourierAtoms(64)
        with pytest.raises(ValueError):
            fisher_matrix([SinusoidParam(0.0, 1.0)], 1.0, provider)


class TestCrbFrequencies:
    def test_far_tones_match_isolated_bound(self):
        """Tones pi apart essentially decouple from each other.

        The atoms themselves are exactly orthogonal for even n, but the
        derivative columns still overlap at the 1e-5 level, so the joint
        bound sits a hair above the isolated one rather than exactly on it.
        """
        n = 256
        provider = FourierAtoms(n)
        snrs = [SNR_25DB, 10**2.0]
        params = [
            SinusoidParam(np.sqrt(snrs[0]), 0.9),
            SinusoidParam(np.sqrt(snrs[1]) * 1j, 0.9 + np.pi),
        ]
        crbs = crb_frequencies(params, 1.0, provider)
        for c, snr in zip(crbs, snrs):
            assert c == pytest.approx(crb_single(snr, n), rel=1e-3)
            assert c >= crb_single(snr, n) * (1 - 1e-12)

    @pytest.mark.parametrize(
        "sep_bins,floor",
        [(0.5, 4.0), (0.25, 30.0)],  # measured inflations: 5.8x and 47x
    )
    def test_close_tones_inflate(self, sep_bins, floor):
        """Sub-bin pairs inflate the joint floor well past the isolated CRB."""
        n = 256
        provider = FourierAtoms(n)
        w = 1.0
        params = [
            SinusoidParam(np.sqrt(SNR_25DB), w),
            SinusoidParam(np.sqrt(SNR_25DB), w + sep_bins * 2 * np.pi / n),
        ]
        crbs = crb_frequencies(params, 1.0, provider)
        assert np.all(crbs > floor * crb_single(SNR_25DB, n))

    def test_duplicate_tones_are_singular(self):
        provider = FourierAtoms(64)
        params = [SinusoidParam(1.0, 1.5), SinusoidParam(1.0, 1.5)]
        assert np.all(np.isinf(crb_frequencies(params, 1.0, provider)))

    def test_empty(self):
        provider = FourierAtoms(64)
        assert crb_frequencies([], 1.0, provider).size == 0


class TestZivZakai:
    def test_zero_snr_closed_form(self):
        """With no signal the bound is the variance of a blind uniform guess."""
        assert zzb_single(0.0, 256) == pytest.approx(np.pi**2 / 4, abs=1e-6)

    def test_monotone_in_snr(self):
        vals = [zzb_single(10 ** (db / 10), 256) for db in (-10, 0, 5, 10, 15, 25)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_tracks_crb_at_high_snr(self):
        snr = SNR_25DB
        assert zzb_single(snr, 256) / crb_single(snr, 256) < 2.0

    def test_threshold_gap_at_low_snr(self):
        """Below threshold the ambiguity term dwarfs the local CRB."""
        snr = 10 ** 0.5
        assert zzb_single(snr, 256) / crb_single(snr, 256) > 10.0

    def test_validation(self):
        with pytest.raises(ValueError):
            zzb_single(-1.0, 256)
        with pytest.raises(ValueError):
            zzb_single(1.0, 1)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
