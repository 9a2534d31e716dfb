import logging
from math import sqrt

import numpy as np
import pytest
from numpy.testing import assert_allclose

from ssr_core.asymptotics import (dilute_check, distill_rate, gaussian_fit, n_copy_spectrum,
                                  qubit_corollary_split, rate_table, remainder_entropy, spectrum_frame,
                                  typical_set)
from ssr_core.errors import DomainError, EmptyTypicalSet
from ssr_core.schmidt import binary_entropy, entropy_of_entanglement, siv

P0 = 1 / 3
H = binary_entropy(P0)


class TestSpectrum:
    def test_two_copies_half(self):
        spec = n_copy_spectrum(0.5, 2)
        assert_allclose(spec.weights(), [0.25, 0.5, 0.25])
        assert_allclose(np.exp(spec.log_counts), [1, 2, 1])

    def test_single_copy(self):
        spec = n_copy_spectrum(0.2, 1)
        assert_allclose(spec.weights(), [0.8, 0.2])

    def test_siv_is_additive(self):
        for n in (1, 10, 256):
            spec = n_copy_spectrum(P0, n)
            assert spec.weights().sum() == pytest.approx(1.0, abs=1e-10)
            assert siv(spec.blocks()) == pytest.approx(n * 4 * P0 * (1 - P0), abs=1e-9)

    def test_entropy_is_additive(self):
        spec = n_copy_spectrum(P0, 40)
        assert entropy_of_entanglement(spec.blocks()) == pytest.approx(40 * H, abs=1e-9)

    def test_huge_counts_stay_finite(self):
        spec = n_copy_spectrum(0.5, 4096)
        assert np.all(np.isfinite(spec.log_counts))
        assert spec.weights().sum() == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("p0", [0.0, 1.0, -0.1, 1.5])
    def test_domain(self, p0):
        with pytest.raises(DomainError):
            n_copy_spectrum(p0, 10)

    def test_frame(self):
        df = spectrum_frame(n_copy_spectrum(P0, 8))
        assert list(df.columns) == ["n", "c_n", "log2_count"]
        assert len(df) == 9


class TestTypicalSet:
    def test_three_sigma_mass(self):
        ts = typical_set(n_copy_spectrum(P0, 256), 3.0)
        assert ts.mass >= 0.997
        centre, sigma = 256 * P0, sqrt(256 * P0 * (1 - P0))
        assert np.all(np.abs(ts.sectors - centre) <= 3 * sigma)

    def test_wide_window_takes_all(self):
        ts = typical_set(n_copy_spectrum(P0, 20), 1e6)
        assert ts.size == 21
        assert ts.mass == pytest.approx(1.0)

    def test_tiny_window(self):
        spec = n_copy_spectrum(P0, 100)
        ts = typical_set(spec, 1e-9)
        assert list(ts.sectors) == [33]
        with pytest.raises(EmptyTypicalSet):
            typical_set(spec, 1e-9, fallback=False)

    def test_delta_positive(self):
        with pytest.raises(DomainError):
            typical_set(n_copy_spectrum(P0, 10), 0.0)


class TestDistill:
    def test_rate_near_entropy(self):
        res = distill_rate(n_copy_spectrum(P0, 256), 3.0)
        assert H - 0.15 <= res.ebits_per_copy <= H
        assert res.convertible
        assert res.truncation_loss <= 0.01

    def test_rate_nondecreasing(self):
        rates = [distill_rate(n_copy_spectrum(P0, n), 3.0).ebits_per_copy for n in (64, 128, 256)]
        assert rates == sorted(rates)

    def test_half_is_convertible(self):
        assert distill_rate(n_copy_spectrum(0.5, 64), 2.0).convertible

    def test_residual_siv_ratio(self):
        res = distill_rate(n_copy_spectrum(P0, 256), 3.0)
        ratio = res.residual_siv / (256 * 4 * P0 * (1 - P0))
        assert 0.9 <= ratio <= 1.0

    def test_resource_accounting(self):
        for n in (16, 64, 128):
            res = distill_rate(n_copy_spectrum(P0, n), 3.0)
            assert res.ebits_per_copy <= H + 1e-9
            assert res.residual_siv <= n * 4 * P0 * (1 - P0) + 1e-9


class TestDilute:
    def test_max_count_converts(self):
        spec = n_copy_spectrum(P0, 256)
        assert dilute_check(spec, 3.0, 0)
        assert dilute_check(spec, 3.0, 2)

    def test_undersized_fails(self):
        assert not dilute_check(n_copy_spectrum(P0, 256), 3.0, 0, count_rule="min")

    def test_single_copy(self):
        assert dilute_check(n_copy_spectrum(P0, 1), 3.0, 0)

    def test_bad_arguments(self):
        spec = n_copy_spectrum(P0, 8)
        with pytest.raises(DomainError):
            dilute_check(spec, 3.0, -1)
        with pytest.raises(DomainError):
            dilute_check(spec, 3.0, 0, count_rule="mean")


class TestGaussian:
    def test_moments_exact(self):
        fit = gaussian_fit(n_copy_spectrum(P0, 256))
        assert fit.mean == pytest.approx(256 * P0, abs=1e-9)
        assert fit.variance / (256 * P0 * (1 - P0)) == pytest.approx(1.0, abs=1e-9)
        assert fit.max_abs_dev <= 0.5 / sqrt(256 * P0 * (1 - P0))

    def test_small_n_warns(self, caplog):
        with caplog.at_level(logging.WARNING, logger="ssr_core.asymptotics"):
            gaussian_fit(n_copy_spectrum(P0, 4))
        assert any("normal approximation" in r.message for r in caplog.records)


class TestCorollaryAndRemainder:
    def test_corollary_totals(self):
        for n in (1, 17, 256):
            c = qubit_corollary_split(P0, n)
            assert c.total_eoe == pytest.approx(c.expected_eoe, abs=1e-9)
            assert c.total_siv == pytest.approx(c.expected_siv, abs=1e-9)
            assert c.singlets >= 0

    def test_remainder_logarithmic(self):
        per_copy = []
        for n in (64, 256, 1024):
            rem = remainder_entropy(n_copy_spectrum(P0, n), 3.0)
            assert rem.eoe <= rem.bound + 1e-9
            per_copy.append(rem.per_copy)
        assert per_copy == sorted(per_copy, reverse=True)

    def test_rate_table(self):
        df = rate_table(P0, [64, 128, 256], 3.0)
        assert list(df["n_copies"]) == [64, 128, 256]
        assert df["distill_ok"].all()
        assert df["dilute_ok"].all()
        assert (df["remainder_eoe"] <= df["remainder_bound"] + 1e-9).all()
