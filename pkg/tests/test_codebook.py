"""
Test Suite for the Gaussian Random Codebook

Covers codeword sampling, the maximal-correlation formulas and their inverse,
and the empirical correlation of sampled rows.
"""

import math

import numpy as np
import pytest
from pydantic import ValidationError
from structlog.testing import capture_logs

from src.bounds.codebook import (
    ActiveSignal,
    CodebookSpec,
    bits_from_rho,
    correlation_matrix,
    empirical_correlation,
    matching_bits,
    normalize_energy,
    orthogonal_codewords,
    rho_max_approx,
    rho_max_closed,
    sample_active_codewords,
)
from src.core.errors import DegenerateCodebookError, InvalidSpecError


@pytest.fixture
def table_spec():
    return CodebookSpec(n=1000, k=16, p_bar=10.0, seed=0)


class TestCodebookSpec:
    """Parameter validation."""

    def test_defaults(self):
        spec = CodebookSpec(n=8, k=2, p_bar=1.0)
        assert spec.seed == 0
        assert spec.b is None

    def test_nonpositive_power_rejected(self):
        with pytest.raises(ValidationError, match="p_bar"):
            CodebookSpec(n=8, k=2, p_bar=0.0)

    def test_too_many_users_for_codebook(self):
        """k must fit in 2^floor(b) rows."""
        CodebookSpec(n=64, k=8, p_bar=1.0, b=3.5)
        with pytest.raises(ValidationError, match="exceed"):
            CodebookSpec(n=64, k=9, p_bar=1.0, b=3.5)

    def test_seed_range(self):
        CodebookSpec(n=8, k=2, p_bar=1.0, seed=2**64 - 1)
        with pytest.raises(ValidationError):
            CodebookSpec(n=8, k=2, p_bar=1.0, seed=-1)


class TestSampleActiveCodewords:
    """Seeded CN(0, p_bar) draws."""

    def test_shape_and_dtype(self, table_spec):
        X = sample_active_codewords(table_spec)
        assert X.matrix.shape == (16, 1000)
        assert X.matrix.dtype == np.complex128
        assert (X.k, X.n) == (16, 1000)

    def test_entry_power_matches_p_bar(self, table_spec):
        """Mean |x|² within 5σ of p_bar (σ = p_bar/sqrt(16000))."""
        X = sample_active_codewords(table_spec)
        power = np.abs(X.matrix) ** 2
        sigma = 10.0 / math.sqrt(power.size)
        assert abs(power.mean() - 10.0) < 5 * sigma

    def test_circular_symmetry(self, table_spec):
        X = sample_active_codewords(table_spec)
        assert abs(np.mean(X.matrix.real ** 2) - 5.0) < 0.3
        assert abs(np.mean(X.matrix.imag ** 2) - 5.0) < 0.3
        assert abs(np.mean(X.matrix)) < 0.1

    def test_same_seed_same_codewords(self, table_spec):
        first = sample_active_codewords(table_spec)
        second = sample_active_codewords(table_spec)
        np.testing.assert_array_equal(first.matrix, second.matrix)

    def test_seed_override(self, table_spec):
        base = sample_active_codewords(table_spec)
        other = sample_active_codewords(table_spec, rng_seed=1)
        assert not np.array_equal(base.matrix, other.matrix)

    def test_more_users_than_blocklength_warns(self):
        with capture_logs() as logs:
            X = sample_active_codewords(CodebookSpec(n=4, k=8, p_bar=1.0))
        assert X.matrix.shape == (8, 4)
        assert any(entry["event"] == "codewords_exceed_blocklength" for entry in logs)


class TestOrthogonalCodewords:

    def test_gram_is_scaled_identity(self):
        X = orthogonal_codewords(64, 8, 2.0)
        gram = X.matrix @ X.matrix.conj().T
        np.testing.assert_allclose(gram, 128.0 * np.eye(8), atol=1e-9)

    def test_too_many_rows(self):
        with pytest.raises(InvalidSpecError, match="orthogonal"):
            orthogonal_codewords(4, 5, 1.0)


class TestNormalizeEnergy:

    def test_rows_have_nominal_energy(self, table_spec):
        X = normalize_energy(sample_active_codewords(table_spec), 10.0)
        energies = np.sum(np.abs(X.matrix) ** 2, axis=1)
        np.testing.assert_allclose(energies, 1000 * 10.0, rtol=1e-12)

    def test_zero_row_rejected(self):
        with pytest.raises(InvalidSpecError, match="all-zero"):
            normalize_energy(ActiveSignal(np.zeros((2, 4))), 1.0)


class TestRhoMaxClosed:
    """sqrt(ln t / n) + gamma / (2 sqrt(n ln t))."""

    def test_reference_value(self):
        assert rho_max_closed(10, 1000) == pytest.approx(0.117271, abs=1e-6)

    def test_degenerate_codebook(self):
        """b = 1 gives t = 1, ln t = 0."""
        with pytest.raises(DegenerateCodebookError, match="ln t"):
            rho_max_closed(1, 1000)
        with pytest.raises(DegenerateCodebookError):
            rho_max_closed(0.5, 1000)

    def test_gap_to_approx_shrinks_with_b(self):
        gaps = [abs(rho_max_closed(b, 1000) - rho_max_approx(b, 1000)) for b in (10, 20, 40, 80)]
        assert all(later < earlier for earlier, later in zip(gaps, gaps[1:]))

    def test_decreasing_in_n(self):
        values = [rho_max_closed(10, n) for n in (100, 1000, 10000)]
        assert values[0] > values[1] > values[2]

    def test_close_to_approx_at_moderate_b(self):
        assert abs(rho_max_closed(10, 1000) - rho_max_approx(10, 1000)) < 5e-3

    @pytest.mark.parametrize("b", [1024, 1100, 5000])
    def test_large_codebook_stays_finite(self, b):
        """2^b overflows a float here; the bound must still track the approximation."""
        value = rho_max_closed(b, 4000)
        assert math.isfinite(value)
        assert value == pytest.approx(rho_max_approx(b, 4000), rel=1e-3)


class TestRhoMaxApprox:

    def test_reference_value(self):
        assert rho_max_approx(10, 1000) == pytest.approx(0.117741, abs=1e-6)

    def test_zero_bits(self):
        assert rho_max_approx(0, 1000) == 0.0

    def test_quadrupling_n_halves_bound(self):
        assert rho_max_approx(50, 4000) == pytest.approx(rho_max_approx(50, 1000) / 2, rel=1e-14)

    def test_monotone(self):
        assert rho_max_approx(20, 1000) > rho_max_approx(10, 1000)
        assert rho_max_approx(10, 2000) < rho_max_approx(10, 1000)

    def test_invalid_inputs(self):
        with pytest.raises(InvalidSpecError, match="non-negative"):
            rho_max_approx(-1, 1000)
        with pytest.raises(InvalidSpecError, match="positive integer"):
            rho_max_approx(1, 0)


class TestBitsFromRho:

    def test_reference_value(self):
        assert bits_from_rho(1 / 30, 1000) == pytest.approx(0.8015, abs=1e-4)

    @pytest.mark.parametrize("b", [0.5, 3.0, 50.0, 400.0])
    def test_inverse_of_approx(self, b):
        assert bits_from_rho(rho_max_approx(b, 1000), 1000) == pytest.approx(b, rel=1e-12)

    def test_rho_must_be_positive(self):
        with pytest.raises(InvalidSpecError, match="positive"):
            bits_from_rho(0.0, 1000)


class TestMatchingBits:

    def test_pair_count_matches(self):
        b = matching_bits(8)
        size = 2**b
        assert size * (size - 1) / 2 == pytest.approx(8 * 7 / 2)

    def test_single_row_rejected(self):
        with pytest.raises(InvalidSpecError):
            matching_bits(1)


class TestEmpiricalCorrelation:

    def test_delta_is_hermitian_with_zero_diagonal(self, table_spec):
        report = empirical_correlation(sample_active_codewords(table_spec), 10.0)
        np.testing.assert_array_equal(report.delta, report.delta.conj().T)
        np.testing.assert_array_equal(np.diag(report.delta), 0.0)
        assert report.rho_max_empirical == pytest.approx(np.max(np.abs(report.delta)))

    def test_single_user(self):
        with capture_logs() as logs:
            report = empirical_correlation(ActiveSignal(np.ones((1, 16))), 1.0)
        assert report.rho_max_empirical == 0.0
        assert report.delta.shape == (1, 1)
        assert any(entry["event"] == "single_user_correlation" for entry in logs)

    def test_identical_rows_are_fully_correlated(self):
        report = empirical_correlation(ActiveSignal(np.ones((2, 16))), 1.0)
        assert report.rho_max_empirical == pytest.approx(1.0, abs=1e-12)

    def test_entries_match_pairwise_inner_products(self):
        n, p_bar = 64, 2.0
        X = sample_active_codewords(CodebookSpec(n=n, k=5, p_bar=p_bar, seed=11))
        report = empirical_correlation(X, p_bar)
        rows = X.matrix
        expected = np.zeros((5, 5), dtype=np.complex128)
        for i in range(5):
            for j in range(5):
                if i != j:
                    expected[i, j] = np.vdot(rows[j], rows[i]) / (n * p_bar)
        np.testing.assert_allclose(report.delta, expected, atol=1e-12)
        assert report.rho_max_empirical == pytest.approx(np.max(np.abs(expected)), rel=1e-12)

    def test_orthogonal_rows_have_zero_correlation(self):
        report = empirical_correlation(orthogonal_codewords(32, 4, 1.0), 1.0)
        assert report.rho_max_empirical < 1e-12

    def test_mean_matches_closed_form(self):
        """
        Mean max |Δ_ij| of k=8 rows (28 pairs) over 100 seeds tracks the formulas
        evaluated at b = log2 k, within 10%.
        """
        n, k = 128, 8
        samples = [
            empirical_correlation(
                sample_active_codewords(CodebookSpec(n=n, k=k, p_bar=1.0, seed=seed)), 1.0
            ).rho_max_empirical
            for seed in range(100)
        ]
        mean = float(np.mean(samples))
        b = matching_bits(k)
        assert mean == pytest.approx(rho_max_closed(b, n), rel=0.10)
        assert mean == pytest.approx(rho_max_approx(b, n), rel=0.10)

    def test_correlation_matrix_scaling(self):
        gram = np.array([[4.0, 1.0 + 1.0j], [1.0 - 1.0j, 4.0]])
        delta = correlation_matrix(gram, p_bar=1.0, n=4)
        np.testing.assert_allclose(delta, [[0.0, 0.25 + 0.25j], [0.25 - 0.25j, 0.0]])
