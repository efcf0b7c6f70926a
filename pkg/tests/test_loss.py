"""Loss-law functionals against quadrature and finite-difference oracles."""

import numpy as np
import pytest

from bmsgame import GammaLaw, MixedLoss

from oracles import central_diff, quad_cdf, quad_mean, quad_tail


class TestConstruction:
    def test_p0_domain(self):
        with pytest.raises(ValueError, match="p0"):
            MixedLoss.gamma(0.0, 1.2, 0.0085)
        with pytest.raises(ValueError, match="p0"):
            MixedLoss.gamma(1.0, 1.2, 0.0085)

    def test_positive_part_domain(self):
        with pytest.raises(ValueError, match="alpha"):
            MixedLoss.gamma(0.5, -1.0, 0.0085)
        with pytest.raises(ValueError, match="lam"):
            MixedLoss.gamma(0.5, 1.2, 0.0)

    def test_only_enumerated_laws(self):
        with pytest.raises(TypeError, match="GammaLaw"):
            MixedLoss(p0=0.5, positive_part=object())


class TestCdf:
    def test_atom_at_zero(self, base_loss):
        assert base_loss.cdf(0.0) == 0.9

    def test_total_mass(self, base_loss):
        assert base_loss.cdf(1e12) > 1.0 - 1e-9

    def test_base_value(self, base_loss):
        # frozen from the quadrature oracle
        assert base_loss.cdf(100.0) == pytest.approx(0.9483151830432871, rel=1e-9)
        assert base_loss.cdf(100.0) == pytest.approx(quad_cdf(base_loss, 100.0), rel=1e-8)

    def test_negative_argument_rejected(self, base_loss):
        with pytest.raises(ValueError, match="nonnegative"):
            base_loss.cdf(-0.5)

    def test_matches_quadrature_everywhere(self, base_loss):
        for x in (0.5, 4.85, 23.0, 250.0, 1000.0):
            assert base_loss.cdf(x) == pytest.approx(quad_cdf(base_loss, x), rel=1e-8)

    def test_derivative_is_pdf(self, base_loss):
        rng = np.random.default_rng(7)
        xs = rng.uniform(0.5, 500.0, size=100)
        for x in xs:
            fd = central_diff(base_loss.cdf, x, 1e-4 * max(1.0, x))
            assert fd == pytest.approx(base_loss.pdf(x), rel=1e-6)


class TestPdf:
    def test_base_value(self, base_loss):
        # frozen from direct evaluation, cross-checked by differencing the cdf
        assert base_loss.pdf(6.95548) == pytest.approx(4.95643542480813e-4, rel=1e-10)
        fd = central_diff(base_loss.cdf, 6.95548, 1e-4)
        assert base_loss.pdf(6.95548) == pytest.approx(fd, rel=1e-6)

    def test_vanishes_at_infinity(self, base_loss):
        assert base_loss.pdf(1e6) < 1e-12

    def test_gamma_mode_is_maximum(self, base_loss):
        mode = base_loss.positive_part.mode()
        eps = 1e-3
        assert base_loss.pdf(mode) >= base_loss.pdf(mode - eps)
        assert base_loss.pdf(mode) >= base_loss.pdf(mode + eps)

    def test_domain(self, base_loss):
        with pytest.raises(ValueError, match="positive"):
            base_loss.pdf(0.0)
        with pytest.raises(ValueError, match="positive"):
            base_loss.pdf(-1.0)

    def test_strictly_positive(self, base_loss):
        xs = np.geomspace(1e-6, 1e4, 50)
        assert np.all(base_loss.pdf(xs) > 0.0)


class TestLogPdfDerivative:
    def test_base_value(self, base_loss):
        assert base_loss.log_pdf_derivative(3.42353) == pytest.approx(
            0.04991923394858522, rel=1e-12
        )

    def test_matches_finite_difference(self, base_loss):
        rng = np.random.default_rng(11)
        xs = rng.uniform(0.1, 1e3, size=100)
        for x in xs:
            fd = central_diff(lambda t: np.log(base_loss.pdf(t)), x, 1e-6 * max(1.0, x))
            assert abs(base_loss.log_pdf_derivative(x) - fd) < 1e-5

    def test_zero_at_mode(self, base_loss):
        mode = base_loss.positive_part.mode()
        assert abs(base_loss.log_pdf_derivative(mode)) < 1e-12

    def test_exponential_part_constant(self):
        loss = MixedLoss.gamma(0.5, 1.0, 0.03)
        for x in (0.1, 5.0, 400.0):
            assert loss.log_pdf_derivative(x) == -0.03

    def test_domain(self, base_loss):
        with pytest.raises(ValueError):
            base_loss.log_pdf_derivative(0.0)


class TestMean:
    def test_base_value(self, base_loss):
        assert base_loss.mean() == pytest.approx(14.117647058823529, rel=1e-14)
        assert base_loss.mean() == pytest.approx(quad_mean(base_loss), rel=1e-8)

    def test_all_mass_at_zero_limit(self):
        loss = MixedLoss.gamma(1.0 - 1e-12, 1.2, 0.0085)
        assert loss.mean() < 1e-6 * 1.2 / 0.0085

    def test_halved_exponential(self):
        assert MixedLoss.gamma(0.5, 1.0, 1.0).mean() == 0.5


class TestTailPartialExpectation:
    def test_full_tail_is_mean(self, base_loss):
        assert base_loss.tail_partial_expectation(0.0) == base_loss.mean()

    def test_empty_tail(self, base_loss):
        assert base_loss.tail_partial_expectation(1e9) < 1e-12

    def test_base_value(self, base_loss):
        got = base_loss.tail_partial_expectation(4.85)
        assert got == pytest.approx(14.112561959845833, rel=1e-10)
        assert got == pytest.approx(quad_tail(base_loss, 4.85), rel=1e-8)

    def test_matches_quadrature_on_random_barriers(self, base_loss):
        rng = np.random.default_rng(3)
        for b in rng.uniform(0.0, 100.0, size=20):
            got = base_loss.tail_partial_expectation(b)
            assert got == pytest.approx(quad_tail(base_loss, b), rel=1e-8)

    def test_nonincreasing_in_barrier(self, base_loss):
        rng = np.random.default_rng(5)
        pairs = np.sort(rng.uniform(0.0, 300.0, size=(200, 2)), axis=1)
        for b1, b2 in pairs:
            assert base_loss.tail_partial_expectation(b1) >= \
                base_loss.tail_partial_expectation(b2)

    def test_complementary_identity(self, base_loss):
        for b in (0.0, 4.85, 40.0):
            below = base_loss.below_barrier_expectation(b)
            tail = base_loss.tail_partial_expectation(b)
            assert below + tail == pytest.approx(base_loss.mean(), abs=1e-12)

    def test_negative_barrier_rejected(self, base_loss):
        with pytest.raises(ValueError, match="nonnegative"):
            base_loss.tail_partial_expectation(-1.0)


class TestSample:
    def test_zero_fraction(self, base_loss):
        n = 1_000_000
        draws = base_loss.sample(seed=123, n=n)
        zero_fraction = np.mean(draws == 0.0)
        bound = 3.0 * np.sqrt(0.9 * 0.1 / n)
        assert abs(zero_fraction - 0.9) < bound

    def test_sample_mean(self, base_loss):
        n = 1_000_000
        draws = base_loss.sample(seed=321, n=n)
        se = draws.std(ddof=1) / np.sqrt(n)
        assert abs(draws.mean() - base_loss.mean()) < 3.0 * se

    def test_deterministic(self, base_loss):
        first = base_loss.sample(seed=9, n=1000)
        second = base_loss.sample(seed=9, n=1000)
        np.testing.assert_array_equal(first, second)

    def test_empty_rejected(self, base_loss):
        with pytest.raises(ValueError, match="at least 1"):
            base_loss.sample(seed=1, n=0)

    def test_empirical_cdf_within_ks_bound(self, base_loss):
        # DKW bound at 99% confidence: sqrt(ln(2/0.01) / (2n)).  The atom at
        # zero needs its own comparison; left limits only matter on the
        # continuous part.
        n = 1_000_000
        draws = base_loss.sample(seed=2024, n=n)
        n_zero = int(np.count_nonzero(draws == 0.0))
        positives = np.sort(draws[draws > 0.0])
        model = base_loss.cdf(positives)
        ranks = n_zero + np.arange(1, positives.size + 1)
        statistic = max(
            abs(n_zero / n - base_loss.p0),
            np.max(np.abs(ranks / n - model)),
            np.max(np.abs((ranks - 1) / n - model)),
        )
        assert statistic <= np.sqrt(np.log(2.0 / 0.01) / (2.0 * n))


class TestGammaLaw:
    def test_mode_below_shape_one(self):
        assert GammaLaw(alpha=0.8, lam=0.5).mode() == 0.0

    def test_partial_expectation_identity(self):
        law = GammaLaw(alpha=2.0, lam=0.1)
        assert law.partial_expectation_above(0.0) == law.mean()
