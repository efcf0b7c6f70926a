"""Condition checkers against exact-arithmetic and high-precision oracles."""

import dataclasses
from fractions import Fraction
from types import SimpleNamespace

import mpmath as mp
import numpy as np
import pytest

from bmsgame import (
    DuopolyParams,
    MixedLoss,
    UnsupportedLawError,
    barrier_interval,
    check_corollary_b1,
    check_prop41,
    check_theorem42,
    eqm_constants,
)
from bmsgame.conditions import _sup_density, _sup_ell_density, _sup_logslope
from bmsgame.market import DELTA_MAX


def fraction_constants(delta, k1, k2, kappa):
    """Exact rational recomputation of (A1, A2, m1, m2)."""
    d, k1, k2, kap = map(Fraction, (delta, k1, k2, kappa))
    a1 = k2 * (2 - d * k2) / (2 - k2)
    a2 = (1 - k2) * (2 - d * (1 - k2)) / (1 + k2)
    m1 = k1 / (d * (kap - 1) ** 2 * k2 * max(2 * a1, 2 * d - a1))
    m2 = k1 / (d * (kap - 1) ** 2 * (1 - k2) * max(2 * a2, 2 * d - a2))
    return tuple(float(x) for x in (a1, a2, m1, m2))


def passing_example_params() -> DuopolyParams:
    """A configuration satisfying every Gamma sufficient condition."""
    loss = MixedLoss.gamma(0.5, 1.0, 0.01)
    return DuopolyParams(
        theta1=50.0, theta2=50.0, kappa=1.4, delta=0.98, k1=0.02, k2=0.5,
        m_cap=3.0 * loss.mean(), loss=loss,
    )


class TestEqmConstants:
    def test_base_values(self, base_params):
        a1, a2, m1, m2 = eqm_constants(base_params)
        assert a1 == pytest.approx(0.816, abs=1e-9)
        assert a2 == pytest.approx(0.20066666666666666, abs=1e-12)
        assert m1 == pytest.approx(0.18950879320800484, rel=1e-12)
        assert m2 == pytest.approx(0.7112572261758465, rel=1e-12)

    def test_exact_rational_recomputation(self):
        cases = [
            ("0.97", "0.015", "0.8", "1.25"),
            ("0.9", "0.3", "0.35", "1.6"),
            ("0.98", "0.02", "0.5", "1.4"),
            ("0.85", "0.4", "0.06", "1.05"),
        ]
        loss = MixedLoss.gamma(0.5, 1.0, 0.01)
        for delta, k1, k2, kappa in cases:
            params = DuopolyParams(
                theta1=50.0, theta2=50.0, kappa=float(kappa), delta=float(delta),
                k1=float(k1), k2=float(k2), m_cap=300.0, loss=loss,
            )
            got = eqm_constants(params)
            expected = fraction_constants(delta, k1, k2, kappa)
            for g, e in zip(got, expected):
                assert g == pytest.approx(e, rel=1e-12)

    def test_a2_vanishes_at_full_preference(self, base_params):
        loyal = dataclasses.replace(base_params, k2=1.0 - 1e-12)
        assert eqm_constants(loyal)[1] < 1e-11

    def test_a1_limit_near_one(self, base_params):
        edge = dataclasses.replace(base_params, k2=1.0 - 1e-9, delta=DELTA_MAX)
        assert eqm_constants(edge)[0] == pytest.approx(1.0, abs=1e-5)


class TestBarrierInterval:
    def test_base_endpoints(self, base_params):
        lo, hi = barrier_interval(base_params)
        assert lo == pytest.approx(3.423529411764705, rel=1e-12)
        assert hi == pytest.approx(6.955482, rel=1e-12)

    def test_shared_across_checkers(self, base_params):
        reports = (
            check_theorem42(base_params),
            check_prop41(base_params),
            check_corollary_b1(base_params),
        )
        intervals = {report.interval for report in reports}
        assert len(intervals) == 1
        assert intervals.pop() == barrier_interval(base_params)


class TestTheorem42:
    def test_base_verdicts(self, base_params):
        report = check_theorem42(base_params)
        assert report.verdicts == {"i": False, "ii": True, "iii": True}
        assert not report.overall
        assert report.sup_logslope == pytest.approx(0.0499192439862543, rel=1e-10)
        assert report.sup_density == pytest.approx(4.956435625586411e-4, rel=1e-10)
        upper = dict((c.name, c) for c in report.checks)["i_upper"]
        assert upper.rhs == pytest.approx(0.0075, abs=1e-15)
        iii = dict((c.name, c) for c in report.checks)["iii"]
        assert iii.lhs == pytest.approx(0.01290708, rel=1e-9)
        assert iii.rhs == pytest.approx(0.20066666666666666, abs=1e-12)

    def test_overall_is_conjunction(self, base_params):
        for params in (base_params, passing_example_params()):
            report = check_theorem42(params)
            assert report.overall == all(report.verdicts.values())

    def test_passing_configuration(self):
        report = check_theorem42(passing_example_params())
        assert report.verdicts["ii"] and report.verdicts["iii"]


class TestProp41:
    def test_base_holds(self, base_params):
        report = check_prop41(base_params)
        assert report.overall
        assert report.sup_ell_density == pytest.approx(0.0034474398777925, rel=1e-6)
        assert report.checks[0].rhs == pytest.approx(133.33333333333333, rel=1e-12)

    def test_bound_diverges_with_delta(self, base_params):
        patient = dataclasses.replace(base_params, delta=DELTA_MAX)
        report = check_prop41(patient)
        assert report.checks[0].rhs > 1e5
        assert report.overall

    def test_bound_diverges_with_kappa(self, base_params):
        mild = dataclasses.replace(base_params, kappa=1.0 + 1e-6)
        report = check_prop41(mild)
        assert report.checks[0].rhs > 1e6
        assert report.overall


class TestCorollaryB1:
    def test_base_verdicts(self, base_params):
        report = check_corollary_b1(base_params)
        assert report.verdicts == {"i": False, "ii": True}
        assert not report.overall
        check_i = report.checks[0]
        assert check_i.lhs == pytest.approx(0.015 / 0.0085, rel=1e-12)
        assert check_i.rhs == pytest.approx(11.745704467353953, rel=1e-10)
        assert report.checks[1].rhs == pytest.approx(23.225308641975296, rel=1e-10)
        assert report.premise_m_le_3mean is True

    def test_passing_configuration(self):
        report = check_corollary_b1(passing_example_params())
        assert report.verdicts == {"i": True, "ii": True}
        assert report.overall
        assert report.checks[0].lhs == pytest.approx(2.0, rel=1e-12)
        assert report.checks[0].rhs == pytest.approx(1.6321205588285577, rel=1e-10)
        assert report.checks[1].rhs == pytest.approx(23.488888888888866, rel=1e-10)
        assert report.premise_m_le_3mean is True

    def test_exponential_shape_never_binds_middle_term(self):
        # with unit shape the risk-aversion-free middle term is negative
        params = passing_example_params()
        report = check_corollary_b1(params)
        assert report.checks[0].rhs == pytest.approx(
            max(2.0 - 1.0 / np.e, 3.0 * (params.kappa - 1.0)), rel=1e-12
        )

    def test_premise_reported_false_for_large_cap(self, base_params):
        report = check_corollary_b1(base_params)
        assert report.premise_m_le_3mean is (35.853 <= 3 * base_params.loss.mean())
        loose = dataclasses.replace(base_params, m_cap=100.0)
        assert check_corollary_b1(loose).premise_m_le_3mean is False

    def test_non_gamma_law_rejected(self, base_params):
        fake = SimpleNamespace(
            loss=SimpleNamespace(positive_part=object(), p0=0.9, mean=lambda: 14.0),
            kappa=base_params.kappa, delta=base_params.delta,
            k1=base_params.k1, k2=base_params.k2, m_cap=base_params.m_cap,
        )
        with pytest.raises(UnsupportedLawError, match="Gamma"):
            check_corollary_b1(fake)


class TestSuprema:
    @pytest.mark.parametrize("alpha,lam,interval", [
        (1.2, 0.0085, (3.42, 6.96)),     # mode right of the interval
        (2.5, 0.05, (25.0, 40.0)),       # mode inside
        (0.7, 0.01, (5.0, 60.0)),        # decreasing density
        (3.0, 0.2, (1.0, 8.0)),          # mode left of the interval
    ])
    def test_candidates_agree_with_dense_scan(self, alpha, lam, interval):
        loss = MixedLoss.gamma(0.6, alpha, lam)
        lo, hi = interval
        grid = np.linspace(lo, hi, 4096)
        assert _sup_logslope(loss, lo, hi) == pytest.approx(
            float(np.max(loss.log_pdf_derivative(grid))), rel=1e-6
        )
        assert _sup_density(loss, lo, hi) == pytest.approx(
            float(np.max(loss.pdf(grid))), rel=1e-6
        )
        assert _sup_ell_density(loss, lo, hi) == pytest.approx(
            float(np.max(grid * loss.pdf(grid))), rel=1e-6
        )


class TestHighPrecisionReproduction:
    def test_every_emitted_quantity(self, base_params):
        """Recompute the full report in 50-digit arithmetic; agree to 1e-9."""
        mp.mp.dps = 50
        p0 = mp.mpf("0.9")
        alpha = mp.mpf("1.2")
        lam = mp.mpf("0.0085")
        k1, k2 = mp.mpf("0.015"), mp.mpf("0.8")
        kappa, delta = mp.mpf("1.25"), mp.mpf("0.97")
        m_cap = mp.mpf("35.853")

        mean = (1 - p0) * alpha / lam
        lo = delta * (kappa - 1) * mean
        hi = delta * (kappa - 1) * m_cap / kappa
        a1 = k2 * (2 - delta * k2) / (2 - k2)
        a2 = (1 - k2) * (2 - delta * (1 - k2)) / (1 + k2)
        m1 = k1 / (delta * (kappa - 1) ** 2 * k2 * max(2 * a1, 2 * delta - a1))
        m2 = k1 / (delta * (kappa - 1) ** 2 * (1 - k2) * max(2 * a2, 2 * delta - a2))
        density = lambda x: (1 - p0) * lam ** alpha * x ** (alpha - 1) \
            * mp.e ** (-lam * x) / mp.gamma(alpha)
        sup_slope = (alpha - 1) / lo - lam
        sup_density = density(hi)       # density increasing left of the mode
        sup_ell = hi * density(hi)      # x*density increasing left of alpha/lam

        report = check_theorem42(base_params)
        expectations = [
            (report.interval[0], lo), (report.interval[1], hi),
            (report.a1, a1), (report.a2, a2), (report.m1, m1), (report.m2, m2),
            (report.sup_logslope, sup_slope), (report.sup_density, sup_density),
        ]
        ordering = check_prop41(base_params)
        expectations.append((ordering.sup_ell_density, sup_ell))
        expectations.append(
            (ordering.checks[0].rhs, 1 / ((1 - delta) * (kappa - 1)))
        )
        for check in report.checks:
            if check.name == "i_lower":
                expectations.append((check.rhs, -mp.e * k1 / (2 * mp.e - 1)))
            if check.name == "i_upper":
                expectations.append((check.rhs, k1 / 2))
            if check.name == "iii":
                expectations.append((check.lhs, (1 - delta) * k1 * m_cap / kappa))
        for got, precise in expectations:
            assert abs(got - float(precise)) <= 1e-9 * max(1.0, abs(float(precise)))
