"""Sufficient-condition checkers for existence and ordering of the equilibrium.

Every check is advisory: the conditions are sufficient, not necessary, so a
failing report never gates the equilibrium solver (the base market of the
numerical study fails the log-slope condition yet has a perfectly good
equilibrium).  All suprema are taken over the barrier range

    I_L = [delta (kappa - 1) E[L],  delta (kappa - 1) m_cap / kappa],

the interval the optimal barrier can occupy as premiums sweep the admissible
set with the class-2 cap respected.  For Gamma severities the suprema are
resolved analytically from endpoint/mode candidates; dense scans are kept as
the fallback for any future law and as an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .duopoly import DuopolyParams
from .loss import GammaLaw, MixedLoss

_E = math.e
_SCAN_FALLBACK = 4096
_PROP41_SCAN = 1024


class UnsupportedLawError(ValueError):
    """Raised when a checker needs a severity family it does not support."""


@dataclass(frozen=True)
class ConditionCheck:
    """A single evaluated inequality ``lhs relation rhs``."""

    name: str
    lhs: float
    relation: str
    rhs: float
    holds: bool


@dataclass(frozen=True)
class ConditionReport:
    """Evaluated conditions with every intermediate quantity.

    ``verdicts`` maps condition labels to booleans and ``overall`` is their
    conjunction; ``checks`` lists the underlying inequalities (a two-sided
    condition contributes two rows).  Suprema fields are None when a report
    does not use them.
    """

    interval: tuple[float, float]
    a1: float
    a2: float
    m1: float
    m2: float
    sup_logslope: float | None
    sup_density: float | None
    sup_ell_density: float | None
    checks: tuple[ConditionCheck, ...]
    verdicts: dict[str, bool]
    overall: bool
    premise_m_le_3mean: bool | None = None


def barrier_interval(params: DuopolyParams) -> tuple[float, float]:
    """The shared interval I_L used by every checker."""
    scale = params.delta * (params.kappa - 1.0)
    return scale * params.loss.mean(), scale * params.m_cap / params.kappa


def eqm_constants(params: DuopolyParams) -> tuple[float, float, float, float]:
    """The four curvature constants (A1, A2, m1, m2) of the existence result."""
    d, k1, k2, kap = params.delta, params.k1, params.k2, params.kappa
    a1 = k2 * (2.0 - d * k2) / (2.0 - k2)
    a2 = (1.0 - k2) * (2.0 - d * (1.0 - k2)) / (1.0 + k2)
    m1 = k1 / (d * (kap - 1.0) ** 2 * k2 * max(2.0 * a1, 2.0 * d - a1))
    m2 = k1 / (d * (kap - 1.0) ** 2 * (1.0 - k2) * max(2.0 * a2, 2.0 * d - a2))
    return a1, a2, m1, m2


def _sup_logslope(loss: MixedLoss, lo: float, hi: float) -> float:
    law = loss.positive_part
    if isinstance(law, GammaLaw):
        # (alpha - 1)/x - lam is monotone, so an endpoint attains the supremum.
        end = lo if law.alpha >= 1.0 else hi
        return float(loss.log_pdf_derivative(end))
    grid = np.linspace(lo, hi, _SCAN_FALLBACK)
    return float(np.max(loss.log_pdf_derivative(grid)))


def _sup_density(loss: MixedLoss, lo: float, hi: float) -> float:
    law = loss.positive_part
    candidates = [lo, hi]
    if isinstance(law, GammaLaw):
        mode = law.mode()
        if lo < mode < hi:
            candidates.append(mode)
    else:
        candidates.extend(np.linspace(lo, hi, _SCAN_FALLBACK))
    return float(np.max(loss.pdf(np.asarray(candidates))))


def _sup_ell_density(loss: MixedLoss, lo: float, hi: float) -> float:
    law = loss.positive_part
    candidates = list(np.linspace(lo, hi, _PROP41_SCAN))
    if isinstance(law, GammaLaw):
        peak = law.alpha / law.lam  # maximizer of x * pdf(x) on (0, inf)
        if lo < peak < hi:
            candidates.append(peak)
    arr = np.asarray(candidates)
    return float(np.max(arr * loss.pdf(arr)))


def check_theorem42(params: DuopolyParams) -> ConditionReport:
    """The three sufficient conditions for existence of an equilibrium.

    (i) the log-density slope over I_L stays within
        [-e k1 / (2e - 1), k1 / 2];
    (ii) the density supremum over I_L is at most min(m1, m2);
    (iii) (1 - delta) k1 m_cap / kappa is at most min(A1, A2).
    """
    lo, hi = barrier_interval(params)
    a1, a2, m1, m2 = eqm_constants(params)
    sup_slope = _sup_logslope(params.loss, lo, hi)
    sup_density = _sup_density(params.loss, lo, hi)

    slope_low = -_E * params.k1 / (2.0 * _E - 1.0)
    slope_high = params.k1 / 2.0
    lhs_iii = (1.0 - params.delta) * params.k1 * params.m_cap / params.kappa
    checks = (
        ConditionCheck("i_lower", sup_slope, ">=", slope_low, sup_slope >= slope_low),
        ConditionCheck("i_upper", sup_slope, "<=", slope_high, sup_slope <= slope_high),
        ConditionCheck("ii", sup_density, "<=", min(m1, m2), sup_density <= min(m1, m2)),
        ConditionCheck("iii", lhs_iii, "<=", min(a1, a2), lhs_iii <= min(a1, a2)),
    )
    verdicts = {
        "i": checks[0].holds and checks[1].holds,
        "ii": checks[2].holds,
        "iii": checks[3].holds,
    }
    return ConditionReport(
        interval=(lo, hi),
        a1=a1, a2=a2, m1=m1, m2=m2,
        sup_logslope=sup_slope,
        sup_density=sup_density,
        sup_ell_density=None,
        checks=checks,
        verdicts=verdicts,
        overall=all(verdicts.values()),
    )


def check_prop41(params: DuopolyParams) -> ConditionReport:
    """Density condition under which the premium ordering follows the preference.

    Requires sup over I_L of ``x * f(x)`` at most ``1 / ((1-delta)(kappa-1))``;
    the bound diverges as either the discounting or the penalty vanishes.
    """
    lo, hi = barrier_interval(params)
    a1, a2, m1, m2 = eqm_constants(params)
    sup_ell = _sup_ell_density(params.loss, lo, hi)
    rhs = 1.0 / ((1.0 - params.delta) * (params.kappa - 1.0))
    check = ConditionCheck("ordering", sup_ell, "<=", rhs, sup_ell <= rhs)
    return ConditionReport(
        interval=(lo, hi),
        a1=a1, a2=a2, m1=m1, m2=m2,
        sup_logslope=None,
        sup_density=None,
        sup_ell_density=sup_ell,
        checks=(check,),
        verdicts={"ordering": check.holds},
        overall=check.holds,
    )


def check_corollary_b1(params: DuopolyParams) -> ConditionReport:
    """Gamma-specific sufficient conditions, stated on the ratio k1 / lam.

    (i) k1/lam >= max{2 - 1/e, 2[(alpha-1)/(alpha delta (kappa-1)(1-p0)) - 1],
        3(kappa-1)};
    (ii) k1/lam <= kappa / (3 alpha (1-p0)(1-delta)) * min(A1, A2).

    Also reports whether the conservative premium-cap premise
    ``m_cap <= 3 E[L]`` behind these bounds holds.
    """
    law = params.loss.positive_part
    if not isinstance(law, GammaLaw):
        raise UnsupportedLawError(
            f"Gamma-specific conditions need a Gamma severity, got "
            f"{type(law).__name__}"
        )
    lo, hi = barrier_interval(params)
    a1, a2, m1, m2 = eqm_constants(params)
    p0, alpha = params.loss.p0, law.alpha
    ratio = params.k1 / law.lam
    middle = 2.0 * (
        (alpha - 1.0) / (alpha * params.delta * (params.kappa - 1.0) * (1.0 - p0)) - 1.0
    )
    lower = max(2.0 - 1.0 / _E, middle, 3.0 * (params.kappa - 1.0))
    upper = (
        params.kappa
        / (3.0 * alpha * (1.0 - p0) * (1.0 - params.delta))
        * min(a1, a2)
    )
    checks = (
        ConditionCheck("i", ratio, ">=", lower, ratio >= lower),
        ConditionCheck("ii", ratio, "<=", upper, ratio <= upper),
    )
    verdicts = {"i": checks[0].holds, "ii": checks[1].holds}
    return ConditionReport(
        interval=(lo, hi),
        a1=a1, a2=a2, m1=m1, m2=m2,
        sup_logslope=None,
        sup_density=None,
        sup_ell_density=None,
        checks=checks,
        verdicts=verdicts,
        overall=all(verdicts.values()),
        premise_m_le_3mean=params.m_cap <= 3.0 * params.loss.mean(),
    )
