"""Zero-inflated loss laws: a point mass at zero mixed with a positive severity law.

The distribution function of a loss ``L`` is

    F(x) = p0 + integral_0^x f(l) dl,   x >= 0,

with an atom of probability ``p0`` at zero and a density ``f`` that is strictly
positive on (0, inf) and vanishes at infinity.  The density carries the
``1 - p0`` mixture weight, so ``F' = f`` on the positive axis; every functional
in this module follows that absorbed-weight convention.

Positive severity laws form a closed enumeration (currently Gamma only) rather
than an open plug-in interface: downstream condition checkers need the
log-density derivative, which must stay well-defined for every admitted law.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special


def _match_input(x, value):
    """Return ``value`` as a float when ``x`` was scalar, else as an ndarray."""
    if np.ndim(x) == 0:
        return float(value)
    return np.asarray(value, dtype=float)


@dataclass(frozen=True)
class GammaLaw:
    """Gamma severity with shape ``alpha`` and rate ``lam`` (mean ``alpha/lam``)."""

    alpha: float
    lam: float

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")

    def cdf(self, x):
        return special.gammainc(self.alpha, self.lam * np.asarray(x, dtype=float))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        log_pdf = (
            self.alpha * np.log(self.lam)
            + (self.alpha - 1.0) * np.log(x)
            - self.lam * x
            - special.gammaln(self.alpha)
        )
        return np.exp(log_pdf)

    def log_pdf_derivative(self, x):
        return (self.alpha - 1.0) / np.asarray(x, dtype=float) - self.lam

    def mean(self) -> float:
        return self.alpha / self.lam

    def mode(self) -> float:
        """Location of the density maximum (0 for shapes at or below 1)."""
        return max(0.0, (self.alpha - 1.0) / self.lam)

    def partial_expectation_above(self, b):
        # integral_b^inf x g(x) dx = (alpha/lam) * (1 - G_{alpha+1,lam}(b)),
        # the shifted-shape identity for Gamma laws.
        q = special.gammaincc(self.alpha + 1.0, self.lam * np.asarray(b, dtype=float))
        return self.mean() * q

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.gamma(self.alpha, 1.0 / self.lam, size=n)


@dataclass(frozen=True)
class MixedLoss:
    """Loss law with probability ``p0`` of no loss and a positive severity law.

    Attributes:
        p0: Probability mass at zero, strictly inside (0, 1).
        positive_part: Law of the loss conditional on it being positive.
    """

    p0: float
    positive_part: GammaLaw

    def __post_init__(self) -> None:
        if not 0.0 < self.p0 < 1.0:
            raise ValueError(f"p0 must lie in (0, 1), got {self.p0}")
        if not isinstance(self.positive_part, GammaLaw):
            raise TypeError(
                f"unsupported positive part {type(self.positive_part).__name__}; "
                "supported laws: GammaLaw"
            )

    @classmethod
    def gamma(cls, p0: float, alpha: float, lam: float) -> "MixedLoss":
        """Build a zero-inflated Gamma loss from raw parameters."""
        return cls(p0=p0, positive_part=GammaLaw(alpha=alpha, lam=lam))

    def cdf(self, x):
        """P(L <= x) for nonnegative ``x``; equals ``p0`` at zero."""
        x = np.asarray(x, dtype=float)
        if np.any(x < 0.0):
            raise ValueError("cdf is defined for nonnegative loss amounts only")
        return _match_input(x, self.p0 + (1.0 - self.p0) * self.positive_part.cdf(x))

    def pdf(self, x):
        """Density on (0, inf), including the ``1 - p0`` mixture weight.

        The atom at zero has no density, so nonpositive arguments are rejected.
        """
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0.0):
            raise ValueError("pdf is defined for strictly positive loss amounts only")
        return _match_input(x, (1.0 - self.p0) * self.positive_part.pdf(x))

    def log_pdf_derivative(self, x):
        """f'(x)/f(x) on (0, inf); the mixture weight cancels in the ratio."""
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0.0):
            raise ValueError("log_pdf_derivative is defined on (0, inf) only")
        return _match_input(x, self.positive_part.log_pdf_derivative(x))

    def mean(self) -> float:
        """E[L] = (1 - p0) times the positive-part mean."""
        return (1.0 - self.p0) * self.positive_part.mean()

    def tail_partial_expectation(self, b):
        """E[L 1{L > b}] for a barrier ``b >= 0``; equals the mean at ``b = 0``."""
        b = np.asarray(b, dtype=float)
        if np.any(b < 0.0):
            raise ValueError("barrier must be nonnegative")
        tail = (1.0 - self.p0) * self.positive_part.partial_expectation_above(b)
        return _match_input(b, tail)

    def below_barrier_expectation(self, b):
        """E[L 1{L <= b}] via the complement, reusing one validated tail routine."""
        return self.mean() - self.tail_partial_expectation(b)

    def sample(self, seed: int, n: int) -> np.ndarray:
        """Draw ``n`` i.i.d. losses, deterministic for a given ``seed``."""
        if n < 1:
            raise ValueError(f"sample size must be at least 1, got {n}")
        rng = np.random.default_rng(seed)
        u = rng.random(n)
        positives = self.positive_part.sample(rng, n)
        return np.where(u < self.p0, 0.0, positives)
