import numpy as np
import pytest

from bmsgame import DuopolyParams, MixedLoss


@pytest.fixture
def base_loss() -> MixedLoss:
    """Zero-inflated Gamma loss of the base market."""
    return MixedLoss.gamma(0.9, 1.2, 0.0085)


@pytest.fixture
def base_params(base_loss) -> DuopolyParams:
    """Base market at symmetric class-1 premiums of 20."""
    return DuopolyParams(
        theta1=20.0, theta2=20.0, kappa=1.25, delta=0.97,
        k1=0.015, k2=0.8, m_cap=35.853, loss=base_loss,
    )


@pytest.fixture
def asym_params(base_params) -> DuopolyParams:
    """Base market with Company 2 pricier at class 1."""
    return base_params.with_thetas(20.0, 25.0)


def random_duopoly_params(rng: np.random.Generator, *, margin: float = 0.0,
                          delta_hi: float = 0.99,
                          max_value_scale: float | None = None) -> DuopolyParams:
    """Draw admissible 2-class game parameters for property tests.

    Loss laws are drawn with means of the same magnitude as the study's base
    market (single to low double digits).  ``margin`` keeps both premiums that
    fraction of the range away from the boundary (useful for finite-difference
    probes).  ``max_value_scale`` caps the discounted-cost scale
    ``delta * (max premium + mean) / (1 - delta)``, redrawing until satisfied;
    tests that assert absolute float tolerances on value-iteration residuals
    need that scale bounded.
    """
    while True:
        p0 = rng.uniform(0.3, 0.95)
        alpha = rng.uniform(0.6, 3.0)
        mean_loss = rng.uniform(8.0, 25.0)
        lam = (1.0 - p0) * alpha / mean_loss
        loss = MixedLoss.gamma(p0, alpha, lam)
        kappa = rng.uniform(1.05, 1.9)
        delta = rng.uniform(0.85, delta_hi)
        k1 = rng.uniform(0.005, 0.5)
        k2 = rng.uniform(0.05, 0.95)
        m_cap = mean_loss * kappa * rng.uniform(1.2, 2.2)
        if max_value_scale is not None:
            scale = delta * (kappa * m_cap + mean_loss) / (1.0 - delta)
            if scale > max_value_scale:
                continue
        lo, hi = mean_loss, m_cap
        pad = margin * (hi - lo)
        theta1 = rng.uniform(lo + pad, hi - pad)
        theta2 = rng.uniform(lo + pad, hi - pad)
        return DuopolyParams(
            theta1=theta1, theta2=theta2, kappa=kappa, delta=delta,
            k1=k1, k2=k2, m_cap=m_cap, loss=loss,
        )
