"""Two-class duopoly: closed-form barriers, profits, best responses, equilibrium.

With two rate classes, a common proportional penalty ``kappa`` on the bad
class, and the exponential choice function, each company's schedule collapses
to its class-1 premium ``theta_i`` and the insureds' optimal reporting barrier
has the closed form

    b*(theta1, theta2) = delta * (kappa - 1) * (eta * theta1 + (1 - eta) * theta2),

where ``eta = eta(theta2 - theta1)`` is the probability of choosing Company 1.
The barrier is the same in all four states, the induced four-state chain mixes
in one step, and its stationary law factorizes into (company choice) x (claim
indicator).  Company profits, their analytic gradients in the own premium, and
the damped best-response iteration for the premium equilibrium all live here.

The convention throughout: the choice probability is evaluated at
``theta2 - theta1`` (Company 2 premium minus Company 1 premium), the branch
split of the exponential choice function sits at equal premiums, and profit
curves are smooth on either side of that kink.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .loss import MixedLoss
from .market import (
    DELTA_MAX,
    ExponentialChoice,
    MarketModel,
    BarrierPolicy,
    PremiumSchedule,
    transition_matrix,
)

THETA_BOUND_M = "m"
THETA_BOUND_M_OVER_KAPPA = "m-over-kappa"
THETA_BOUNDS = (THETA_BOUND_M, THETA_BOUND_M_OVER_KAPPA)

_SCAN_POINTS = 512
_GOLDEN_XTOL = 1e-12
_TIE_EPS = 1e-10
_SIM_CHUNK = 1_000_000


@dataclass(frozen=True)
class DuopolyParams:
    """Parameters of the 2-class pricing game.

    ``theta1`` and ``theta2`` are the class-1 premiums; class 2 charges
    ``kappa`` times the class-1 premium at both companies.  Admissible class-1
    premiums live in ``[E[L], upper]`` where ``upper`` is either the premium
    cap ``m_cap`` (``theta_bound="m"``) or ``m_cap / kappa``
    (``theta_bound="m-over-kappa"``, which keeps the class-2 premium under the
    cap as well).
    """

    theta1: float
    theta2: float
    kappa: float
    delta: float
    k1: float
    k2: float
    m_cap: float
    loss: MixedLoss
    theta_bound: str = THETA_BOUND_M

    def __post_init__(self) -> None:
        if not 1.0 < self.kappa < 2.0:
            raise ValueError(f"kappa must lie in (1, 2), got {self.kappa}")
        if not 0.0 < self.delta <= DELTA_MAX:
            raise ValueError(f"delta must lie in (0, {DELTA_MAX}], got {self.delta}")
        if not 0.0 < self.k1 < 1.0:
            raise ValueError(f"k1 must lie in (0, 1), got {self.k1}")
        if not 0.0 < self.k2 < 1.0:
            raise ValueError(f"k2 must lie in (0, 1), got {self.k2}")
        if self.theta_bound not in THETA_BOUNDS:
            raise ValueError(
                f"theta_bound must be one of {THETA_BOUNDS}, got {self.theta_bound!r}"
            )
        lo, hi = self.theta_range()
        if hi < lo:
            raise ValueError(
                f"m_cap {self.m_cap} leaves an empty premium set [{lo:g}, {hi:g}]"
            )
        for name, theta in (("theta1", self.theta1), ("theta2", self.theta2)):
            if not lo <= theta <= hi:
                raise ValueError(
                    f"{name} must lie in [{lo:g}, {hi:g}], got {theta}"
                )

    def theta_range(self) -> tuple[float, float]:
        """Admissible class-1 premium interval under the configured bound."""
        upper = self.m_cap if self.theta_bound == THETA_BOUND_M else self.m_cap / self.kappa
        return self.loss.mean(), upper

    @property
    def choice(self) -> ExponentialChoice:
        return ExponentialChoice(k1=self.k1, k2=self.k2)

    def own_theta(self, company: int) -> float:
        _check_company(company)
        return self.theta1 if company == 1 else self.theta2

    def with_thetas(self, theta1: float, theta2: float) -> "DuopolyParams":
        return replace(self, theta1=theta1, theta2=theta2)


@dataclass(frozen=True)
class StationaryDistribution:
    """Long-run state proportions over ((1,1), (2,1), (1,2), (2,2))."""

    p: np.ndarray

    def __init__(self, p):
        arr = np.array(p, dtype=float)
        if arr.shape != (4,):
            raise ValueError(f"expected 4 state probabilities, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "p", arr)

    def company_share(self, company: int) -> float:
        _check_company(company)
        return float(self.p[:2].sum() if company == 1 else self.p[2:].sum())


@dataclass(frozen=True)
class EquilibriumResult:
    """Outcome of the damped best-response iteration."""

    theta1_star: float
    theta2_star: float
    barrier: float
    profits: tuple[float, float]
    iterations: int
    converged: bool
    residual: float


@dataclass(frozen=True)
class ChainSimulation:
    """Empirical summary of a simulated four-state chain."""

    frequencies: np.ndarray
    frequency_se: np.ndarray
    profits: np.ndarray
    profit_se: np.ndarray
    horizon: int
    seed: int


def _check_company(company: int) -> None:
    if company not in (1, 2):
        raise ValueError(f"company index must be 1 or 2, got {company}")


def choice_probability(params: DuopolyParams, dtheta):
    """P(choose Company 1) at class-1 premium gap ``dtheta = theta2 - theta1``."""
    return params.choice.prob_company1(dtheta)


def closed_form_barrier(params: DuopolyParams, theta1: float | None = None,
                        theta2: float | None = None) -> float:
    """Optimal reporting barrier, identical across all four states.

    Positive for every admissible premium pair since premiums, the penalty
    excess ``kappa - 1``, and the discount factor are all positive.
    """
    t1 = params.theta1 if theta1 is None else theta1
    t2 = params.theta2 if theta2 is None else theta2
    choice = params.choice
    weighted = choice.prob_company1(t2 - t1) * t1 + choice.prob_company2(t2 - t1) * t2
    return params.delta * (params.kappa - 1.0) * weighted


def duopoly_market(params: DuopolyParams) -> MarketModel:
    """The equivalent general-market model of the 2-class game."""
    return MarketModel(
        schedules=(
            PremiumSchedule((params.theta1, params.kappa * params.theta1)),
            PremiumSchedule((params.theta2, params.kappa * params.theta2)),
        ),
        choice=params.choice,
        delta=params.delta,
        loss=params.loss,
    )


def stationary_distribution(params: DuopolyParams) -> StationaryDistribution:
    """Stationary law of the four-state chain under the optimal barrier.

    Built from the full transition matrix and solved as the null-space system
    with the usual normalization row; no product-form shortcut is taken here,
    so the factorized expression stays available as an independent check.
    """
    barrier = closed_form_barrier(params)
    policy = BarrierPolicy(np.full((2, 2), barrier))
    t_matrix = transition_matrix(duopoly_market(params), policy)
    system = np.eye(4) - t_matrix.T
    system[3, :] = 1.0  # normalization replaces the redundant balance row
    rhs = np.array([0.0, 0.0, 0.0, 1.0])
    try:
        p = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as exc:  # unreachable for interior probabilities
        raise RuntimeError("stationary system is singular") from exc
    return StationaryDistribution(p)


def expected_profit(company: int, params: DuopolyParams) -> float:
    """Expected per-period profit: premiums collected minus reported losses.

    Evaluated as the sum over the company's two states weighted by the
    stationary distribution, so it agrees with the reduced single-bracket
    expression by construction of the chain.
    """
    _check_company(company)
    dist = stationary_distribution(params)
    barrier = closed_form_barrier(params)
    reported = params.loss.tail_partial_expectation(barrier)
    theta = params.own_theta(company)
    class_premiums = (theta, params.kappa * theta)
    offset = 0 if company == 1 else 2
    return sum(
        (class_premiums[cls] - reported) * dist.p[offset + cls] for cls in (0, 1)
    )


def _profit_curve(company: int, own, opponent: float, params: DuopolyParams):
    """Vectorized reduced-form profit of ``company`` as its premium varies.

    The company's stationary share multiplies a single bracket:
    ``share * (own * (a + kappa(1-a)) - E[L 1{L > b*}])`` with ``a`` the
    no-claim probability at the induced barrier.
    """
    own = np.asarray(own, dtype=float)
    t1 = own if company == 1 else opponent
    t2 = opponent if company == 1 else own
    gap = np.asarray(t2) - np.asarray(t1)
    eta1 = params.choice.prob_company1(gap)
    eta2 = params.choice.prob_company2(gap)
    share = eta1 if company == 1 else eta2
    barrier = params.delta * (params.kappa - 1.0) * (eta1 * t1 + eta2 * t2)
    a = params.loss.cdf(barrier)
    reported = params.loss.tail_partial_expectation(barrier)
    bracket = own * (a + params.kappa * (1.0 - a)) - reported
    out = share * bracket
    if np.ndim(out) == 0:
        return float(out)
    return out


def profit_gradient(company: int, params: DuopolyParams, side: str | None = None) -> float:
    """Analytic derivative of the company's profit in its own class-1 premium.

    The choice function is kinked at equal premiums, so when
    ``theta1 == theta2`` (and ``k2 != 1/2``) a ``side`` is required: ``"low"``
    differentiates along the branch where the own premium undercuts the
    opponent, ``"high"`` along the branch where it exceeds it.
    """
    _check_company(company)
    if side not in (None, "low", "high"):
        raise ValueError(f"side must be 'low', 'high' or None, got {side!r}")
    t1, t2 = params.theta1, params.theta2
    own = t1 if company == 1 else t2
    # Branch selection maps the own-vs-opponent side onto the sign of the
    # choice-function argument theta2 - theta1.
    gap = t2 - t1
    if gap == 0.0 and side is not None:
        own_below = side == "low"
        if company == 1:
            gap_side = "plus" if own_below else "minus"
        else:
            gap_side = "minus" if own_below else "plus"
    else:
        gap_side = None
    eta1 = params.choice.prob_company1(gap)
    eta2 = params.choice.prob_company2(gap)
    deta_dgap = params.choice.derivative(gap, side=gap_side)
    dgap_down = -1.0 if company == 1 else 1.0  # d(theta2 - theta1)/d(own)
    deta_down = deta_dgap * dgap_down

    share = eta1 if company == 1 else eta2
    dshare_down = deta_down if company == 1 else -deta_down

    dk = params.delta * (params.kappa - 1.0)
    barrier = dk * (eta1 * t1 + eta2 * t2)
    own_weight = eta1 if company == 1 else eta2
    dbarrier_down = dk * (own_weight + (t1 - t2) * deta_down)

    a = params.loss.cdf(barrier)
    density = params.loss.pdf(barrier) if barrier > 0.0 else 0.0
    q = density * dbarrier_down
    reported = params.loss.tail_partial_expectation(barrier)
    bracket = a + params.kappa * (1.0 - a)
    return dshare_down * (own * bracket - reported) + share * (
        bracket + (own * (1.0 - params.kappa) + barrier) * q
    )


def _golden_max(f, lo: float, hi: float, xtol: float) -> float:
    """Golden-section maximizer of a unimodal ``f`` on [lo, hi]."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _branch_max(company: int, opponent: float, params: DuopolyParams,
                lo: float, hi: float, xtol: float) -> tuple[float, float]:
    """Best own-premium on one smooth branch [lo, hi] of the profit curve."""
    if hi <= lo:
        return lo, _profit_curve(company, lo, opponent, params)
    grid = np.linspace(lo, hi, _SCAN_POINTS)
    values = _profit_curve(company, grid, opponent, params)
    best = int(np.argmax(values))
    a = grid[max(best - 1, 0)]
    b = grid[min(best + 1, _SCAN_POINTS - 1)]
    refined = _golden_max(
        lambda x: _profit_curve(company, x, opponent, params), a, b, xtol
    )
    candidates = [refined, lo, hi]
    scores = [_profit_curve(company, x, opponent, params) for x in candidates]
    top = int(np.argmax(scores))
    return candidates[top], scores[top]


def best_response(company: int, opponent_theta: float, params: DuopolyParams,
                  tol: float = 1e-9) -> float:
    """Profit-maximizing own premium against ``opponent_theta``.

    The profit curve is smooth on either side of the equal-premium kink, so
    each side is maximized separately (coarse scan, then golden-section
    refinement) and the better branch wins.  When both branches tie within
    1e-10 the smaller premium is returned, a fixed consumer-favoring choice.
    """
    _check_company(company)
    lo, hi = params.theta_range()
    if not lo <= opponent_theta <= hi:
        raise ValueError(
            f"opponent premium {opponent_theta} outside admissible [{lo:g}, {hi:g}]"
        )
    xtol = max(_GOLDEN_XTOL, min(tol, 1e-9) * 1e-2)
    x_low, j_low = _branch_max(company, opponent_theta, params, lo, opponent_theta, xtol)
    x_high, j_high = _branch_max(company, opponent_theta, params, opponent_theta, hi, xtol)
    if abs(j_low - j_high) <= _TIE_EPS:
        return min(x_low, x_high)
    return x_low if j_low > j_high else x_high


def nash_equilibrium(params: DuopolyParams, tol: float = 1e-8, damping: float = 0.5,
                     max_iter: int = 500) -> EquilibriumResult:
    """Damped simultaneous best-response iteration from the midpoint of the range.

    Each sweep computes both best responses at the current pair, then moves a
    ``damping`` fraction of the way toward them.  The iteration is declared
    converged when the undamped step is at most ``tol`` in sup norm, at which
    point the current pair is itself a mutual best response up to ``tol``.  A
    non-converged run is returned with its diagnostics rather than raised, so
    sweeps can record it and move on.
    """
    if not 0.0 < damping <= 1.0:
        raise ValueError(f"damping must lie in (0, 1], got {damping}")
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    lo, hi = params.theta_range()
    t1 = t2 = 0.5 * (lo + hi)
    residual = math.inf
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        r1 = best_response(1, t2, params, tol=tol)
        r2 = best_response(2, t1, params, tol=tol)
        residual = max(abs(r1 - t1), abs(r2 - t2))
        if residual <= tol:
            converged = True
            break
        t1 = (1.0 - damping) * t1 + damping * r1
        t2 = (1.0 - damping) * t2 + damping * r2
    solved = params.with_thetas(t1, t2)
    return EquilibriumResult(
        theta1_star=t1,
        theta2_star=t2,
        barrier=closed_form_barrier(solved),
        profits=(expected_profit(1, solved), expected_profit(2, solved)),
        iterations=iterations,
        converged=converged,
        residual=residual,
    )


def _lag1_se(total: float, total_sq: float, cross: float, count: int) -> float:
    """Standard error of a time-average from sums, first-order autocorrelated."""
    mean = total / count
    var = max(total_sq / count - mean * mean, 0.0)
    lag1 = cross / max(count - 1, 1) - mean * mean
    long_run = max(var + 2.0 * lag1, 0.0)
    return math.sqrt(long_run / count)


def simulate_chain(params: DuopolyParams, barrier: float, horizon: int,
                   seed: int) -> ChainSimulation:
    """Simulate the four-state chain under a common ``barrier`` for ``horizon`` periods.

    Starts in state (1, 1).  Returns occupation frequencies and per-period
    insurer profits with standard errors; profit series are correlated at lag
    one (this period's loss drives next period's state), so the errors use the
    first-order long-run variance.  Deterministic for a fixed seed.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be at least 1, got {horizon}")
    if barrier < 0.0:
        raise ValueError(f"barrier must be nonnegative, got {barrier}")
    loss = params.loss
    eta = choice_probability(params, params.theta2 - params.theta1)
    premium_by_state = np.array([
        params.theta1,
        params.kappa * params.theta1,
        params.theta2,
        params.kappa * params.theta2,
    ])

    rng = np.random.default_rng(seed)
    counts = np.zeros(4)
    state_cross = np.zeros(4)
    profit_total = np.zeros(2)
    profit_sq = np.zeros(2)
    profit_cross = np.zeros(2)
    prev_state = -1  # sentinel: no pair crosses the start of the sample
    prev_profit = np.zeros(2)
    current = 0  # state (1, 1)
    done = 0
    while done < horizon:
        m = min(_SIM_CHUNK, horizon - done)
        u = rng.random(m)
        severities = loss.positive_part.sample(rng, m)
        losses = np.where(u < loss.p0, 0.0, severities)
        pick1 = rng.random(m) < eta
        report = losses > barrier

        next_state = np.where(pick1, 0, 2) + report
        states = np.empty(m, dtype=np.int64)
        states[0] = current
        states[1:] = next_state[:-1]
        current = int(next_state[-1])

        claims = np.where(report, losses, 0.0)
        profit1 = np.where(states < 2, premium_by_state[states] - claims, 0.0)
        profit2 = np.where(states >= 2, premium_by_state[states] - claims, 0.0)

        counts += np.bincount(states, minlength=4)
        for k in range(4):
            ind = states == k
            state_cross[k] += np.count_nonzero(ind[:-1] & ind[1:])
            if prev_state == k and ind[0]:
                state_cross[k] += 1.0
        for idx, series in enumerate((profit1, profit2)):
            profit_total[idx] += series.sum()
            profit_sq[idx] += (series * series).sum()
            profit_cross[idx] += (series[:-1] * series[1:]).sum()
            if prev_state >= 0:
                profit_cross[idx] += prev_profit[idx] * series[0]
        prev_state = int(states[-1])
        prev_profit = np.array([profit1[-1], profit2[-1]])
        done += m

    frequencies = counts / horizon
    freq_se = np.array([
        _lag1_se(counts[k], counts[k], state_cross[k], horizon) for k in range(4)
    ])
    profits = profit_total / horizon
    profit_se = np.array([
        _lag1_se(profit_total[i], profit_sq[i], profit_cross[i], horizon)
        for i in range(2)
    ])
    return ChainSimulation(
        frequencies=frequencies,
        frequency_se=freq_se,
        profits=profits,
        profit_se=profit_se,
        horizon=horizon,
        seed=seed,
    )
