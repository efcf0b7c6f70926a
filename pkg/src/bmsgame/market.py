"""N-class bonus-malus market model and the insured's reporting problem.

A market consists of two companies, each charging a nondecreasing premium
schedule over N rate classes, a company-choice function driven by the premium
gap, a discount factor, and a common loss law.  An insured in state ``(n, i)``
(rate class n, insured with company i) reports a loss only when it exceeds a
barrier ``b(n, i)``; a reported loss moves the class up, a claim-free period
moves it down, and the insurer for the next period is redrawn from the choice
function.

The insured's optimal barrier minimizes the expected discounted stream of
premiums plus hidden losses.  The dynamic-programming operator implemented in
:func:`bellman_update` is a sup-norm contraction with modulus ``delta``, so
value iteration from zero converges geometrically and the minimizing barrier
is recovered in closed form from the value table: the optimal barrier at a
state is the positive part of the gap between the up-move and down-move
continuation values.

Two conventions are provided for which class's premium gap drives the company
switch on an up-move (``switch_class_convention``):

* ``"down"`` (default): the downgraded class's gap is used for every row of
  the transition law, matching the transition law as written.
* ``"next"``: up-move rows use the upgraded class's gap instead.

The two coincide wherever up- and down-moves land on the same class gap, in
particular everywhere in the 2-class proportional-penalty market at class 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad

from .loss import MixedLoss

DELTA_MAX = 1.0 - 1e-6

SWITCH_CONVENTIONS = ("down", "next")


class ConvergenceError(RuntimeError):
    """Raised when an iterative solver exhausts its iteration budget."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class PremiumSchedule:
    """Per-class premiums of one company, class 1 first."""

    premiums: tuple[float, ...]

    def __init__(self, premiums: Sequence[float]):
        object.__setattr__(self, "premiums", tuple(float(c) for c in premiums))
        if len(self.premiums) < 1:
            raise ValueError("a premium schedule needs at least one class")
        if not all(np.isfinite(self.premiums)):
            raise ValueError("premiums must be finite")

    def __len__(self) -> int:
        return len(self.premiums)

    def __getitem__(self, class_n: int) -> float:
        """Premium of 1-based rate class ``class_n``."""
        if not 1 <= class_n <= len(self.premiums):
            raise ValueError(f"class index {class_n} out of range 1..{len(self.premiums)}")
        return self.premiums[class_n - 1]


@dataclass(frozen=True)
class ExponentialChoice:
    """Exponential company-choice function.

    ``prob_company1(dc)`` is the probability that an insured picks Company 1
    when the class premium gap is ``dc = c^2 - c^1``:

        k2 * exp(k1 * dc)            for dc < 0,
        1 - (1 - k2) * exp(-k1 * dc) for dc >= 0.

    ``k2`` is the equal-premium baseline preference for Company 1 and ``k1``
    the price sensitivity; the map is continuous at 0 (value ``k2``),
    nondecreasing, and has a kink at 0 unless ``k2 = 1/2``.
    """

    k1: float
    k2: float

    def __post_init__(self) -> None:
        if not 0.0 < self.k1 < 1.0:
            raise ValueError(f"k1 must lie in (0, 1), got {self.k1}")
        if not 0.0 < self.k2 < 1.0:
            raise ValueError(f"k2 must lie in (0, 1), got {self.k2}")

    def prob_company1(self, dc):
        dc = np.asarray(dc, dtype=float)
        # clamp each branch's exponent at 0 so the unused branch cannot overflow
        low = self.k2 * np.exp(self.k1 * np.minimum(dc, 0.0))
        high = 1.0 - (1.0 - self.k2) * np.exp(-self.k1 * np.maximum(dc, 0.0))
        out = np.where(dc < 0.0, low, high)
        if out.ndim == 0:
            return float(out)
        return out

    def prob_company2(self, dc):
        """Complement of :meth:`prob_company1`, evaluated without cancellation.

        When Company 1 is nearly certain to be chosen the complement is a tiny
        exponential; computing it directly keeps full relative precision where
        ``1 - prob_company1`` would lose it.
        """
        dc = np.asarray(dc, dtype=float)
        low = 1.0 - self.k2 * np.exp(self.k1 * np.minimum(dc, 0.0))
        high = (1.0 - self.k2) * np.exp(-self.k1 * np.maximum(dc, 0.0))
        out = np.where(dc < 0.0, low, high)
        if out.ndim == 0:
            return float(out)
        return out

    def derivative(self, dc: float, side: str | None = None) -> float:
        """One-sided derivative of ``prob_company1`` at ``dc``.

        ``side`` ("plus" or "minus") selects the branch at the kink ``dc = 0``;
        away from it the sign of ``dc`` decides.  At the kink with no side and
        ``k2 != 1/2`` the derivative is ambiguous and a ValueError is raised.
        """
        if dc > 0.0 or (dc == 0.0 and side == "plus"):
            return self.k1 * (1.0 - self.k2) * float(np.exp(-self.k1 * dc))
        if dc < 0.0 or (dc == 0.0 and side == "minus"):
            return self.k1 * self.k2 * float(np.exp(self.k1 * dc))
        if self.k2 == 0.5:
            return self.k1 * 0.5
        raise ValueError(
            "choice-function derivative is two-sided at a zero premium gap; "
            "pass side='plus' or side='minus'"
        )


@dataclass(frozen=True)
class TabulatedChoice:
    """Company-choice probability interpolated from monotone (gap, prob) knots."""

    knots: tuple[tuple[float, float], ...]

    def __init__(self, knots: Sequence[tuple[float, float]]):
        object.__setattr__(self, "knots", tuple((float(d), float(p)) for d, p in knots))
        if len(self.knots) < 2:
            raise ValueError("a tabulated choice function needs at least two knots")
        gaps = [d for d, _ in self.knots]
        probs = [p for _, p in self.knots]
        if any(b <= a for a, b in zip(gaps, gaps[1:])):
            raise ValueError("knot gaps must be strictly increasing")
        if any(b < a for a, b in zip(probs, probs[1:])):
            raise ValueError("knot probabilities must be nondecreasing")
        if probs[0] < 0.0 or probs[-1] > 1.0:
            raise ValueError("knot probabilities must lie in [0, 1]")

    def prob_company1(self, dc):
        gaps = [d for d, _ in self.knots]
        probs = [p for _, p in self.knots]
        out = np.interp(np.asarray(dc, dtype=float), gaps, probs)
        if out.ndim == 0:
            return float(out)
        return out

    def prob_company2(self, dc):
        return 1.0 - self.prob_company1(dc)


@dataclass(frozen=True)
class MarketModel:
    """Two-company N-class market: schedules, choice function, discounting, loss."""

    schedules: tuple[PremiumSchedule, PremiumSchedule]
    choice: ExponentialChoice | TabulatedChoice
    delta: float
    loss: MixedLoss
    switch_class_convention: str = "down"

    def __post_init__(self) -> None:
        if len(self.schedules) != 2:
            raise ValueError("a market has exactly two premium schedules")
        n1, n2 = len(self.schedules[0]), len(self.schedules[1])
        if n1 != n2:
            raise ValueError(f"schedules disagree on class count: {n1} vs {n2}")
        if n1 < 2:
            raise ValueError("the market needs at least two rate classes")
        if not 0.0 < self.delta <= DELTA_MAX:
            # delta -> 1 slows the contraction without bound; reject at construction.
            raise ValueError(f"delta must lie in (0, {DELTA_MAX}], got {self.delta}")
        if self.switch_class_convention not in SWITCH_CONVENTIONS:
            raise ValueError(
                f"switch_class_convention must be one of {SWITCH_CONVENTIONS}, "
                f"got {self.switch_class_convention!r}"
            )

    @property
    def n_classes(self) -> int:
        return len(self.schedules[0])

    def premium(self, class_n: int, company: int) -> float:
        if company not in (1, 2):
            raise ValueError(f"company index must be 1 or 2, got {company}")
        return self.schedules[company - 1][class_n]

    def premium_gap(self, class_n: int) -> float:
        """Company 2 minus Company 1 premium at ``class_n``."""
        return self.schedules[1][class_n] - self.schedules[0][class_n]

    def state_index(self, class_n: int, company: int) -> int:
        """Flat index of state ``(n, i)``: company-1 classes first."""
        return (company - 1) * self.n_classes + (class_n - 1)


@dataclass(frozen=True)
class BarrierPolicy:
    """Reporting barriers, one nonnegative entry per (class, company) state."""

    barriers: np.ndarray  # shape (N, 2)

    def __init__(self, barriers):
        arr = np.array(barriers, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError(f"barriers must have shape (N, 2), got {arr.shape}")
        if np.any(arr < 0.0) or not np.all(np.isfinite(arr)):
            raise ValueError("barriers must be finite and nonnegative")
        arr.setflags(write=False)
        object.__setattr__(self, "barriers", arr)

    def barrier(self, class_n: int, company: int) -> float:
        return float(self.barriers[class_n - 1, company - 1])


@dataclass(frozen=True)
class ValueTable:
    """Expected discounted total cost per (class, company) state."""

    values: np.ndarray  # shape (N, 2)

    def __init__(self, values):
        arr = np.array(values, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError(f"values must have shape (N, 2), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("values must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @classmethod
    def zeros(cls, n_classes: int) -> "ValueTable":
        return cls(np.zeros((n_classes, 2)))

    def value(self, class_n: int, company: int) -> float:
        return float(self.values[class_n - 1, company - 1])


def validate_market(model: MarketModel, premium_cap: float) -> list[str]:
    """Check admissibility of both premium schedules; return every violation.

    A schedule is admissible when the premiums are nondecreasing in the rate
    class and each premium lies between the expected loss (nonnegative
    loading) and the cap.  An empty list means the market is admissible.
    """
    violations: list[str] = []
    mean_loss = model.loss.mean()
    for company in (1, 2):
        schedule = model.schedules[company - 1]
        for n in range(2, model.n_classes + 1):
            if schedule[n] < schedule[n - 1]:
                violations.append(
                    f"company {company}: ordering violated at class {n} "
                    f"({schedule[n]:g} < class-{n - 1} premium {schedule[n - 1]:g})"
                )
        for n in range(1, model.n_classes + 1):
            if schedule[n] < mean_loss:
                violations.append(
                    f"company {company}: loading violated at class {n} "
                    f"({schedule[n]:g} below expected loss {mean_loss:g})"
                )
            if schedule[n] > premium_cap:
                violations.append(
                    f"company {company}: cap violated at class {n} "
                    f"({schedule[n]:g} above cap {premium_cap:g})"
                )
    return violations


def switch_probability(model: MarketModel, current_company: int, target_class: int) -> float:
    """Probability of leaving ``current_company`` given the gap at ``target_class``."""
    if current_company not in (1, 2):
        raise ValueError(f"company index must be 1 or 2, got {current_company}")
    if not 1 <= target_class <= model.n_classes:
        raise ValueError(
            f"class index {target_class} out of range 1..{model.n_classes}"
        )
    gap = model.premium_gap(target_class)
    if current_company == 1:
        return model.choice.prob_company2(gap)
    return model.choice.prob_company1(gap)


def _class_moves(n_classes: int) -> tuple[np.ndarray, np.ndarray]:
    """Zero-based down- and up-move targets for every class."""
    idx = np.arange(n_classes)
    return np.maximum(idx - 1, 0), np.minimum(idx + 1, n_classes - 1)


def _switch_weight_classes(model: MarketModel) -> tuple[np.ndarray, np.ndarray]:
    """Zero-based classes whose premium gap drives the switch, per move direction."""
    down, up = _class_moves(model.n_classes)
    if model.switch_class_convention == "down":
        return down, down
    return down, up


def transition_matrix(model: MarketModel, policy: BarrierPolicy) -> np.ndarray:
    """Row-stochastic transition matrix over the 2N states under ``policy``.

    States are ordered company-major: ``(1,1), ..., (N,1), (1,2), ..., (N,2)``.
    A claim-free period (loss at or below the barrier) moves the class down,
    otherwise up; the next insurer is drawn from the choice function.
    """
    n = model.n_classes
    if policy.barriers.shape != (n, 2):
        raise ValueError(
            f"policy shape {policy.barriers.shape} does not match {n} classes"
        )
    down, up = _class_moves(n)
    w_down, w_up = _switch_weight_classes(model)
    gaps = np.array([model.premium_gap(m + 1) for m in range(n)])
    pick = (
        np.asarray(model.choice.prob_company1(gaps)),  # P(choose company 1) per class
        np.asarray(model.choice.prob_company2(gaps)),
    )

    matrix = np.zeros((2 * n, 2 * n))
    for company in (1, 2):
        for cls in range(n):
            row = (company - 1) * n + cls
            stay_prob = model.loss.cdf(policy.barriers[cls, company - 1])
            for move_prob, target, weight_cls in (
                (stay_prob, down[cls], w_down[cls]),
                (1.0 - stay_prob, up[cls], w_up[cls]),
            ):
                keep = pick[company - 1][weight_cls]
                switch = pick[2 - company][weight_cls]
                matrix[row, (company - 1) * n + target] += move_prob * keep
                matrix[row, (2 - company) * n + target] += move_prob * switch
    return matrix


def _continuations(model: MarketModel, values: np.ndarray):
    """Down/up continuation values per state and the premium matrix.

    Returns arrays of shape (N, 2): ``w_down[n, i]`` is the expected next-period
    value after a claim-free period in state (n+1, i+1), ``w_up`` after a
    reported claim, and ``premiums`` the per-state premium.
    """
    n = model.n_classes
    down, up = _class_moves(n)
    wc_down, wc_up = _switch_weight_classes(model)
    gaps = np.array([model.premium_gap(m + 1) for m in range(n)])
    pick = (
        np.asarray(model.choice.prob_company1(gaps), dtype=float),
        np.asarray(model.choice.prob_company2(gaps), dtype=float),
    )

    w_down = np.empty((n, 2))
    w_up = np.empty((n, 2))
    for i in (0, 1):
        keep_down, switch_down = pick[i][wc_down], pick[1 - i][wc_down]
        keep_up, switch_up = pick[i][wc_up], pick[1 - i][wc_up]
        w_down[:, i] = keep_down * values[down, i] + switch_down * values[down, 1 - i]
        w_up[:, i] = keep_up * values[up, i] + switch_up * values[up, 1 - i]
    premiums = np.column_stack(
        [np.asarray(model.schedules[0].premiums), np.asarray(model.schedules[1].premiums)]
    )
    return w_down, w_up, premiums


def bellman_update(model: MarketModel, values: ValueTable) -> tuple[ValueTable, BarrierPolicy]:
    """One application of the dynamic-programming operator.

    Returns the updated value table together with the pointwise minimizing
    barrier.  The per-state one-step cost is ``delta * (premium + E[L 1{L<=b}])``
    and the minimizer is the positive part of the up-minus-down continuation
    gap, which never involves a search.
    """
    v = values.values
    w_down, w_up, premiums = _continuations(model, v)
    barrier = np.maximum(0.0, w_up - w_down)
    stay = model.loss.cdf(barrier)
    hidden = model.loss.below_barrier_expectation(barrier)
    new_values = model.delta * (premiums + hidden) + model.delta * (
        stay * w_down + (1.0 - stay) * w_up
    )
    return ValueTable(new_values), BarrierPolicy(barrier)


@dataclass(frozen=True)
class BarrierSolution:
    """Converged reporting policy with its value table and iteration diagnostics."""

    policy: BarrierPolicy
    values: ValueTable
    iterations: int
    residuals: tuple[float, ...] = field(repr=False)


def solve_optimal_barrier(
    model: MarketModel, tol: float = 1e-9, max_iter: int = 1_000_000
) -> BarrierSolution:
    """Value-iterate from zero to the unique optimal reporting barrier.

    Iteration stops once the sup-norm step drops below
    ``tol * (1 - delta) / (2 delta)``, which bounds the sup-norm error of the
    value table by ``tol / 2``.  The returned barrier is recomputed from the
    final table, so it is exactly the positive-part continuation gap of the
    values returned alongside it.

    Raises:
        ConvergenceError: if the step is still above threshold after
            ``max_iter`` sweeps; the exception carries the last residual.
    """
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    threshold = tol * (1.0 - model.delta) / (2.0 * model.delta)
    values = ValueTable.zeros(model.n_classes)
    residuals: list[float] = []
    for iteration in range(1, max_iter + 1):
        new_values, _ = bellman_update(model, values)
        step = float(np.max(np.abs(new_values.values - values.values)))
        residuals.append(step)
        values = new_values
        if step <= threshold:
            _, policy = bellman_update(model, values)
            return BarrierSolution(policy, values, iteration, tuple(residuals))
    raise ConvergenceError(
        f"value iteration did not reach step {threshold:.3e} within "
        f"{max_iter} iterations (last residual {residuals[-1]:.3e})",
        residual=residuals[-1],
    )


def _check_inverse_pair(
    utility: Callable[[float], float],
    inverse: Callable[[float], float],
    probe: np.ndarray,
) -> None:
    for x in probe:
        back = inverse(utility(float(x)))
        if abs(back - x) > 1e-10 * max(1.0, abs(x)):
            raise ValueError(
                "utility and inverse are inconsistent: "
                f"inverse(utility({x:g})) = {back:g}"
            )


def solve_optimal_barrier_utility(
    model: MarketModel,
    utility: Callable[[float], float],
    inverse: Callable[[float], float],
    tol: float = 1e-9,
    max_iter: int = 1_000_000,
) -> BarrierSolution:
    """Optimal barrier for an insured who applies ``utility`` to each period's outlay.

    The per-period cost ``premium + hidden loss`` is passed through a strictly
    increasing ``utility`` before discounting; ``inverse`` must undo it on the
    premium range (checked to 1e-10 relative up front).  The minimizing barrier
    at a state solves ``utility(c + b) = gap + utility(c)`` where ``gap`` is the
    up-minus-down continuation difference, so it is
    ``inverse(gap + utility(c)) - c`` clipped at zero.  With the identity
    utility this reduces to the risk-neutral solver.
    """
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    premiums = [s.premiums for s in model.schedules]
    lo, hi = min(min(p) for p in premiums), max(max(p) for p in premiums)
    _check_inverse_pair(utility, inverse, np.linspace(lo, hi, 33))

    loss = model.loss

    def one_step_cost(premium: float, barrier: float) -> float:
        # E[U(c + L 1{L<=b})]: the atom and the reported tail both cost U(c).
        no_hidden = loss.p0 + 1.0 - loss.cdf(barrier)
        if barrier <= 0.0:
            return utility(premium)
        hidden, _ = quad(
            lambda ell: utility(premium + ell) * loss.pdf(ell),
            0.0,
            barrier,
            limit=200,
        )
        return utility(premium) * no_hidden + hidden

    def update(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        w_down, w_up, prem = _continuations(model, values)
        new_values = np.empty_like(values)
        barriers = np.empty_like(values)
        for cls in range(model.n_classes):
            for i in (0, 1):
                gap = w_up[cls, i] - w_down[cls, i]
                c = prem[cls, i]
                b = 0.0 if gap <= 0.0 else max(0.0, inverse(gap + utility(c)) - c)
                stay = loss.cdf(b)
                new_values[cls, i] = model.delta * one_step_cost(c, b) + model.delta * (
                    stay * w_down[cls, i] + (1.0 - stay) * w_up[cls, i]
                )
                barriers[cls, i] = b
        return new_values, barriers

    threshold = tol * (1.0 - model.delta) / (2.0 * model.delta)
    values = np.zeros((model.n_classes, 2))
    residuals: list[float] = []
    for iteration in range(1, max_iter + 1):
        new_values, _ = update(values)
        step = float(np.max(np.abs(new_values - values)))
        residuals.append(step)
        values = new_values
        if step <= threshold:
            _, barriers = update(values)
            return BarrierSolution(
                BarrierPolicy(barriers), ValueTable(values), iteration, tuple(residuals)
            )
    raise ConvergenceError(
        f"utility value iteration did not reach step {threshold:.3e} within "
        f"{max_iter} iterations (last residual {residuals[-1]:.3e})",
        residual=residuals[-1],
    )
