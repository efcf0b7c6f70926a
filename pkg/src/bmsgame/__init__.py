"""Optimal loss underreporting and premium competition under a bonus-malus system."""

from .loss import GammaLaw, MixedLoss
from .market import (
    BarrierPolicy,
    BarrierSolution,
    ConvergenceError,
    ExponentialChoice,
    MarketModel,
    PremiumSchedule,
    TabulatedChoice,
    ValueTable,
    bellman_update,
    solve_optimal_barrier,
    solve_optimal_barrier_utility,
    switch_probability,
    transition_matrix,
    validate_market,
)
from .duopoly import (
    ChainSimulation,
    DuopolyParams,
    EquilibriumResult,
    StationaryDistribution,
    best_response,
    choice_probability,
    closed_form_barrier,
    duopoly_market,
    expected_profit,
    nash_equilibrium,
    profit_gradient,
    simulate_chain,
    stationary_distribution,
)
from .conditions import (
    ConditionCheck,
    ConditionReport,
    UnsupportedLawError,
    barrier_interval,
    check_corollary_b1,
    check_prop41,
    check_theorem42,
    eqm_constants,
)

__all__ = [
    "GammaLaw",
    "MixedLoss",
    "BarrierPolicy",
    "BarrierSolution",
    "ConvergenceError",
    "ExponentialChoice",
    "MarketModel",
    "PremiumSchedule",
    "TabulatedChoice",
    "ValueTable",
    "bellman_update",
    "solve_optimal_barrier",
    "solve_optimal_barrier_utility",
    "switch_probability",
    "transition_matrix",
    "validate_market",
    "ChainSimulation",
    "DuopolyParams",
    "EquilibriumResult",
    "StationaryDistribution",
    "best_response",
    "choice_probability",
    "closed_form_barrier",
    "duopoly_market",
    "expected_profit",
    "nash_equilibrium",
    "profit_gradient",
    "simulate_chain",
    "stationary_distribution",
    "ChainSimulation",
    "ConditionCheck",
    "ConditionReport",
    "UnsupportedLawError",
    "barrier_interval",
    "check_corollary_b1",
    "check_prop41",
    "check_theorem42",
    "eqm_constants",
]
