"""Honest-vs-insider Merton portfolio toolkit.

Simulates and analyzes a Black-Scholes market with two log-utility
investors: an honest trader (adapted portfolio) and an insider who also
observes the terminal Brownian value.  Provides the optimal portfolios,
pathwise wealth via anticipating (forward-increment) calculus, the
closed-form utility gap, the probability that the honest trader ends up
ahead with its explicit lower bound, the optimal-horizon cubic, and the
moment viability boundary -- each cross-checked by deterministic Monte
Carlo.
"""

from .analysis import (
    BoundEvaluation,
    CubicPoly,
    GapEvaluation,
    McEstimate,
    cubic_coefficients,
    expected_utility_honest,
    expected_utility_insider,
    gap_closed_form,
    horizon_free_L,
    lower_bound,
    lower_bound_scaled,
    moment_ratio,
    moment_ratio_mc,
    optimal_horizon,
    prob_honest_wins_mc,
    prob_honest_wins_quadrature,
)
from .experiments import (
    ExperimentReport,
    acceptance_suite,
    convergence_study,
    figure_bound_vs_T,
    figure_bound_vs_t,
    wealth_comparison,
    wealth_mc,
)
from .kernels import BACKEND
from .model import Coefficient, MarketModel, TimeGrid, grid, make_model
from .stochastic import (
    BrownianPath,
    IntegralResult,
    RngStream,
    forward_integral,
    ito_integral,
    sample_path,
)
from .strategies import (
    PortfolioWeight,
    WealthOutcome,
    WealthPositivityError,
    honest_log_return,
    honest_weight,
    insider_log_return,
    insider_weight,
    simulate_wealth_euler,
    wealth_outcome,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BoundEvaluation",
    "BrownianPath",
    "Coefficient",
    "CubicPoly",
    "ExperimentReport",
    "GapEvaluation",
    "IntegralResult",
    "MarketModel",
    "McEstimate",
    "PortfolioWeight",
    "RngStream",
    "TimeGrid",
    "WealthOutcome",
    "WealthPositivityError",
    "acceptance_suite",
    "convergence_study",
    "cubic_coefficients",
    "expected_utility_honest",
    "expected_utility_insider",
    "figure_bound_vs_T",
    "figure_bound_vs_t",
    "forward_integral",
    "gap_closed_form",
    "grid",
    "honest_log_return",
    "honest_weight",
    "horizon_free_L",
    "insider_log_return",
    "insider_weight",
    "ito_integral",
    "lower_bound",
    "lower_bound_scaled",
    "make_model",
    "moment_ratio",
    "moment_ratio_mc",
    "optimal_horizon",
    "prob_honest_wins_mc",
    "prob_honest_wins_quadrature",
    "sample_path",
    "simulate_wealth_euler",
    "wealth_comparison",
    "wealth_mc",
    "wealth_outcome",
]
