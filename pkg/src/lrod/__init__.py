"""Loss-optimal recovery thresholds for right-censored loan portfolios.

Censored histories are forecast-completed (random defaults with empirical
truncation, or an eight-state Markov chain), then the portfolio loss is swept
over delinquency thresholds to find the loss-minimising one.
"""

__version__ = "0.1.0"

from .amort import discount_factor, expected_balance, arrears, level_instalment
from .completion import complete_portfolio, train
from .delinquency import default_time, delta_series, max_delinquency, measure_g1, repayment_ratio
from .fitting import fit_exponential, fit_weibull, select_distribution
from .forecast_markov import TransitionMatrix, estimate_transition_matrix, forecast_markov, state_of
from .forecast_random import (
    RandomDefaultsParams, draw_truncation, estimate_payment_probability, forecast_random,
)
from .loss import (
    LossConfig, LossCurve, McSummary, account_loss, monte_carlo_optimise, optimise_thresholds,
    portfolio_loss, run_scenario_matrix, static_rate_loss_curve,
)
from .portfolio import LoanHistory, Portfolio, load_portfolio, partition_samples, write_portfolio
from .synthetic import GeneratorConfig, designed_portfolio, generate_synthetic_portfolio
from .validate import ValidationReport, cross_validate, par_metric, parameter_stability

__all__ = [name for name in dir() if not name.startswith("_")]
