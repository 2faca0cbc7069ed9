"""Exact values and budgeted estimates of cardinal interaction indices.

The main entry points are :func:`exact_cii` and :func:`soum_exact_cii` for
ground truth, :func:`run_svarm_iq` for stratified estimation, and the
permutation baselines in :mod:`interactionkit.baselines`.
"""

from ._backend import BACKEND
from .baselines import permutation_sii, permutation_sti
from .errors import BudgetExceededError, GameFormatError, InteractionKitError, ParameterError
from .evaluation import (
    chebyshev_bound,
    gamma_factor,
    hoeffding_bound,
    leftover_budget,
    mse,
    prec_at,
    run_sweep,
    strata_statistics,
    variance_bound,
)
from .game import (
    BudgetedOracle,
    SoumGame,
    TabularGame,
    load_game,
    soum_generate,
    tabular_dump,
    tabular_load,
)
from .index import (
    EstimateMap,
    IndexKind,
    WeightProfile,
    bernoulli_number,
    cii_weights,
    discrete_derivative,
    exact_cii,
    nsii_aggregate,
    soum_exact_cii,
)
from .strata import StrataTable
from .svarmiq import (
    BorderPlan,
    EstimatorConfig,
    SizeDistribution,
    aggregate_pairs_check,
    plan_borders,
    run_svarm_iq,
    size_distribution_pairs,
    size_distribution_uniform,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BorderPlan",
    "BudgetExceededError",
    "BudgetedOracle",
    "EstimateMap",
    "EstimatorConfig",
    "GameFormatError",
    "IndexKind",
    "InteractionKitError",
    "ParameterError",
    "SizeDistribution",
    "SoumGame",
    "StrataTable",
    "TabularGame",
    "WeightProfile",
    "aggregate_pairs_check",
    "bernoulli_number",
    "chebyshev_bound",
    "cii_weights",
    "discrete_derivative",
    "exact_cii",
    "gamma_factor",
    "hoeffding_bound",
    "leftover_budget",
    "load_game",
    "mse",
    "nsii_aggregate",
    "permutation_sii",
    "permutation_sti",
    "plan_borders",
    "prec_at",
    "run_svarm_iq",
    "run_sweep",
    "size_distribution_pairs",
    "size_distribution_uniform",
    "soum_exact_cii",
    "soum_generate",
    "strata_statistics",
    "tabular_dump",
    "tabular_load",
    "variance_bound",
]
