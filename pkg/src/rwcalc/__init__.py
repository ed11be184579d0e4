"""Nested simple random walks and discrete stochastic calculus.

The package builds a nested sequence of scaled simple random walks whose
level-``m`` walk is a refinement of level ``m - 1``, embeds walks into
continuous paths through lattice first-passage times, and evaluates the
discrete local time, Ito, Stratonovich and Ito-Tanaka sums on them. The
:mod:`rwcalc.harness` module turns all of this into reproducible
convergence tables.
"""

from .coins import CoinMatrix, coin, coins, derive_seed, parse_seed
from .discrete_calculus import (
    ito_residual,
    ito_tanaka_residual,
    occupation_residual,
    stratonovich_residual,
    trapezoidal_sum,
)
from .embedding import (
    EmbeddedWalk,
    PiecewisePath,
    embed_nested,
    equid_bound,
    equid_diagnostic,
    path_from_walk,
    skorohod_embed,
)
from .errors import (
    BeyondTotalQV,
    InsufficientBridges,
    InsufficientData,
    InvalidConfig,
    NonPositiveMetric,
    OffLattice,
    OutOfHorizon,
    RWCalcError,
    StepBudgetExceeded,
)
from .functions import CATALOG_IDS, GridFunction, catalog, sgn
from .harness import (
    EXPERIMENTS,
    ConvergenceTable,
    ExperimentConfig,
    estimate_rate,
    identity_suite,
    run_experiment,
)
from .integrals import (
    ConvexDiffSpec,
    PredictableSpec,
    SimpleProcess,
    isometry_check,
    ito_sum,
    ito_tanaka_rhs,
    occupation_check,
    predictable_sum,
    simple_process,
    stratonovich_sum,
    tanaka_check,
)
from .local_time import (
    LocalTimeField,
    crossing_counts,
    discrete_local_time,
    eval_local_time,
    occupation_mass,
)
from .martingale import (
    Martingale,
    MartingaleSpec,
    QuadraticVariation,
    discrete_qv,
    ito_sum_m,
    martingale_local_time,
    martingale_stopping,
    qv_report,
    realize_martingale,
    time_change_residual,
)
from .walks import (
    LatticeWalk,
    StoppingSequence,
    bridge_times,
    build_nested,
    compose_T,
    evaluate,
    grid_values,
    raw_walk,
    twist,
)

__version__ = "0.1.0"
