"""Rank-based tests for high-dimensional white noise."""

from .correlations import (
    CorrValue,
    Method,
    ScorePair,
    SPEARMAN_SCORES,
    bkr_r,
    chatterjee_xi,
    hoeffding_d,
    kendall_tau,
    simple_linear_rank,
    spearman_rho,
    tau_star,
)
from .errors import (
    DivergedModel,
    EmptyInput,
    InvalidAlpha,
    InvalidInput,
    InvalidL,
    InvalidScore,
    NonStationaryWarning,
    ParseError,
    TiesWarning,
    TooLarge,
    TooShort,
    UsageError,
)
from .harness import McGrid, McTable, run_power, run_size
from .io import ResultDocument, load_csv, write_csv
from .kernels import H_D, H_R, H_TAU_STAR, KernelSpec, u_stat_oracle
from .lstat import LStatConfig, l_statistic, permutation_test, permute_panel
from .maxtest import (
    GumbelLaw,
    PairScan,
    TestOutcome,
    gumbel_quantile,
    kappa_d,
    max_test,
    p_value,
    pair_scan,
    white_noise_test,
)
from .ranks import LagPairSample, RankProfile, SeriesPanel, lag_pair, ranks, relative_ranks
from .simgen import AltModelSpec, NullModelSpec, gen_alt, gen_null, sigma_half

__version__ = "0.1.0"
