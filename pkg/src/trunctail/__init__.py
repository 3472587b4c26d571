"""trunctail: inference for power-law tails truncated at an unknown level.

Simulate truncated heavy-tailed samples, estimate the tail exponent with a
Hill statistic whose order-statistic count is chosen from the data, and test
whether the truncation regime is soft or hard.
"""

__version__ = "0.1.0"

from .clt_sim import (
    NormalityDiagnostic,
    StableLimitSpec,
    SumExperiment,
    c_alpha,
    canonical_stable_limit,
    empirical_cf,
    gaussian_covariance,
    normality_check,
    rho_delta_cf,
    run_sums,
    stable_limit_sigma,
    write_sums_csv,
)
from .errors import (
    ArgumentError,
    CannotBoundError,
    ConfigurationError,
    DataError,
    DegenerateSampleError,
    DomainError,
    RTooLargeError,
    TruncTailError,
)
from .hill import (
    AlphaBound,
    HillEstimate,
    alpha_upper_bound,
    hill_grid,
    hill_random_k,
    hill_statistic,
    random_k,
    write_grid_csv,
)
from .regime_tests import (
    TestOutcome,
    chi1_quantile,
    chi1_sf,
    signed_power,
    test_hard,
    test_hard_strong,
    test_soft,
    z_hard,
    z_soft,
)
from .tail_model import (
    HeavyTailSpec,
    Regime,
    ResidualSpec,
    SpectralMeasure,
    TailModelConfig,
    TruncationRule,
    classify_regime,
    sample_heavy,
    sample_stable,
    scaling_Bn,
    scaling_bn,
    simulate_sample,
    truncate_row,
    truncated_mean_vector,
    truncated_radial_mean,
    truncated_radial_second_moment,
)
from .ztheta import (
    CriticalValuePolicy,
    MarkovBoundSource,
    MonteCarloSource,
    QuantileTable,
    ZThetaQuantile,
    build_table,
    critical_value,
    gamma0,
    laplace_transform,
    markov_quantile,
    mc_quantile,
    mgf_bound,
    simulate_Z,
)
