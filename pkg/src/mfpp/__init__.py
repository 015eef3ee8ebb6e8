"""Numerics and Monte Carlo for the mixed fractional Poisson process."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DegenerateRegime,
    DomainError,
    GridMismatch,
    InsufficientData,
    InvalidParams,
    MfppError,
    NoConvergence,
    NonMonotoneLambda,
    NumericalError,
    SCapExceeded,
)
from .params import MfppConfig, MixedStableParams  # noqa: E402
from .special import (  # noqa: E402
    EvalResult,
    Regime,
    incomplete_beta,
    incomplete_beta_small_x,
    ml2,
    ml2_derivative,
    ml3,
    ml3_asymptotic,
)
from .moments import (  # noqa: E402
    MomentReport,
    cov_Y_asymptotic,
    cov_Y_corrected,
    cov_Y_series,
    k0_const,
    k_const,
    l_const,
    mfpn_cov,
    mfpn_cov_asymptotic,
    mfpn_var,
    mfpn_var_asymptotic,
    mfpp_cov,
    mfpp_cov_asymptotic,
    mfpp_mean,
    mfpp_var,
    moment_report,
    renewal_density,
    renewal_U,
    renewal_U_asymptotic,
    theoretical_exponents,
    var_Y,
    var_Y_asymptotic,
)
from .simulation import (  # noqa: E402
    PathEnsemble,
    SimGrid,
    mfpn_from_mfpp,
    sample_mixed_increment,
    sample_stable_increment,
    simulate_ensemble,
    simulate_inverse_path,
    simulate_mfnpp_path,
    simulate_mfpp_path,
)
from .estimation import (  # noqa: E402
    CorrCurve,
    PowerLawDecay,
    SimOptions,
    SlopeFit,
    corr_curve,
    empirical_cov,
    fit_decay_exponent,
    lrd_report,
    srd_report,
)
