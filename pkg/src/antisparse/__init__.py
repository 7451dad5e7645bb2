"""Anti-sparse representation with a democratic prior.

Exact, Gibbs and proximal-MALA generators for the democratic distribution,
the l_inf proximal operator, a fully Bayesian anti-sparse coder with MMSE and
marginal-MAP estimators, deterministic baselines, and a validation harness.
"""

from .backend import default_backend, get_kernels, numba_available, warm_up
from .coder import (
    CodingProblem,
    EstimatorResult,
    PosteriorChain,
    coef_conditional_mixture,
    default_init,
    fitra,
    gibbs_coef_sweep,
    log_joint_posterior,
    log_marginal_posterior,
    mmap_estimate,
    mmse_estimate,
    pmala_coef_step,
    reference_solvers,
    run_chain,
    sample_mu,
    sample_sigma2,
)
from .democratic import (
    ConditionalMixture,
    ConeIndex,
    DemocraticParams,
    DoubleGammaParams,
    MixtureComponent,
    cone_index,
    conditional_mixture_prior,
    dominant_given_cone_law,
    double_gamma_logpdf,
    log_norm_const,
    log_pdf,
    marginal_logpdf,
    moments,
    prob_cone_given_rest,
    rest_given_not_cone_logpdf,
)
from .harness import (
    GewekeResult,
    GofResult,
    Metrics,
    ScenarioConfig,
    ScenarioReport,
    build_dct_frame,
    cone_uniformity,
    evaluate_metrics,
    gamma_gof,
    geweke_run,
    run_scenario,
)
from .prox import (
    ProxThreshold,
    gradient_step_prox,
    project_l1_ball,
    prox_linf,
    prox_linf_oracle,
    prox_linf_threshold,
)
from .samplers import (
    Chain,
    ChainConfig,
    RngStream,
    acf,
    gibbs_prior_chain,
    pmala_prior_chain,
    sample_double_gamma,
    sample_exact,
    sample_truncated_normal,
)

__version__ = "0.1.0"
