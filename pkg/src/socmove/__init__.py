"""Movement modeling on a latent dynamic social network.

Simulates interacting trajectories, censors and relabels them the way
partial field observation does, and runs Bayesian inference on the behavior
parameters with either the complete likelihood or a returner-restricted
surrogate when labels are not persistent.
"""

from .model import (
    GlmCoefficients,
    ModelParams,
    PARAM_NAMES,
    behavior_profile,
    build_precision,
    build_propagator,
    ego_sizes,
    glm_value,
    neighbor_mean,
    phase_covariates,
    transition_log_density,
)
from .network import (
    DynamicNetwork,
    TransitionProbs,
    edge_log_pmf_complete,
    proxy_edge_log_pmf,
    proxy_network_log_pmf,
    simulate_network,
    transition_probs,
)
from .simulate import (
    CensoringPattern,
    MlmdDataset,
    TrajectorySet,
    apply_multilabeling,
    fully_observed_pattern,
    simulate_censoring,
    simulate_trajectories,
)
from .likelihood import (
    FitData,
    ObservationIndex,
    complete_log_likelihood,
    partition_observed,
    proxy_log_likelihood,
)
from .sampler import (
    ChainState,
    PosteriorSamples,
    PriorSpec,
    SamplerConfig,
    SamplerInitError,
    gibbs_update_edges,
    metropolis_update_block,
    run_chain,
)
from .study import (
    BiasRecord,
    StudyGrid,
    desk_grid,
    estimate_lambdas,
    full_grid,
    mean_degree_curve,
    phase_comparisons,
    run_study,
    standardized_differences,
)
from .diagnostics import effective_sample_size, rhat, summarize_draws

__version__ = "0.1.0"
