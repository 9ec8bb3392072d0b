"""Mixtures of i.i.d. multinomial records from repeated QND measurements:
simulation, maximum-likelihood estimation, and Monte-Carlo checks of the
associated asymptotic theory (local asymptotic normality of mixtures,
Cramer-Rao saturation, mixture collapse, posterior purification).
"""

from .asymptotics import (
    ExperimentPlan,
    consistency_experiment,
    cramer_rao_experiment,
    lamn_experiment,
    log_likelihood_ratio,
    mixture_collapse_experiment,
    mle_path,
    purification_experiment,
)
from .errors import (
    CapabilityError,
    ConfigError,
    ConstructionError,
    DomainError,
    InferenceError,
    QndmixError,
    SingularFisherError,
)
from .estimate import (
    EstimationReport,
    LogLikelihood,
    limit_loglik,
    log_sum_paths,
    loglik,
    loglik_component,
    maximize_scalar,
    mle,
)
from .model import (
    Alphabet,
    ComponentSet,
    IdentifiabilityReport,
    InfoMatrix,
    MixtureWeights,
    ParameterBox,
    ParametricFamily,
    check_identifiability,
    fisher_information,
    kl_divergence,
    kl_matrix,
    shannon_entropy,
)
from .presets import PRESETS, Preset, get_preset, poisson_like_weights
from .quantum import (
    FilterState,
    QndSystem,
    filter_step,
    filter_trajectory,
    hermitian_expm,
)
from .simulate import (
    CountVector,
    Trajectory,
    counts,
    sample_component,
    sample_counts,
    sample_mixture_trajectory,
    sample_trajectory,
    substream,
    trajectory_from_json,
    trajectory_to_csv,
    trajectory_to_json,
)

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "CapabilityError",
    "ComponentSet",
    "ConfigError",
    "ConstructionError",
    "CountVector",
    "DomainError",
    "EstimationReport",
    "ExperimentPlan",
    "FilterState",
    "IdentifiabilityReport",
    "InferenceError",
    "InfoMatrix",
    "LogLikelihood",
    "MixtureWeights",
    "ParameterBox",
    "ParametricFamily",
    "PRESETS",
    "Preset",
    "QndSystem",
    "QndmixError",
    "SingularFisherError",
    "Trajectory",
    "check_identifiability",
    "consistency_experiment",
    "counts",
    "cramer_rao_experiment",
    "filter_step",
    "filter_trajectory",
    "fisher_information",
    "get_preset",
    "hermitian_expm",
    "kl_divergence",
    "kl_matrix",
    "lamn_experiment",
    "limit_loglik",
    "log_likelihood_ratio",
    "log_sum_paths",
    "loglik",
    "loglik_component",
    "maximize_scalar",
    "mixture_collapse_experiment",
    "mle",
    "mle_path",
    "poisson_like_weights",
    "purification_experiment",
    "sample_component",
    "sample_counts",
    "sample_mixture_trajectory",
    "sample_trajectory",
    "shannon_entropy",
    "substream",
    "trajectory_from_json",
    "trajectory_to_csv",
    "trajectory_to_json",
]
