"""treecast: can a routing scheme transmit a signal indefinitely on a tree?

Vertices of a rooted m-ary tree carry i.i.d. transceiver strengths, edges
carry i.i.d. costs.  Three forwarding schemes (augmented, complete,
boundary) are decided analytically where sharp criteria exist and by
reproducible simulation elsewhere; a threshold finder locates critical
parameter values of one-parameter families.
"""

__version__ = "0.1.0"

from .analysis import (
    Family,
    SchemeError,
    SchemeVerdict,
    ThresholdEstimate,
    boundary_branching_check,
    boundary_vs_augmented_sweep,
    family_from_json,
    find_threshold,
    poisson_strength_family,
    scheme_report,
    scheme_verdict,
    shift_mass_to_zero,
    single_path_verdict,
    two_point_strength_family,
)
from .backend import backend_name
from .chains import (
    ChainKind,
    DecayEstimate,
    alive_probability,
    boundary_step,
    complete_step,
    spectral_decay,
    splitting_decay,
)
from .distributions import (
    Constant,
    Dist,
    FiniteLattice,
    Pareto,
    Poisson,
    Zeta,
    dist_from_json,
    dist_to_json,
    log_mgf,
    mean,
    sample,
)
from .errors import (
    ConfigError,
    DegenerateExtinction,
    InternalConsistencyError,
    NoSignChange,
    NotLatticeFinite,
    PreconditionError,
)
from .model import ModelConfig, Scheme, Verdict
from .rates import RateReport, augmented_verdict, front_speed, log_mgf_gain, rate_function
from .rng import RandomStream
from .treesim import TreeRunReport, boundary_wavefront, run_coupled, simulate_front_speed

__all__ = [
    "__version__",
    "Family",
    "SchemeError",
    "SchemeVerdict",
    "ThresholdEstimate",
    "boundary_branching_check",
    "boundary_vs_augmented_sweep",
    "family_from_json",
    "find_threshold",
    "poisson_strength_family",
    "scheme_report",
    "scheme_verdict",
    "shift_mass_to_zero",
    "single_path_verdict",
    "two_point_strength_family",
    "backend_name",
    "ChainKind",
    "DecayEstimate",
    "alive_probability",
    "boundary_step",
    "complete_step",
    "spectral_decay",
    "splitting_decay",
    "Constant",
    "Dist",
    "FiniteLattice",
    "Pareto",
    "Poisson",
    "Zeta",
    "dist_from_json",
    "dist_to_json",
    "log_mgf",
    "mean",
    "sample",
    "ConfigError",
    "DegenerateExtinction",
    "InternalConsistencyError",
    "NoSignChange",
    "NotLatticeFinite",
    "PreconditionError",
    "ModelConfig",
    "Scheme",
    "Verdict",
    "RateReport",
    "augmented_verdict",
    "front_speed",
    "log_mgf_gain",
    "rate_function",
    "RandomStream",
    "TreeRunReport",
    "boundary_wavefront",
    "run_coupled",
    "simulate_front_speed",
]
