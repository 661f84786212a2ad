"""Phase-incoherence risk for delayed, noisy wide-area frequency control."""

from ._core import (
    ConvergenceError,
    Error,
    InfeasibleError,
    ScaledParams,
    Spectrum,
    SystemicSet,
    ValidationError,
    characteristic,
    decompose_laplacian,
    f,
    f_lower_bound,
    frak_f,
    impulse_integral,
    load_network,
    membership,
    network_stable,
    nu_epsilon,
    rightmost_root,
    risk,
    risk_from_definition,
    scale,
    sigma_pairs,
    sigma_star,
    simulate,
    synthesize,
)

__version__ = "0.3.0"
