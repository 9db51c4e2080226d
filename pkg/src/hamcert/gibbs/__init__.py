from .certification import GibbsVerdict, InsufficientCopiesError, certification_parameters, certify_gibbs
from .learning import (
    LearnResult,
    estimate_observable_gaps,
    learn_gibbs,
    learning_parameters,
    max_gap_deviation,
    select_from_net,
)
from .net import DEFAULT_NET_CAP, NetIndex, NetTooLargeError, net_iter
from .shadows import (
    SHADOW_CONSTANT,
    ShadowEstimate,
    calibrate_shadow_constant,
    concentration_rate,
    exact_shadow,
    shadow_acquire,
    shadow_copies,
    shadow_errors,
)
from .state import GibbsState, PinskerBounds, gibbs_state, pinsker_bounds, trace_distance

__all__ = [
    "DEFAULT_NET_CAP",
    "GibbsState",
    "GibbsVerdict",
    "InsufficientCopiesError",
    "LearnResult",
    "NetIndex",
    "NetTooLargeError",
    "PinskerBounds",
    "SHADOW_CONSTANT",
    "ShadowEstimate",
    "calibrate_shadow_constant",
    "certification_parameters",
    "certify_gibbs",
    "concentration_rate",
    "estimate_observable_gaps",
    "exact_shadow",
    "gibbs_state",
    "learn_gibbs",
    "learning_parameters",
    "max_gap_deviation",
    "net_iter",
    "pinsker_bounds",
    "select_from_net",
    "shadow_acquire",
    "shadow_copies",
    "shadow_errors",
    "trace_distance",
]
