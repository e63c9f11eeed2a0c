"""Single-letter exponent bounds for distributed hypothesis testing."""

from .bounds import (
    AuxiliaryReceiver,
    BoundResult,
    DiscreteScenario,
    MembershipReport,
    ac_lower_bound,
    addsub_upper_bound,
    centralized_bound,
    chain_bound,
    conditional_independence_scenario,
    corollary1_bound,
    g_bound,
    j_augmented_bound,
    membership_R_check,
    membership_Rtilde_check,
    rw_bound,
)
from .errors import EvaluationError, IndeterminateError, ValidationError
from .inner import ChannelQuad, FResult, f_max, f_objective, gaussian_unbounded_check, thm2_cap
from .optimize import OptimizerConfig

__version__ = "0.1.0"
