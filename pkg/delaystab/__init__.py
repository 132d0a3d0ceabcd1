"""Stability of x'(t) = -a x(t) - b int x(t - tau) d eta(tau) for distributed delays."""

from delaystab.boundary import chart, trace_boundary
from delaystab.charfun import count_unstable_roots, leading_root
from delaystab.criteria import (
    StabilityStatus,
    StabilityVerdict,
    classify_region,
    hayes_verdict,
    hopf_crossings,
    sufficient_test,
    universal_bound,
)
from delaystab.distributions import (
    DiracMass,
    DiscreteMixture,
    Exponential,
    GammaKernel,
    Uniform,
    scale_to_mean,
    trig_moments,
)
from delaystab.extremal import reduce_to_extremal
from delaystab.simulator import decay_rate, simulate

__version__ = "0.1.0"
