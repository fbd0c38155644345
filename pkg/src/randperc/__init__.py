"""Random entanglement percolation: SCP statistics, PDL-induced laws and lattice Monte Carlo."""

import importlib

from randperc.distributions import (
    Bernoulli,
    Beta,
    DistributionStats,
    Discrete,
    Empirical,
    Haar,
    PointMass,
    ScpDistribution,
    SymmetricBimodal,
    TruncatedGaussian,
    Uniform,
    beta_expected_min,
    expected_min,
    mean_abs_diff,
    shape_constant,
    stats,
)

__version__ = "0.1.0"

# the PDL and lattice modules pull in numba, so load them on first use
_LAZY = {
    "randperc.pdl": ["ConcatenatedLink", "MaxwellianPdl", "PdlInduced", "WeakElementChain", "induced_scp_density",
                     "mean_scp", "pdl_from_scp", "scp_from_pdl", "weak_element_chain", "weak_pdl_mean_approx"],
    "randperc.lattice": ["Lattice", "QSwapPlan", "build_lattice", "honeycomb_to_triangular", "q_swap"],
}
_OWNER = {name: mod for mod, names in _LAZY.items() for name in names}


def __getattr__(name):
    if name in _OWNER:
        return getattr(importlib.import_module(_OWNER[name]), name)
    raise AttributeError(f"module 'randperc' has no attribute {name!r}")


def __dir__():
    return sorted(list(globals()) + list(_OWNER))
