"""Spectral space-time solver and verification harness for the linear
stochastic heat equation on (0, 1) with additive and linear multiplicative
noise."""

from .spectral import (
    EigenBasis,
    build_basis,
    frac_norm,
    apply_laplacian_power,
    dual_pairing,
    mode_vector,
    eigenfunction_values,
)
from .noise import (
    QSpec,
    TimeGrid,
    Stream,
    NoiseSample,
    sample_noise,
    sample_noise_paths,
    hs_norm,
    regularity_coupling_norm,
)
from .mild import (
    MildPath,
    ou_step,
    mild_solve,
    convolution_moment,
    convolution_bound_check,
)
from .solver import (
    OperatorSpec,
    LoadSpec,
    SpaceTimeSolution,
    assemble_and_solve,
    residual,
    energy_norms,
    check_versions,
)

__version__ = "0.1.0"
