"""Radial harmonic analysis toolkit: generalized Hankel transform, semigroups,
potentials and wavelet-type inversion of potentials."""
from .potentials import (
    PotentialKind,
    bessel_kernel_profile,
    potential_apply_spectral,
    potential_apply_subordinated,
    potential_multiplier,
    riesz_kernel_check,
)
from .radial import (
    Decay,
    FrameworkParams,
    RadialProfile,
    SpectralProfile,
    default_grid,
    hankel_apply,
    make_params,
    multiplier_apply,
    radial_mass,
    strip_spectrum,
    sup_norm,
    unit_mass,
)
from .semigroups import (
    SemigroupKind,
    kernel_profile,
    semigroup_apply,
    semigroup_multiplier,
    subordinate_poisson_from_heat,
)
from .specfun import (
    DEFAULT_CFG,
    GOLDEN_CFG,
    DomainError,
    QuadratureConfig,
    QuadratureError,
    eval_gamma,
    eval_normalized_bessel,
    integrate_semi_infinite,
)
from .wavelets import (
    InversionReport,
    RouteMismatchError,
    WaveletFamily,
    WaveletMeasure,
    c_constant,
    design_measure,
    inversion_sweep,
    measure_laplace,
    wavelet_transform,
)

__version__ = "0.1.0"
