"""Explicit constants and desk-scale numerics for functional inequalities on H^n."""

from .constants import (
    ParameterError,
    ConstantsTable,
    constants_table,
    gamma_fn,
    sobolev_constant,
    sobolev_constant_integer,
    hls_constant,
    fundamental_constants,
    us_bound,
    vs_bound,
    hardy_constant,
    gn_constants,
    gn_sharp_constant,
    gross_gamma,
    gross_gamma_limit,
    lw_constant,
)
from .group import STD, FL, Convention, GroupPoint, compose, inverse, dilate, kaplan_norm, apply_field
from .calculus import (
    GridSpec,
    GridFunction,
    Measure,
    HAAR,
    sample,
    integrate,
    lp_norm,
    entropy_term,
    horizontal_gradient,
    dirichlet_form,
    sublaplacian,
)
from .spectral import (
    LambdaGrid,
    make_lambda_grid,
    SpectralCoefficients,
    SpectralMultiplier,
    analyze,
    synthesize,
    apply_multiplier,
    quadratic_form,
    frac_power,
    modified,
    IDENTITY,
    SUB_LAPLACIAN,
)

__version__ = "0.1.0"
