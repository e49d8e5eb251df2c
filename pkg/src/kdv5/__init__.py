"""Pseudospectral simulator and weighted-norm diagnostics for the
fifth-order KdV equations u_t + u_xxxxx + u^k u_x = 0, k = 1 or 2."""

from .errors import BlowUpError, ConfigError, DomainTooSmallError, NoContractionError
from .grid import (
    Grid,
    RealField,
    Spectrum,
    bessel_potential,
    derivative,
    fractional_derivative,
    free_propagate,
    from_spectrum,
    make_grid,
    to_spectrum,
)
from .evolution import (
    Trajectory,
    duhamel_residual,
    integrate,
    nonlinear_term,
    picard_solve,
    picard_solve_shrinking,
)
from .diagnostics import (
    NormSpec,
    apriori_h2_bound,
    conserved_quantities,
    interpolation_check,
    lambda_norms,
    leibniz_check,
    mixed_spacetime_norm,
    pointwise_formula_residual,
    second_derivative_energy_bound,
    sobolev_norm,
    weighted_energy_residual,
    weighted_l2_norm,
)
from .weights import (
    odd_weight,
    smooth_weight,
    truncated_weight,
    verify_weight_bounds,
)

__version__ = "0.1.0"
