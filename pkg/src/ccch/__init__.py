"""Simulation laboratory for the cross-coupled Camassa-Holm system."""

from .dynamics import (
    CALIBRATED_CS,
    SolverParams,
    evolve_characteristics,
    integrate,
    lifespan_estimate,
    rhs_momentum,
    rhs_velocity,
    step_rk4,
    support_diagnostic,
)
from .norms import besov_norm, lp_norm, sobolev_norm, sup_norm
from .peakon import PeakonConfiguration, exact_traveling_peakon, integrate_peakons, peakon_rhs, weak_residual
from .spectral import (
    Field,
    FieldState,
    GridSpec,
    PDEParams,
    dealiased_product,
    deriv,
    helmholtz,
    helmholtz_inv,
    make_grid,
    mollify,
)

__version__ = "0.1.0"

__all__ = [
    "CALIBRATED_CS",
    "Field",
    "FieldState",
    "GridSpec",
    "PDEParams",
    "PeakonConfiguration",
    "SolverParams",
    "besov_norm",
    "dealiased_product",
    "deriv",
    "evolve_characteristics",
    "exact_traveling_peakon",
    "helmholtz",
    "helmholtz_inv",
    "integrate",
    "integrate_peakons",
    "lifespan_estimate",
    "lp_norm",
    "make_grid",
    "mollify",
    "peakon_rhs",
    "rhs_momentum",
    "rhs_velocity",
    "sobolev_norm",
    "step_rk4",
    "sup_norm",
    "support_diagnostic",
    "weak_residual",
]
