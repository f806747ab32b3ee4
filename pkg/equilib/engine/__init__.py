"""equilib computation engine."""

from .charges import Charge, ChargeSet, ComplexPoint, PairConfig, field_derivative, field_eval
from .oracle import Grid, GridMeasure, frostman_residual, grid_energy, grid_potential, minimize
from .pair_phases import Phase, classify, gamma1, gamma2, geometry
from .pair_solver import DensityFn, equilibrium_density, solve_endpoints
from .render import CsvRenderer
from .signed_equilibrium import SignedDensity, SupportSet, signed_density_eval

__all__ = [
    "Charge",
    "ChargeSet",
    "ComplexPoint",
    "PairConfig",
    "field_eval",
    "field_derivative",
    "Grid",
    "GridMeasure",
    "grid_energy",
    "grid_potential",
    "minimize",
    "frostman_residual",
    "Phase",
    "classify",
    "gamma1",
    "gamma2",
    "geometry",
    "DensityFn",
    "equilibrium_density",
    "solve_endpoints",
    "CsvRenderer",
    "SignedDensity",
    "SupportSet",
    "signed_density_eval",
]
