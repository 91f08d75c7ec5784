"""Klein-Gordon solver with Filon-type exponential integration."""

from ._kgfilon import (
    CrossCheckFailure,
    Error,
    Grid,
    InvalidArgument,
    MassModel,
    NonFiniteState,
    cli,
    constant_mass_exact,
    free_propagator,
    gaussian_initial_state,
    moments,
    run_convergence,
    run_omega_sweep,
    solve,
)

METHODS = ("rk2", "rk4", "xi3-filon", "xi3-gl4", "xi3-gl6", "xi3-gl8", "xi3-fine")

__all__ = [
    "METHODS",
    "CrossCheckFailure",
    "Error",
    "Grid",
    "InvalidArgument",
    "MassModel",
    "NonFiniteState",
    "cli",
    "constant_mass_exact",
    "free_propagator",
    "gaussian_initial_state",
    "moments",
    "run_convergence",
    "run_omega_sweep",
    "solve",
]
