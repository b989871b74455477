"""Time evolution, symmetry tracking and steady profiles for KdV and CH."""
from .profiles import (TravelingProfile, ch_period, ch_traveling_profile, steady_rhs,
                       bump_bank, weak_steady_residual)
from .solvers import (EvolutionConfig, Trajectory, conserved_quantities, evolve, kdv_soliton,
                      periodic_grid, relative_l2)
from .symmetry import (SymmetryAxisSeries, best_shift, reflection_axis, shape_drift,
                       track_symmetry_axis)

__all__ = [
    "EvolutionConfig", "Trajectory", "SymmetryAxisSeries", "TravelingProfile",
    "evolve", "conserved_quantities", "kdv_soliton", "periodic_grid", "relative_l2",
    "track_symmetry_axis", "reflection_axis", "shape_drift", "best_shift",
    "ch_traveling_profile", "ch_period", "steady_rhs", "bump_bank", "weak_steady_residual",
]
