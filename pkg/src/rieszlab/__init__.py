"""Riesz energies, geodesic-ball discrepancy and separation of finite
point sets on unit spheres and flat tori, with an N-sweep harness for
empirical convergence rates."""

__version__ = "0.1.0"

from .errors import DomainError, InputError, RieszlabError
from .manifold import (FlatTorus, Manifold, ManifoldKind, Point, Sphere,
                       TangentVector, ball_volume, euclidean_ball_volume,
                       exp_map, flat_torus, geodesic_distance, log_map,
                       make_manifold, sample_uniform, sphere)
from .pointsets import (PointSet, SeparationReport, farthest_point_sample,
                        fibonacci_sphere, kronecker_torus,
                        min_geodesic_distance, minimize_riesz_energy)
from .energy import (EnergyReport, continuous_energy, discrete_energy,
                     energy_gradient, energy_report, energy_via_distance_cdf,
                     mean_potential, punctured_mean_potential, riesz_kernel)
from .discrepancy import (DiscrepancyEstimate, ball_count, center_discrepancy,
                          estimate_discrepancy)
from .verify import (BoundCheckReport, check_ball_volume_flatness,
                     check_large_ball_bounds, check_mean_potential_holder,
                     check_packing_bound, check_small_ball_bounds,
                     check_small_ball_energy, energy_rate_exponent,
                     holder_exponent, packing_number)
from .experiment import (RateExperimentConfig, RateReport, fit_loglog,
                         geometric_schedule, run_rate_experiment)

__all__ = [
    "DomainError", "InputError", "RieszlabError",
    "FlatTorus", "Manifold", "ManifoldKind", "Point", "Sphere", "TangentVector",
    "ball_volume", "euclidean_ball_volume", "exp_map", "flat_torus",
    "geodesic_distance", "log_map", "make_manifold", "sample_uniform", "sphere",
    "PointSet", "SeparationReport", "farthest_point_sample", "fibonacci_sphere",
    "kronecker_torus", "min_geodesic_distance", "minimize_riesz_energy",
    "EnergyReport", "continuous_energy", "discrete_energy", "energy_gradient",
    "energy_report", "energy_via_distance_cdf", "mean_potential",
    "punctured_mean_potential", "riesz_kernel",
    "DiscrepancyEstimate", "ball_count", "center_discrepancy", "estimate_discrepancy",
    "BoundCheckReport", "check_ball_volume_flatness", "check_large_ball_bounds",
    "check_mean_potential_holder", "check_packing_bound", "check_small_ball_bounds",
    "check_small_ball_energy", "energy_rate_exponent", "holder_exponent",
    "packing_number",
    "RateExperimentConfig", "RateReport", "fit_loglog", "geometric_schedule",
    "run_rate_experiment",
]
