"""Gaussian quantum statistics of light from a driven, lossy polariton fluid."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .params import (BISTABILITY_THRESHOLD, MeanFieldState, PhysicalParams, density_branches,
                     mean_field_state, pump_for_density, steady_state)
from .bogoliubov import ModeClass, classify, diffusive_radii, evolution_coeffs, omega, propagator
from .correlations import delayed_moments, langevin_oracle, ode_steady_oracle, steady_moments
from .upb import (GaussianSingleMode, InterferenceConfig, alpha_opt, g2_delay, g2_opt,
                  optimal_config, squeeze_params_from_moments, upb_scan)
from .spatial import FilterConfig, RadialGrid, g2_map, hankel_moment
from .imperfections import (dephasing_budget, disorder_response, disorder_tolerance,
                            noise_budget, thermal_degradation)
