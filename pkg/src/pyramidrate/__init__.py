"""Exponential convergence rates of survival probabilities for random walks
in polyhedral cones, with exact-DP and Monte Carlo cross-checks."""

__version__ = "0.1.0"

from .closed_forms import closed_form_gaussian, closed_form_weighted
from .distributions import (AtomicDistribution, GaussianDistribution, grad_laplace,
                            laplace, support_in_halfspace, tilt, validate_hypotheses)
from .errors import *  # noqa: F401,F403
from .geometry import (GeneratedCone, Pyramid, conic_membership, distance_to_cone,
                       dual_cone, extremal_directions, interior_point, project_onto_cone)
from .montecarlo import McConfig, halfspace_exit_prob, survival_mc
from .oracle_dp import (LatticeModel, SurvivalCurve, extract_rate, survival_dp,
                        survival_limit_estimate)
from .rate import classify_drift, compute_rate, minimize_over_dual, solve_su
