"""Finite-scale pressure, entropy and dimension estimates for free semigroup actions."""

from .bowen import (BowenBall, InclusionCertificate, bowen_ball_interval, bowen_ball_membership,
                    bowen_distance, bowen_distances, inclusion_check, word_ball_membership)
from .boxdim import BoxCountProfile, ball_sum_crossing, box_dimension, hausdorff_ball_sum
from .cocycle import (AveragedCocycle, LyapunovEstimate, TemperedDiagnostic, averaged_sum,
                      averaged_sums, birkhoff_word_sum, lyapunov_bounds, lyapunov_profile,
                      tempered_diagnostic)
from .errors import (BudgetExceededError, CommutationError, ConfigError, DomainError,
                     SolverError)
from .pressure import (ContinuityModulus, Cover, PressureEstimate, ScaleEstimates, SetSample,
                       build_cover, capacity_pressure, continuity_modulus, log_weighted_sum,
                       pesin_pressure, pressure_estimates, weighted_sum)
from .solver import (DimensionReport, PressureCurve, Scale, pressure_curve, root_from_alpha,
                     solve_bowen, solve_schedule)
from .systems import (OrbitTree, PiecewiseLinearMap, Potential, Potentials, SemigroupSystem,
                      apply_word, build_orbit_tree, builtin, cantor_k1, conjugate_system,
                      doubling_pair, heterogeneous_pair, reflection)
from .words import Word, enumerate_level, is_suffix, reverse

__all__ = [name for name in dir() if not name.startswith("_")]
