"""lp-relaxation dynamics on finite graphs with boundary.

Core objects: :class:`~lprelax.graph.Graph` instances with an
interior/boundary split, a certified p-harmonic extension solver, the
asynchronous/cyclic/synchronous relaxation dynamics with approximation-time
measurement, and numeric verification suites for the convergence-rate theory.
"""

from .analysis import (InequalityReport, SpectralReport, beta_exponent,
                       check_gamma_hitting_bounds, check_k4_epsilon_exponent,
                       check_kernel_inequalities, check_p2_bounds,
                       check_poincare, check_pythagoras_p2, energy,
                       expected_energy_decrease, expected_norm_decrease,
                       fit_scaling_exponent, hitting_times, rate_function,
                       spectral_gamma, theta_exponent, weighted_norm)
from .dynamics import (DynamicsState, Schedule, TauEstimate, TrialOutcome,
                       estimate_expected_tau, make_state, run_coupled,
                       run_sync_vs_cyclic_cover, run_tau, step)
from .extension import (ExtensionResult, InvalidBoundary, NonConvergence,
                        p_harmonic_extension, residual)
from .graph import (DoubleCoverMap, Graph, ValidationReport, average_degree,
                    double_cover, generate, parse_graph, parse_profile,
                    serialize_graph, serialize_profile, validate)
from .kernel import (LocalSolveConfig, classify, local_argmin,
                     monotone_path_witness, p_laplacian, u_func, validate_p)
from .rng import SplitMix64, derive_seed
from .suites import SUITES, run_suite

__version__ = "0.1.0"
