"""Stability of stationary curves of quadratic-plus-potential functionals.

The second variation of int_a^b (theta' - A)^2/2 - V(theta) ds at a
stationary solution is classified through two phase-plane counts: I, the
turning points of theta, and J, the signed count of potential-boundary
crossings. A Sturm-Liouville conjugate-point solver provides an independent
spectral verdict for cross-validation, and the rod module applies the
machinery to the equilibria of an intrinsically curved elastic rod loaded
by a point weight.
"""

from .arclen import ArcSpec, alpha, arc_length, dlength_dE, turning_abscissa
from .classify import (PerturbationProfile, StabilityVerdict, beta,
                       classify_constant, classify_dirichlet, classify_neumann,
                       destabilizing_perturbation, second_variation,
                       settled_perturbation)
from .conjugate import (ConjugateReport, SLProblem, conjugate_points,
                        fd_negative_count, fd_spectrum, from_trajectory,
                        inborn_eigenvalues, index_dirichlet, index_neumann,
                        oracle_verdict, solve_h)
from .elliptic import ellip_F, ellip_K, jacobi_am
from .errors import *  # noqa: F401,F403  (error taxonomy is public API)
from .phase import (Dirichlet, IndexReport, Neumann, ProblemSpec, Trajectory,
                    index_I, index_J, index_report, integrate_ivp,
                    pseudo_energy, shoot_dirichlet, shoot_neumann)
from .potential import BoundarySet, Potential, make_builtin, stationary_points
from .rod import (Fig8Table, RodEquilibrium, RodParams, closed_form_theta,
                  ell, enumerate_equilibria, fig8_curves, l_open,
                  reconstruct_theta, swing_length, total_energy)

__version__ = "0.1.0"
