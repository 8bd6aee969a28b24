"""Stochastic Lie systems: Stratonovich simulation, Lie/Hamiltonian structure
verification, and superposition rules checked pathwise on shared noise."""

from .core import (Domain, DriverPath, LieSystem, ScalarField, State,
                   VectorField, assemble_operator, brownian_family,
                   brownian_path, validate_state, zero_noise_path)
from .errors import (ConfigError, DomainError, LieSdeError, NoFullRank,
                     NumericsError, ShapeError, SingularFormError,
                     SingularRuleError, StudyFailed, UnsupportedError,
                     VerificationInconclusive)
from .liealg import (check_structure_constants, commutator, commutator_fd,
                     minimal_prolongation_order, prolong_field,
                     prolong_function, wedge_determinant)
from .hamiltonian import (HamiltonianStructure, Polynomial, SymplecticForm,
                          casimir_constant, check_casimir,
                          check_hamiltonian_pair, check_lh_brackets,
                          poisson_bracket, prolong_structure, sl2_casimir)
from .integrate import (ITO_CORRECTION_SIGN, Trajectory, convergence_study,
                        integrate_ito, integrate_stratonovich,
                        stratonovich_to_ito_drift)
from .catalog import (BUILDERS, CatalogEntry, FirstIntegral,
                      compare_oscillator_reduction, corona, ermakov,
                      get_entry, gbm_stratonovich_solution, gbm_system,
                      lv_additive, lv_diffusion, oscillator,
                      oscillator_reduction, riccati)
from .superposition import (SuperpositionRule, check_first_integrals_along_path,
                            check_jacobian_condition, eval_corona_rule,
                            eval_lv_rule, eval_riccati_rule, solve_constants,
                            verify_pathwise)

__version__ = "0.1.0"
