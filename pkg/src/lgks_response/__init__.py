"""Markovian open quantum systems: LGKS generators, steady-state response and thermodynamics."""
from .core import (EigenSystem, commutator, eigendecompose_hermitian, expectation,
                   gibbs_state, load_operator, save_operator, vectorize_superoperator)
from .errors import *  # noqa: F401,F403
from .lgks import (BathSpec, Dissipator, Generator, Liouvillian, apply_adjoint,
                   bath_rate, bohr_decompose, bose_occupation, build_dissipator,
                   build_liouvillian, flat_rate, nearest_rate, propagate,
                   propagate_samples, steady_state)
from .perturb import (FirstOrderProblem, build_first_order_generator,
                      build_global_perturbed, build_local_perturbed,
                      classify_regime, expand_coupling_operators,
                      first_order_corrections, first_order_pipeline,
                      first_order_problem, first_order_state,
                      stationary_first_order_state)
from .response import (ResponseTrace, cumulative_response, finite_difference_oracle,
                       integrated_response, response_function, steady_state_response)
from .thermo import (ThermoSnapshot, entropy_first_order, entropy_production,
                     entropy_production_first_order, heat_current,
                     heat_current_first_order, spohn_functional, von_neumann_entropy)

__version__ = "0.1.0"
