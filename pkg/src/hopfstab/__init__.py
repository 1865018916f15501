"""Hopf bifurcation stability toolkit: onset solves, first Lyapunov
coefficient, coupled-adjoint gradients, and stability-constrained
optimization on bundled model problems."""

from .counters import EvalCounter, SolveLog
from .dynsys import (DynSystem, TensorEps, TensorMode, bilinear, fd_bilinear,
                     fd_trilinear, jacobian, residual, trilinear)
from .equilibrium import EquilibriumResult, solve_equilibrium
from .errors import (ConfigurationError, DegeneracyError, EvaluationError,
                     HopfStabError, InputError, SolverError)
from .hopf import (HopfLeftState, HopfRightState, init_hopf_guess, jacobian_left,
                   jacobian_right, residual_left, residual_right, solve_left_evp,
                   solve_right_evp)
from .lyapunov import (LyapunovReport, Stability, classify_bifurcation,
                       first_lyapunov, scaling_invariance_check)
from .adjoint import (GradientReport, LyapunovPartials, adjoint_solve_left,
                      adjoint_solve_right, fd_total_gradient, lyapunov_partials,
                      total_gradient)
from .pipeline import FKind, HopfSolution, solve_hopf
from .models import make_algebraic_model, make_cgl_model, make_typical_section
from .models.algebraic import closed_form_hopf
from .models.cgl import CGLConfig
from .models.typical_section import TypicalSectionParams
from .optimize import OptProblem, OptResult, evaluate_design, run_optimization
from .simulate import Trajectory, classify_trajectory, integrate, lco_amplitude_sweep

__all__ = [name for name in dir() if not name.startswith("_")]
