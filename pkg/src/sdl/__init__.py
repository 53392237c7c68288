"""Complete dictionary recovery over the sphere.

Library layout:

* ``linalg``    Jacobi eigensolver, PSD inverse square root, complements
* ``model``     synthetic instances (sparse coefficients, dictionaries)
* ``matio``     SDLM binary / CSV matrix files
* ``geometry``  objective, derivatives, sphere manifold operations
* ``trs``       trust-region subproblem solvers (exact and truncated CG)
* ``trm``       Riemannian trust-region driver and diagnostics
* ``simplex``   dense two-phase primal simplex
* ``rounding``  LP rounding of approximate directions
* ``pipeline``  precondition / recover-all / reconstruct / score
* ``phase``     phase-transition sweeps
* ``cli``       the ``sdl`` command-line harness
"""

from .errors import (Infeasible, InvalidInput, NumericalFailure, ParseError,
                     SdlError, SingularMatrix, Unbounded)
from .geometry import (Objective, Region, classify_region, exp_map,
                       normalize_sphere, objective_value, parallel_translate,
                       riem_grad, surrogate_eval)
from .model import (ProblemInstance, make_instance, sample_bg, sample_fixed_k,
                    sample_conditioned_dictionary, sample_orthogonal_dictionary)
from .pipeline import (RecoveryResult, match_signed_permutation, precondition,
                       recover_all, reconstruct_dictionary)
from .rounding import lp_round
from .trm import (SolveReport, SubproblemKind, TrmMode, TrmOptions, re_metric,
                  trm_solve)

__version__ = "0.1.0"

__all__ = [
    "Infeasible", "InvalidInput", "NumericalFailure", "ParseError", "SdlError",
    "SingularMatrix", "Unbounded", "Objective", "Region", "classify_region",
    "exp_map", "normalize_sphere", "objective_value", "parallel_translate",
    "riem_grad", "surrogate_eval", "ProblemInstance", "make_instance",
    "sample_bg", "sample_fixed_k", "sample_conditioned_dictionary",
    "sample_orthogonal_dictionary", "RecoveryResult",
    "match_signed_permutation", "precondition", "recover_all",
    "reconstruct_dictionary", "lp_round", "SolveReport", "SubproblemKind",
    "TrmMode", "TrmOptions", "re_metric", "trm_solve",
]
