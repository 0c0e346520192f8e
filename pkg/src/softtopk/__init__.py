"""Fast, differentiable and sparse top-k family operators.

The relaxed operators are p-norm-regularized linear programs over the
permutahedron, solved by reduction to isotonic optimization with exact
PAV, Dykstra and dual coordinate-ascent solvers, with closed-form
Jacobian products and a Fenchel-Young top-k loss.
"""

from .autodiff import JacobianPlan, block_jacobian_row, jvp, make_plan, vjp
from .exceptions import InvalidArgumentError, NumericError, UnsupportedConfigError
from .hard import argsort, lmo, rank, sort_desc, topk, topkmag, topkmask
from .isotonic import (IsotonicProblem, IsotonicSolution, dual_bca_solve,
                       dykstra_solve, pav_solve, pool_subproblem)
from .loss import LossConfig, fy_topk_loss
from .regularization import PhiKind, Regularizer
from .relaxed import (OperatorSpec, RelaxedOutput, f_value, relaxed_apply,
                      soft_rank, soft_signed_topkmask, soft_sort,
                      soft_topkmag, soft_topkmask)

__all__ = [
    "InvalidArgumentError", "NumericError", "UnsupportedConfigError",
    "PhiKind", "Regularizer",
    "argsort", "sort_desc", "rank", "topkmask", "topk", "topkmag", "lmo",
    "IsotonicProblem", "IsotonicSolution", "pool_subproblem", "pav_solve",
    "dykstra_solve", "dual_bca_solve",
    "OperatorSpec", "RelaxedOutput", "relaxed_apply", "f_value",
    "soft_topkmask", "soft_topkmag", "soft_signed_topkmask",
    "soft_sort", "soft_rank",
    "JacobianPlan", "make_plan", "block_jacobian_row", "vjp", "jvp",
    "LossConfig", "fy_topk_loss",
]

__version__ = "0.1.0"
