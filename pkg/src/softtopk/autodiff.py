"""Closed-form Jacobian products for the relaxed operators.

The chain is y = grad R*(x - u), u = Q v(Q^T x), where Q is the signed
sorting permutation and v has a block-constant Jacobian: inside a block B
with value gamma,

    d gamma / d s_i = m_i / D_B,

with m_i = |gamma - s_i|^(q-2) and D_B = sum_j m_j for phi(x) = x, and
m_i = (q-1)|gamma - s_i|^(q-2), D_B = sum_j m_j + lam^(q-1) w_j for
phi(x) = x^2/2 (the lam^(q-1) factor comes from rescaling the block
stationarity condition by the regularization strength).  Rows of blocks
clamped by the non-negativity truncation are zero.  Everything is O(n);
no linear system and no unrolled iterations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgumentError
from .hard import as_vector
from .regularization import PhiKind, Regularizer
from .relaxed import HARD_CUTOFF, OperatorSpec, RelaxedOutput


@dataclass(frozen=True)
class JacobianPlan:
    """Reusable factorization of the operator Jacobian at one point."""

    sigma: np.ndarray
    signs: np.ndarray
    block_starts: np.ndarray
    block_ends: np.ndarray
    coord_weights: np.ndarray  # m_i, zeroed on clamped blocks
    block_denoms: np.ndarray   # D_B (set to 1 where the whole row is zero)
    hess: np.ndarray           # (r*)''(x - u), elementwise outer factor
    degenerate: bool = False


def make_plan(x, spec: OperatorSpec, out: RelaxedOutput) -> JacobianPlan:
    """Build the Jacobian factorization from a relaxed_apply output."""
    x = as_vector(x)
    if x.size != out.y.size:
        raise InvalidArgumentError("x does not match the relaxed output")
    reg = spec.reg
    if reg.lam < HARD_CUTOFF:
        # Hard operator: piecewise constant, zero Jacobian a.e.
        zeros = np.zeros(x.size)
        return JacobianPlan(sigma=out.sigma, signs=out.signs,
                            block_starts=out.solution.block_starts,
                            block_ends=out.solution.block_ends,
                            coord_weights=zeros, block_denoms=np.ones(1),
                            hess=zeros, degenerate=True)
    sol = out.solution
    starts, ends = sol.block_starts, sol.block_ends
    sizes = ends - starts
    gamma_per_coord = np.repeat(sol.gammas, sizes)
    q = reg.q
    gap = np.abs(gamma_per_coord - out.s)
    m = gap ** (q - 2.0) if q != 2.0 else np.ones_like(gap)
    if spec.phi is PhiKind.HALF_SQUARE:
        m = (q - 1.0) * m
        denoms = np.add.reduceat(m, starts) + reg.lam ** (q - 1.0) * \
            np.add.reduceat(out.w_sorted, starts)
    else:
        denoms = np.add.reduceat(m, starts)
    # Degenerate blocks (all weights vanished, only possible at exact-tie
    # inputs with zero total weight): fall back to the uniform subgradient.
    bad = denoms <= 0.0
    if np.any(bad):
        uniform = np.repeat(bad, sizes)
        m = np.where(uniform, 1.0, m)
        denoms = np.where(bad, sizes.astype(float), denoms)
    # Clamped (truncated) blocks contribute zero rows.
    clamped_coords = np.repeat(out.clamped, sizes)
    m = np.where(clamped_coords, 0.0, m)
    denoms = np.where(out.clamped, 1.0, denoms)
    hess = reg.rstar_hess(x - out.u)
    return JacobianPlan(sigma=out.sigma, signs=out.signs, block_starts=starts,
                        block_ends=ends, coord_weights=m, block_denoms=denoms,
                        hess=hess)


def block_jacobian_row(plan: JacobianPlan, block: int) -> np.ndarray:
    """d gamma_B / d s_i over the coordinates of one block."""
    if not 0 <= block < plan.block_starts.size:
        raise InvalidArgumentError(f"block index {block} out of range")
    lo, hi = plan.block_starts[block], plan.block_ends[block]
    return plan.coord_weights[lo:hi] / plan.block_denoms[block]


def _iso_matvec(plan: JacobianPlan, t: np.ndarray) -> np.ndarray:
    """J t for the block Jacobian J of the isotonic solution."""
    dots = np.add.reduceat(plan.coord_weights * t, plan.block_starts)
    sizes = plan.block_ends - plan.block_starts
    return np.repeat(dots / plan.block_denoms, sizes)


def _iso_rmatvec(plan: JacobianPlan, g: np.ndarray) -> np.ndarray:
    """J^T g for the block Jacobian J of the isotonic solution."""
    sums = np.add.reduceat(g, plan.block_starts)
    sizes = plan.block_ends - plan.block_starts
    return plan.coord_weights * np.repeat(sums / plan.block_denoms, sizes)


def _to_sorted(plan: JacobianPlan, t: np.ndarray) -> np.ndarray:
    return (plan.signs * t)[plan.sigma]


def _from_sorted(plan: JacobianPlan, t_s: np.ndarray) -> np.ndarray:
    out = np.empty_like(t_s)
    out[plan.sigma] = t_s
    return plan.signs * out


def jvp(x, spec: OperatorSpec, out: RelaxedOutput, tangent) -> np.ndarray:
    """Directional derivative of y along ``tangent``."""
    tangent = as_vector(tangent, "tangent")
    if tangent.size != out.y.size:
        raise InvalidArgumentError("tangent shape mismatch")
    plan = make_plan(x, spec, out)
    if plan.degenerate:
        return np.zeros_like(tangent)
    ju_t = _from_sorted(plan, _iso_matvec(plan, _to_sorted(plan, tangent)))
    return plan.hess * (tangent - ju_t)


def vjp(x, spec: OperatorSpec, out: RelaxedOutput, cotangent) -> np.ndarray:
    """Gradient of <cotangent, y> with respect to x."""
    cotangent = as_vector(cotangent, "cotangent")
    if cotangent.size != out.y.size:
        raise InvalidArgumentError("cotangent shape mismatch")
    plan = make_plan(x, spec, out)
    if plan.degenerate:
        return np.zeros_like(cotangent)
    g = plan.hess * cotangent
    jut_g = _from_sorted(plan, _iso_rmatvec(plan, _to_sorted(plan, g)))
    return g - jut_g
