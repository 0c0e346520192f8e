"""User-facing relaxed operators.

The pipeline is: sort the input (or its magnitudes), solve the reduced
isotonic problem, truncate to the non-negative cone when the nonlinearity
is even, unsort, restore signs, and map through the gradient of the
regularizer's conjugate:

    y* = grad R*(x - u*),   u* = sign(x) o v*_{sigma^{-1}}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgumentError
from .hard import argsort, as_vector, invert_permutation, sort_desc
from .isotonic import (IsotonicProblem, IsotonicSolution, dual_bca_solve,
                       dykstra_solve, group_blocks, pav_solve)
from .regularization import PhiKind, Regularizer

# Below this strength the conjugate kernel degenerates numerically and the
# hard operator is returned directly.
HARD_CUTOFF = 1e-12

SOLVERS = ("pav", "dykstra", "dual_bca")


@dataclass(frozen=True)
class OperatorSpec:
    """Which relaxed operator to compute.

    Exactly one of ``w`` (explicit weight vector) and ``k`` (meaning
    w = (1,...,1,0,...,0) with k ones) must be given.
    """

    phi: PhiKind
    reg: Regularizer
    w: np.ndarray | None = None
    k: int | None = None

    def __post_init__(self):
        if (self.w is None) == (self.k is None):
            raise InvalidArgumentError("exactly one of w and k must be set")
        if self.k is not None and int(self.k) < 1:
            raise InvalidArgumentError(f"k must be positive, got {self.k}")
        if self.w is not None:
            w = as_vector(self.w, "w")
            if self.phi.is_even and np.any(w < 0):
                raise InvalidArgumentError("w must be non-negative when phi is even")
            object.__setattr__(self, "w", w)

    @classmethod
    def top_k(cls, phi: PhiKind, reg: Regularizer, k: int) -> "OperatorSpec":
        return cls(phi=phi, reg=reg, k=int(k))

    @classmethod
    def with_weights(cls, phi: PhiKind, reg: Regularizer, w) -> "OperatorSpec":
        return cls(phi=phi, reg=reg, w=np.asarray(w, dtype=float))

    def sorted_weights(self, n: int) -> np.ndarray:
        """Weight vector sorted descending, validated against dimension n."""
        if self.k is not None:
            k = int(self.k)
            if k > n:
                raise InvalidArgumentError(f"k={k} exceeds input length {n}")
            w = np.zeros(n)
            w[:k] = 1.0
            return w
        if self.w.size != n:
            raise InvalidArgumentError(
                f"weight length {self.w.size} does not match input length {n}")
        return sort_desc(self.w)


@dataclass(frozen=True)
class RelaxedOutput:
    """Everything needed to evaluate and differentiate without re-solving."""

    y: np.ndarray
    u: np.ndarray
    solution: IsotonicSolution
    sigma: np.ndarray
    signs: np.ndarray
    s: np.ndarray
    w_sorted: np.ndarray
    clamped: np.ndarray  # one flag per block; True where truncation applied

    @property
    def v(self) -> np.ndarray:
        return self.solution.v


def _solve(prob: IsotonicProblem, solver: str, dykstra_iterations: int,
           bca_tol: float, bca_max_sweeps: int) -> IsotonicSolution:
    if solver == "pav":
        return pav_solve(prob)
    if solver == "dykstra":
        v = dykstra_solve(prob, dykstra_iterations)
        starts, ends, gammas = group_blocks(v)
        return IsotonicSolution(v=v, block_starts=starts, block_ends=ends,
                                gammas=gammas)
    if solver == "dual_bca":
        return dual_bca_solve(prob, tol=bca_tol, max_sweeps=bca_max_sweeps)
    raise InvalidArgumentError(f"unknown solver {solver!r}; expected one of {SOLVERS}")


def _truncate_nonneg(sol: IsotonicSolution) -> tuple[IsotonicSolution, np.ndarray]:
    """Clamp negative block values to zero and merge the clamped tail."""
    neg = sol.gammas < 0.0
    if not np.any(neg):
        return sol, np.zeros(sol.num_blocks, dtype=bool)
    first = int(np.argmax(neg))  # gammas are non-increasing: a clamped suffix
    starts = np.append(sol.block_starts[:first], sol.block_starts[first])
    ends = np.append(sol.block_ends[:first], sol.block_ends[-1])
    gammas = np.append(sol.gammas[:first], 0.0)
    clamped = np.zeros(first + 1, dtype=bool)
    clamped[first] = True
    v = np.maximum(sol.v, 0.0)
    return (IsotonicSolution(v=v, block_starts=starts, block_ends=ends,
                             gammas=gammas, converged=sol.converged), clamped)


def _hard_output(x: np.ndarray, spec: OperatorSpec) -> RelaxedOutput:
    # lam -> 0 short circuit: y_phi = phi'(x) o w_{rank(phi(x))}.  The
    # RelaxedOutput invariant y = grad R*(x - u) is vacuous here.
    n = x.size
    w_sorted = spec.sorted_weights(n)
    if spec.phi.is_even:
        signs = np.sign(x)
        a = np.abs(x)
    else:
        signs = np.ones(n)
        a = x
    sigma = argsort(a)
    s = a[sigma]
    y = spec.phi.grad(x) * w_sorted[invert_permutation(sigma)]
    starts = np.arange(n, dtype=np.int64)
    sol = IsotonicSolution(v=s.copy(), block_starts=starts, block_ends=starts + 1,
                           gammas=s.copy())
    return RelaxedOutput(y=y, u=x.copy(), solution=sol, sigma=sigma, signs=signs,
                         s=s, w_sorted=w_sorted,
                         clamped=np.zeros(n, dtype=bool))


def relaxed_apply(x, spec: OperatorSpec, solver: str = "pav", *,
                  dykstra_iterations: int = 100, bca_tol: float = 1e-10,
                  bca_max_sweeps: int = 1000) -> RelaxedOutput:
    """Compute the relaxed operator y_{phi,R}(x, w) with full intermediates.

    The output satisfies the Danskin identity: y is the gradient of
    f_value with respect to x.
    """
    x = as_vector(x)
    if spec.reg.lam < HARD_CUTOFF:
        return _hard_output(x, spec)
    n = x.size
    w_sorted = spec.sorted_weights(n)
    if spec.phi.is_even:
        signs = np.sign(x)
        a = np.abs(x)
    else:
        signs = np.ones(n)
        a = x
    sigma = argsort(a)
    s = a[sigma]
    prob = IsotonicProblem(s=s, w=w_sorted, phi=spec.phi, reg=spec.reg)
    sol = _solve(prob, solver, dykstra_iterations, bca_tol, bca_max_sweeps)
    if spec.phi.is_even:
        sol, clamped = _truncate_nonneg(sol)
    else:
        clamped = np.zeros(sol.num_blocks, dtype=bool)
    u = np.empty(n)
    u[sigma] = sol.v
    u *= signs
    y = spec.reg.rstar_grad(x - u)
    return RelaxedOutput(y=y, u=u, solution=sol, sigma=sigma, signs=signs,
                         s=s, w_sorted=w_sorted, clamped=clamped)


def f_value(x, spec: OperatorSpec, solver: str = "pav") -> float:
    """Primal objective f_{phi,R}(x, w) = R*(x - u*) + f_phi(u*, w).

    As lam -> 0 with w = 1_k this approaches the sum of the k largest
    entries of phi(x).
    """
    x = as_vector(x)
    if spec.reg.lam < HARD_CUTOFF:
        out = _hard_output(x, spec)
        return float(out.w_sorted @ spec.phi.apply(out.s))
    out = relaxed_apply(x, spec, solver)
    return objective_at(x, spec, out)


def objective_at(x: np.ndarray, spec: OperatorSpec, out: RelaxedOutput) -> float:
    """Evaluate the primal objective at a precomputed solution."""
    return float(np.sum(spec.reg.rstar(x - out.u))
                 + out.w_sorted @ spec.phi.apply(out.solution.v))


def soft_topkmask(x, k: int, reg: Regularizer, solver: str = "pav") -> np.ndarray:
    """Relaxed top-k mask; entries in [0, 1], sums to k absent truncation."""
    return relaxed_apply(x, OperatorSpec.top_k(PhiKind.IDENTITY, reg, k), solver).y


def soft_topkmag(x, k: int, reg: Regularizer, solver: str = "pav") -> np.ndarray:
    """Relaxed top-k in magnitude; shrunk values, signs preserved."""
    return relaxed_apply(x, OperatorSpec.top_k(PhiKind.HALF_SQUARE, reg, k), solver).y


def soft_signed_topkmask(x, k: int, reg: Regularizer, solver: str = "pav") -> np.ndarray:
    """Relaxed signed top-k mask (ordered weighted lasso nonlinearity)."""
    return relaxed_apply(x, OperatorSpec.top_k(PhiKind.ABSOLUTE, reg, k), solver).y


def soft_sort(x, reg: Regularizer, solver: str = "pav") -> np.ndarray:
    """Relaxed descending sort: the LP over P(x) maximizing <rho, y>."""
    x = as_vector(x)
    rho = np.arange(x.size, 0, -1, dtype=float)
    spec = OperatorSpec.with_weights(PhiKind.IDENTITY, reg, x)
    return relaxed_apply(rho, spec, solver).y


def soft_rank(x, reg: Regularizer, solver: str = "pav") -> np.ndarray:
    """Relaxed rank in the 1-based convention: components lie in [1, n].

    The hard limit (lam -> 0) is rank(x) + 1; the LP is over P(rho) with
    rho = (n, ..., 1), so rank 1 marks the largest entry.
    """
    x = as_vector(x)
    rho = np.arange(x.size, 0, -1, dtype=float)
    spec = OperatorSpec.with_weights(PhiKind.IDENTITY, reg, rho)
    return relaxed_apply(-x, spec, solver).y
