"""Independent brute-force references for tests and gradient checks.

Nothing here shares code paths with the solvers it validates: the LMO is
checked by exhaustive enumeration over permutations, the isotonic solvers
by enumerating every contiguous block partition with golden-section scalar
minimization, and the Jacobian products by central finite differences.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from .exceptions import InvalidArgumentError
from .hard import as_vector, sort_desc
from .isotonic import IsotonicProblem, IsotonicSolution
from .regularization import PhiKind

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@lru_cache(maxsize=None)
def _perm_matrix(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=np.int64)


def brute_lmo(x, w) -> tuple[float, np.ndarray]:
    """Exhaustive max of <x, w_pi> over all n! permutations (n <= 8).

    Candidates are visited in lexicographic order of the permutation and
    the first maximizer is kept, which reproduces the stable tie-breaking
    of the fast path.
    """
    x = as_vector(x)
    w = as_vector(w, "w")
    if x.size != w.size:
        raise InvalidArgumentError("length mismatch")
    if x.size > 8:
        raise InvalidArgumentError("brute_lmo refuses n > 8 (factorial blowup)")
    candidates = sort_desc(w)[_perm_matrix(x.size)]
    values = candidates @ x
    best = int(np.argmax(values))
    return float(values[best]), candidates[best]


def _golden_min(f, lo: float, hi: float, tol: float = 1e-12) -> tuple[float, float]:
    """Golden-section minimum of a unimodal scalar function on [lo, hi]."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    xm = 0.5 * (a + b)
    return xm, f(xm)


def brute_isotonic(prob: IsotonicProblem, nonneg: bool = False) -> IsotonicSolution:
    """Optimal solution by enumerating all 2^(n-1) contiguous partitions.

    Each candidate block value is found by golden-section minimization of
    the pooled scalar objective; a partition is feasible when its block
    values are non-increasing.  Guaranteed optimal for separable convex
    objectives.  ``nonneg`` restricts block values to the non-negative ray
    (the non-negative monotone cone).
    """
    n = prob.n
    if n > 12:
        raise InvalidArgumentError("brute_isotonic refuses n > 12")
    s, w, phi, reg = prob.s, prob.w, prob.phi, prob.reg

    wsum_total = float(np.abs(w).sum())
    margin = reg.lam * (wsum_total + 1.0) ** (1.0 / (reg.q - 1.0)) + 1.0
    lo_all = min(float(s.min()), 0.0) - margin
    hi_all = max(float(s.max()), 0.0) + margin
    if nonneg:
        lo_all = max(lo_all, 0.0)

    def block_objective(i, j):
        sb, wb = s[i:j], w[i:j]

        def f(gamma):
            return float(np.sum(reg.rstar(sb - gamma)) + phi.apply(gamma) * np.sum(wb))

        return f

    gamma_tab = np.empty((n, n + 1))
    obj_tab = np.empty((n, n + 1))
    for i in range(n):
        for j in range(i + 1, n + 1):
            g, o = _golden_min(block_objective(i, j), lo_all, hi_all)
            gamma_tab[i, j] = g
            obj_tab[i, j] = o

    best_obj = np.inf
    best_cuts = None
    for mask in range(1 << (n - 1)):
        cuts = [0] + [i + 1 for i in range(n - 1) if mask >> i & 1] + [n]
        total = 0.0
        feasible = True
        prev = np.inf
        for a, b in zip(cuts[:-1], cuts[1:]):
            g = gamma_tab[a, b]
            if g > prev + 1e-9:
                feasible = False
                break
            prev = g
            total += obj_tab[a, b]
        if feasible and total < best_obj:
            best_obj = total
            best_cuts = cuts
    starts = np.asarray(best_cuts[:-1], dtype=np.int64)
    ends = np.asarray(best_cuts[1:], dtype=np.int64)
    gammas = np.array([gamma_tab[a, b] for a, b in zip(starts, ends)])
    v = np.repeat(gammas, ends - starts)
    return IsotonicSolution(v=v, block_starts=starts, block_ends=ends, gammas=gammas)


def fd_jacobian(fn, x, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of a vector-valued function, column by column."""
    if h <= 0:
        raise InvalidArgumentError("h must be positive")
    x = as_vector(x)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((np.asarray(fn(x + e)) - np.asarray(fn(x - e))) / (2.0 * h))
    return np.stack(cols, axis=1)


def topk_phi_sum(x, k: int, phi: PhiKind) -> float:
    """Sum of the k largest entries of phi(x); the lam -> 0 value oracle."""
    x = as_vector(x)
    if not 1 <= int(k) <= x.size:
        raise InvalidArgumentError(f"k out of range: {k}")
    vals = np.sort(phi.apply(x))[::-1]
    return float(np.sum(vals[:int(k)]))
