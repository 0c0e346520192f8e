"""Separable isotonic optimization solvers.

The canonical problem is

    min_{v_1 >= ... >= v_n}  sum_i h_i(v_i),
    h_i(v) = r*(s_i - v) + w_i * phi(v),

with s and w sorted non-increasing.  Three interchangeable solvers are
provided: an exact pool-adjacent-violators (PAV) algorithm, a Dykstra
alternating-projection scheme (p = 2 only, data-parallel inner steps) and
block coordinate ascent on the dual (any p in (1, 2]).

phi = ABSOLUTE is handled through the identity machinery: the callers that
use it restrict v to the non-negative cone (by truncating downstream),
where |v| = v, so inside the solvers it behaves exactly like IDENTITY.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.optimize import brentq

from .exceptions import InvalidArgumentError, NumericError, UnsupportedConfigError
from .regularization import PhiKind, Regularizer

# Non-strict merge tolerance: adjacent blocks with equal values (up to this
# tolerance) are pooled, yielding canonical maximal blocks.
MERGE_TOL = 1e-12


@dataclass(frozen=True)
class IsotonicProblem:
    """A sorted separable isotonic instance.

    s and w must both be non-increasing; w must be non-negative whenever
    phi is not the identity.
    """

    s: np.ndarray
    w: np.ndarray
    phi: PhiKind
    reg: Regularizer

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        w = np.asarray(self.w, dtype=float)
        if s.ndim != 1 or s.size == 0:
            raise InvalidArgumentError("s must be a non-empty 1-d array")
        if s.shape != w.shape:
            raise InvalidArgumentError("s and w must have the same length")
        if not (np.all(np.isfinite(s)) and np.all(np.isfinite(w))):
            raise InvalidArgumentError("s and w must be finite")
        if np.any(np.diff(s) > 1e-12):
            raise InvalidArgumentError("s must be sorted non-increasing")
        if np.any(np.diff(w) > 1e-12):
            raise InvalidArgumentError("w must be sorted non-increasing")
        if self.phi.is_even and np.any(w < 0):
            raise InvalidArgumentError("w must be non-negative when phi is even")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return self.s.size

    def objective(self, v: np.ndarray) -> float:
        """sum_i r*(s_i - v_i) + w_i phi(v_i) at an arbitrary point."""
        v = np.asarray(v, dtype=float)
        return float(np.sum(self.reg.rstar(self.s - v)) + self.w @ self.phi.apply(v))


@dataclass(frozen=True)
class IsotonicSolution:
    """Optimal v with its contiguous block partition and block values."""

    v: np.ndarray
    block_starts: np.ndarray
    block_ends: np.ndarray
    gammas: np.ndarray
    converged: bool = True

    @property
    def blocks(self) -> list[tuple[int, int]]:
        """Block partition as [start, end) index pairs."""
        return list(zip(self.block_starts.tolist(), self.block_ends.tolist()))

    @property
    def num_blocks(self) -> int:
        return self.gammas.size


def _phi_is_half(phi: PhiKind) -> bool:
    # ABSOLUTE is routed through the identity machinery (see module doc).
    return phi is PhiKind.HALF_SQUARE


# ---------------------------------------------------------------------------
# Pooling subproblem
# ---------------------------------------------------------------------------

def _stationarity(gamma: float, s: np.ndarray, w_sum: float, half: bool,
                  reg: Regularizer) -> float:
    """Derivative of sum_{i in B} h_i(gamma); strictly increasing in gamma."""
    d = gamma - s
    q = reg.q
    t = reg.lam ** (1.0 - q) * float(np.sum(np.sign(d) * np.abs(d) ** (q - 1.0)))
    return t + (gamma * w_sum if half else w_sum)


def _bracket_and_solve(g, lo: float, hi: float) -> float:
    """Root of an increasing function g, expanding the bracket if needed."""
    width = max(hi - lo, 1.0)
    for _ in range(200):
        if g(lo) <= 0.0:
            break
        lo -= width
        width *= 2.0
    else:
        raise NumericError("could not bracket root from below", bracket=(lo, hi))
    width = max(hi - lo, 1.0)
    for _ in range(200):
        if g(hi) >= 0.0:
            break
        hi += width
        width *= 2.0
    else:
        raise NumericError("could not bracket root from above", bracket=(lo, hi))
    return float(brentq(g, lo, hi, xtol=1e-14, rtol=8.9e-16, maxiter=200))


def _pool_gamma(block_s: np.ndarray, w_sum: float, half: bool,
                reg: Regularizer) -> float:
    """Optimal constant value for one block."""
    n = block_s.size
    lam, q = reg.lam, reg.q
    if q == 2.0:
        if half:
            return float(np.sum(block_s)) / (lam * w_sum + n)
        return (float(np.sum(block_s)) - lam * w_sum) / n
    mn, mx = float(block_s.min()), float(block_s.max())
    margin = lam * (abs(w_sum) + 1.0) ** (1.0 / (q - 1.0)) + 1.0
    lo, hi = min(mn, 0.0) - margin, max(mx, 0.0) + margin
    g = lambda gamma: _stationarity(gamma, block_s, w_sum, half, reg)
    return _bracket_and_solve(g, lo, hi)


def pool_subproblem(block_s, block_w, phi: PhiKind, reg: Regularizer) -> float:
    """Solve argmin_gamma sum_{i in B} r*(s_i - gamma) + w_i phi(gamma).

    Closed forms are used for p = 2; for p = 4/3 the stationarity condition
    is a monotone cubic and for other p a monotone q-power equation, both
    solved by bracketed root-finding.
    """
    block_s = np.asarray(block_s, dtype=float)
    block_w = np.asarray(block_w, dtype=float)
    if block_s.size == 0:
        raise InvalidArgumentError("empty block")
    if block_s.shape != block_w.shape:
        raise InvalidArgumentError("block_s and block_w must have the same length")
    if phi.is_even and np.any(block_w < 0):
        raise InvalidArgumentError("block_w must be non-negative when phi is even")
    return _pool_gamma(block_s, float(np.sum(block_w)), _phi_is_half(phi), reg)


# ---------------------------------------------------------------------------
# PAV
# ---------------------------------------------------------------------------

@njit(cache=True)
def _kernel_gamma(cnt, mean, m2, m3, wsum, mn, mx, lam, q, half):  # pragma: no cover
    if q == 2.0:
        if half:
            return cnt * mean / (lam * wsum + cnt)
        return mean - lam * wsum / cnt
    # q == 4 (p = 4/3): the stationarity condition is a monotone cubic.  It
    # is evaluated in coordinates centered at the block mean (d = g - mean)
    # with centered moments m2 = sum (s_i - mean)^2, m3 = sum (s_i - mean)^3:
    #   cnt*d^3 + 3*m2*d - m3 + lam^3 * W                    (identity)
    #   cnt*d^3 + 3*m2*d - m3 + lam^3 * W * (d + mean)       (half square)
    # which avoids the catastrophic cancellation of raw power sums when the
    # block values are large compared to their spread.
    lam3 = lam * lam * lam
    if m2 == 0.0 and m3 == 0.0:
        # Spread-free block (singletons included): closed form.  Keeping the
        # w = 0 case bit-exact (gamma = s_i) is what makes the sparse outputs
        # exactly zero rather than denormal noise.
        if wsum == 0.0:
            return mean
        if not half:
            ratio = wsum / cnt
            return mean - lam * np.sign(ratio) * abs(ratio) ** (1.0 / 3.0)
    if half:
        lo = min(mn, 0.0) - 1.0 - mean
        hi = max(mx, 0.0) + 1.0 - mean
    else:
        margin = lam * (abs(wsum) + 1.0) ** (1.0 / 3.0) + 1.0
        lo = mn - margin - mean
        hi = mx + margin - mean
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = cnt * mid ** 3 + 3.0 * m2 * mid - m3
        if half:
            val += lam3 * wsum * (mid + mean)
        else:
            val += lam3 * wsum
        if val > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-15 * (1.0 + abs(mid) + abs(mean)):
            break
    return mean + 0.5 * (lo + hi)


@njit(cache=True)
def _pav_kernel(s, w, lam, q, half):  # pragma: no cover
    n = s.shape[0]
    starts = np.empty(n, np.int64)
    gammas = np.empty(n)
    agg_mean = np.empty(n)
    agg_m2 = np.empty(n)
    agg_m3 = np.empty(n)
    agg_w = np.empty(n)
    agg_mn = np.empty(n)
    agg_mx = np.empty(n)
    m = 0
    for i in range(n):
        si = s[i]
        c_mean = si
        c_m2 = 0.0
        c_m3 = 0.0
        c_w = w[i]
        c_mn = si
        c_mx = si
        c_start = i
        cnt = 1.0
        g = _kernel_gamma(cnt, c_mean, c_m2, c_m3, c_w, c_mn, c_mx, lam, q, half)
        while m > 0 and gammas[m - 1] <= g + MERGE_TOL:
            m -= 1
            # Chan's pairwise-merge update for centered second and third
            # moments; numerically stable regardless of the block offset.
            n_left = float(c_start - starts[m])
            n_right = cnt
            n_tot = n_left + n_right
            delta = c_mean - agg_mean[m]
            c_m3 = (agg_m3[m] + c_m3
                    + delta ** 3 * n_left * n_right * (n_left - n_right) / (n_tot * n_tot)
                    + 3.0 * delta * (n_left * c_m2 - n_right * agg_m2[m]) / n_tot)
            c_m2 = agg_m2[m] + c_m2 + delta * delta * n_left * n_right / n_tot
            c_mean = agg_mean[m] + delta * n_right / n_tot
            c_w += agg_w[m]
            if agg_mn[m] < c_mn:
                c_mn = agg_mn[m]
            if agg_mx[m] > c_mx:
                c_mx = agg_mx[m]
            c_start = starts[m]
            cnt = n_tot
            g = _kernel_gamma(cnt, c_mean, c_m2, c_m3, c_w, c_mn, c_mx, lam, q, half)
        starts[m] = c_start
        gammas[m] = g
        agg_mean[m] = c_mean
        agg_m2[m] = c_m2
        agg_m3[m] = c_m3
        agg_w[m] = c_w
        agg_mn[m] = c_mn
        agg_mx[m] = c_mx
        m += 1
    v = np.empty(n)
    ends = np.empty(m, np.int64)
    for r in range(m):
        end = starts[r + 1] if r + 1 < m else n
        ends[r] = end
        for j in range(starts[r], end):
            v[j] = gammas[r]
    return v, starts[:m].copy(), ends, gammas[:m].copy()


def _pav_python(s: np.ndarray, w: np.ndarray, half: bool, reg: Regularizer):
    # Generic-p fallback; re-solves the pooling subproblem on merged slices.
    n = s.size
    starts: list[int] = []
    gammas: list[float] = []
    wsums: list[float] = []
    for i in range(n):
        start = i
        wsum = float(w[i])
        g = _pool_gamma(s[i:i + 1], wsum, half, reg)
        while gammas and gammas[-1] <= g + MERGE_TOL:
            start = starts.pop()
            gammas.pop()
            wsum += wsums.pop()
            g = _pool_gamma(s[start:i + 1], wsum, half, reg)
        starts.append(start)
        gammas.append(g)
        wsums.append(wsum)
    starts_arr = np.asarray(starts, dtype=np.int64)
    ends_arr = np.append(starts_arr[1:], n)
    gammas_arr = np.asarray(gammas)
    v = np.repeat(gammas_arr, ends_arr - starts_arr)
    return v, starts_arr, ends_arr, gammas_arr


def pav_solve(prob: IsotonicProblem) -> IsotonicSolution:
    """Exact minimizer by pool adjacent violators.

    O(n) pooling steps; adjacent blocks are merged non-strictly (ties
    pooled), so the returned blocks are maximal.
    """
    half = _phi_is_half(prob.phi)
    q = prob.reg.q
    if q in (2.0, 4.0):
        v, starts, ends, gammas = _pav_kernel(prob.s, prob.w, prob.reg.lam, q, half)
    else:
        v, starts, ends, gammas = _pav_python(prob.s, prob.w, half, prob.reg)
    return IsotonicSolution(v=v, block_starts=starts, block_ends=ends, gammas=gammas)


# ---------------------------------------------------------------------------
# Dykstra
# ---------------------------------------------------------------------------

def _project_pairs(z: np.ndarray, c: np.ndarray, offset: int) -> np.ndarray:
    """Weighted projection onto {z_i >= z_{i+1}} for disjoint pairs.

    Pairs start at ``offset`` (0 for C1, 1 for C2).  Each violated pair is
    replaced by its c-weighted average; pairs are independent, so the pass
    is data-parallel.
    """
    out = z.copy()
    n = z.size
    a = z[offset:n - 1:2]
    b = z[offset + 1:n:2]
    ca = c[offset:n - 1:2]
    cb = c[offset + 1:n:2]
    viol = a < b
    avg = (ca * a + cb * b) / (ca + cb)
    out[offset:n - 1:2] = np.where(viol, avg, a)
    out[offset + 1:n:2] = np.where(viol, avg, b)
    return out


def dykstra_solve(prob: IsotonicProblem, iterations: int) -> np.ndarray:
    """Dykstra's alternating projections between the odd and even pair sets.

    Requires p = 2.  The linear term <v, w> (identity) or the quadratic
    weight (half square) is folded into an equivalent weighted Euclidean
    projection onto the monotone cone:

      identity:     project s - lam*w with unit weights,
      half square:  project s_i/(lam*w_i + 1) with weights (lam*w_i + 1)/lam.

    ``iterations = 0`` returns the initialization (the shifted target).
    """
    if prob.reg.q != 2.0:
        raise UnsupportedConfigError(
            "dykstra_solve requires p = 2; use dual_bca_solve for other p")
    if iterations < 0:
        raise InvalidArgumentError("iterations must be >= 0")
    lam = prob.reg.lam
    if _phi_is_half(prob.phi):
        a = prob.s / (lam * prob.w + 1.0)
        c = (lam * prob.w + 1.0) / lam
    else:
        a = prob.s - lam * prob.w
        c = np.ones_like(a)
    v = a.copy()
    if prob.n == 1:
        return v
    p_corr = np.zeros_like(v)
    q_corr = np.zeros_like(v)
    for _ in range(int(iterations)):
        y = _project_pairs(v + p_corr, c, offset=0)
        p_corr = v + p_corr - y
        v = _project_pairs(y + q_corr, c, offset=1)
        q_corr = y + q_corr - v
    return v


def group_blocks(v: np.ndarray, tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Recover a contiguous block partition from an (approximately) piecewise
    constant non-increasing vector."""
    n = v.size
    breaks = np.flatnonzero(np.abs(np.diff(v)) >= tol) + 1
    starts = np.concatenate(([0], breaks)).astype(np.int64)
    ends = np.concatenate((breaks, [n])).astype(np.int64)
    gammas = np.add.reduceat(v, starts) / (ends - starts)
    return starts, ends, gammas


# ---------------------------------------------------------------------------
# Dual block coordinate ascent
# ---------------------------------------------------------------------------

def _psi(d: np.ndarray, a: float) -> np.ndarray:
    return np.sign(d) * np.abs(d) ** a


def _hstar_prime(t: np.ndarray, s: np.ndarray, w: np.ndarray, half: bool,
                 reg: Regularizer) -> np.ndarray:
    """(h_i*)'(t) = argmax_v t*v - h_i(v), vectorized over coordinates."""
    lam, q = reg.lam, reg.q
    if not half:
        return s + lam * _psi(t - w, 1.0 / (q - 1.0))
    if q == 2.0:
        return (lam * t + s) / (1.0 + lam * w)
    # Generic half-square: solve lam^(1-q) psi_{q-1}(v - s) + w*v = t by
    # elementwise bisection (the left side is strictly increasing in v).
    def f(v):
        return lam ** (1.0 - q) * _psi(v - s, q - 1.0) + w * v - t

    width = np.ones_like(s)
    lo = s - width
    hi = s + width
    for _ in range(100):
        grow_lo = f(lo) > 0.0
        grow_hi = f(hi) < 0.0
        if not (np.any(grow_lo) or np.any(grow_hi)):
            break
        width *= 2.0
        lo = np.where(grow_lo, lo - width, lo)
        hi = np.where(grow_hi, hi + width, hi)
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        pos = f(mid) > 0.0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
        if np.all(hi - lo <= 1e-15 * (1.0 + np.abs(mid))):
            break
    return 0.5 * (lo + hi)


def _primal_from_alpha(alpha: np.ndarray, s: np.ndarray, w: np.ndarray,
                       half: bool, reg: Regularizer) -> np.ndarray:
    apad = np.concatenate(([0.0], alpha, [0.0]))
    return _hstar_prime(np.diff(apad), s, w, half, reg)


def _bca_update(idx: np.ndarray, alpha: np.ndarray, s: np.ndarray,
                w: np.ndarray, half: bool, reg: Regularizer) -> np.ndarray:
    """Exact maximization over the dual coordinates in ``idx`` (disjoint)."""
    lam, q = reg.lam, reg.q
    n = s.size
    a_prev = np.where(idx > 0, alpha[np.maximum(idx - 1, 0)], 0.0)
    a_next = np.where(idx < n - 2, alpha[np.minimum(idx + 1, n - 2)], 0.0)
    sj, sj1 = s[idx], s[idx + 1]
    wj, wj1 = w[idx], w[idx + 1]
    if q == 2.0 and not half:
        root = (sj1 - sj) / (2.0 * lam) + 0.5 * (a_next + a_prev + wj - wj1)
        return np.maximum(root, 0.0)
    if q == 2.0 and half:
        ca, cb = 1.0 + lam * wj, 1.0 + lam * wj1
        root = (ca * a_next + cb * a_prev + (ca * sj1 - cb * sj) / lam) / (ca + cb)
        return np.maximum(root, 0.0)

    # Generic p: G(a) = v_j(a - a_prev) - v_{j+1}(a_next - a) is strictly
    # increasing in a; bisect on [0, hi] only where G(0) < 0.
    def G(a):
        return (_hstar_prime(a - a_prev, sj, wj, half, reg)
                - _hstar_prime(a_next - a, sj1, wj1, half, reg))

    out = np.zeros(idx.size)
    active = G(out) < 0.0
    if not np.any(active):
        return out
    lo = np.zeros(idx.size)
    hi = np.ones(idx.size)
    for _ in range(100):
        grow = active & (G(hi) < 0.0)
        if not np.any(grow):
            break
        hi = np.where(grow, hi * 2.0, hi)
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        pos = G(mid) > 0.0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
        if np.all(hi - lo <= 1e-15 * (1.0 + np.abs(mid))):
            break
    root = 0.5 * (lo + hi)
    return np.where(active, np.maximum(root, 0.0), 0.0)


def dual_bca_solve(prob: IsotonicProblem, tol: float = 1e-10,
                   max_sweeps: int = 1000) -> IsotonicSolution:
    """Block coordinate ascent on the dual of the isotonic problem.

    Maintains non-negative dual variables alpha (one per adjacent
    constraint) and alternates exact updates of the even- and odd-indexed
    coordinates; the primal is recovered as v_i = (h_i*)'(alpha_i -
    alpha_{i-1}).  Stops when the primal change drops below ``tol``;
    otherwise returns the last iterate flagged as unconverged.
    """
    if tol <= 0:
        raise InvalidArgumentError("tol must be positive")
    if max_sweeps < 1:
        raise InvalidArgumentError("max_sweeps must be >= 1")
    half = _phi_is_half(prob.phi)
    s, w, reg = prob.s, prob.w, prob.reg
    n = prob.n
    if n == 1:
        v = _hstar_prime(np.zeros(1), s, w, half, reg)
        return IsotonicSolution(v=v, block_starts=np.array([0], dtype=np.int64),
                                block_ends=np.array([1], dtype=np.int64),
                                gammas=v.copy())
    alpha = np.zeros(n - 1)
    even = np.arange(0, n - 1, 2)
    odd = np.arange(1, n - 1, 2)
    v = _primal_from_alpha(alpha, s, w, half, reg)
    converged = False
    for _ in range(int(max_sweeps)):
        v_old = v
        alpha[even] = _bca_update(even, alpha, s, w, half, reg)
        if odd.size:
            alpha[odd] = _bca_update(odd, alpha, s, w, half, reg)
        v = _primal_from_alpha(alpha, s, w, half, reg)
        if float(np.max(np.abs(v - v_old))) < tol:
            converged = True
            break
    starts, ends, gammas = group_blocks(v, tol)
    return IsotonicSolution(v=v, block_starts=starts, block_ends=ends,
                            gammas=gammas, converged=converged)
