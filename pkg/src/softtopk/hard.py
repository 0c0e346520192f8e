"""Exact (non-relaxed) sorting-family operators and the permutahedron LMO.

Indices are 0-based throughout: rank 0 means the largest entry.  Ties are
always broken by ascending original index (stable sort), which makes every
operator deterministic.
"""

from __future__ import annotations

import numpy as np

from .exceptions import InvalidArgumentError


def as_vector(x, name: str = "x") -> np.ndarray:
    """Validate and convert to a 1-d float array with finite entries."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise InvalidArgumentError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidArgumentError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} must contain only finite values")
    return arr


def argsort(x) -> np.ndarray:
    """Permutation sorting x in descending order, stable on ties."""
    x = as_vector(x)
    return np.argsort(-x, kind="stable")


def sort_desc(x) -> np.ndarray:
    """Values of x in descending order."""
    x = as_vector(x)
    return x[argsort(x)]


def rank(x) -> np.ndarray:
    """Inverse of argsort(x): rank 0 is assigned to the largest entry."""
    sigma = argsort(x)
    inv = np.empty_like(sigma)
    inv[sigma] = np.arange(sigma.size)
    return inv


def invert_permutation(sigma: np.ndarray) -> np.ndarray:
    inv = np.empty_like(sigma)
    inv[sigma] = np.arange(sigma.size)
    return inv


def _check_k(k: int, n: int) -> int:
    k = int(k)
    if not 1 <= k <= n:
        raise InvalidArgumentError(f"k must satisfy 1 <= k <= {n}, got {k}")
    return k


def topkmask(x, k: int) -> np.ndarray:
    """Binary vector with ones at the k largest entries of x."""
    x = as_vector(x)
    k = _check_k(k, x.size)
    mask = np.zeros_like(x)
    mask[argsort(x)[:k]] = 1.0
    return mask


def topk(x, k: int) -> np.ndarray:
    """Keep the k largest values of x, zeros elsewhere."""
    x = as_vector(x)
    return x * topkmask(x, k)


def topkmag(x, k: int) -> np.ndarray:
    """Keep the k entries of largest magnitude (signs preserved)."""
    x = as_vector(x)
    return x * topkmask(np.abs(x), k)


def lmo(x, w) -> tuple[float, np.ndarray]:
    """Linear maximization oracle over the permutahedron P(w).

    Returns (value, argmax) where value = max_{y in P(w)} <x, y> and
    argmax attains it.  w is sorted descending internally, and the
    maximizer is the sorted w permuted by rank(x); the whole computation
    is a sort.
    """
    x = as_vector(x)
    w = as_vector(w, "w")
    if x.size != w.size:
        raise InvalidArgumentError(f"length mismatch: |x|={x.size}, |w|={w.size}")
    w_sorted = sort_desc(w)
    value = float(w_sorted @ sort_desc(x))
    argmax = w_sorted[rank(x)]
    return value, argmax
