"""Shared test helpers."""

import numpy as np
import pytest

import softtopk as st


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def gapped_vector(rng, n, min_gap=1e-2, magnitude=False, scale=2.0):
    """Random vector with well-separated (magnitude-)sorted values."""
    for _ in range(1000):
        x = rng.standard_normal(n) * scale
        vals = np.abs(x) if magnitude else x
        if np.min(np.abs(np.diff(np.sort(vals)))) >= min_gap:
            return x
    raise RuntimeError("sampling failed")


def random_isotonic_problem(rng, phi, p, n_max=10, offset_scale=1.0):
    """Random sorted instance valid for the given nonlinearity."""
    n = int(rng.integers(1, n_max + 1))
    s = np.sort(rng.standard_normal(n))[::-1].copy()
    s += float(rng.standard_normal()) * offset_scale
    w = rng.standard_normal(n)
    if phi.is_even:
        w = np.abs(w)
    w = np.sort(w)[::-1].copy()
    lam = float(rng.uniform(0.1, 2.0))
    return st.IsotonicProblem(s=s, w=w, phi=phi, reg=st.Regularizer(p, lam))
