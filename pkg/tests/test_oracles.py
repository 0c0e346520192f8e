"""The brute-force references themselves."""

import numpy as np
import pytest

import softtopk as st
from softtopk.oracles import brute_isotonic, brute_lmo, fd_jacobian, topk_phi_sum
from softtopk.regularization import PhiKind

from conftest import random_isotonic_problem


def test_brute_lmo_examples():
    value, argmax = brute_lmo([1.0, -3.0, 2.0], [1.0, 1.0, 0.0])
    assert value == pytest.approx(3.0)
    np.testing.assert_array_equal(argmax, [1.0, 0.0, 1.0])

    value, argmax = brute_lmo([4.0], [2.5])
    assert value == pytest.approx(10.0)
    np.testing.assert_array_equal(argmax, [2.5])


def test_brute_lmo_constant_w(rng):
    x = rng.standard_normal(4)
    value, _ = brute_lmo(x, np.full(4, 2.0))
    assert value == pytest.approx(2.0 * x.sum())


def test_brute_lmo_refuses_large_n():
    with pytest.raises(st.InvalidArgumentError):
        brute_lmo(np.zeros(9), np.zeros(9))


def test_brute_isotonic_single_coordinate():
    prob = st.IsotonicProblem(s=np.array([2.0]), w=np.array([1.0]),
                              phi=PhiKind.IDENTITY, reg=st.Regularizer(2.0, 0.5))
    sol = brute_isotonic(prob)
    assert sol.v[0] == pytest.approx(1.5, abs=1e-7)  # s - lam*w


def test_brute_isotonic_beats_random_feasible_points(rng):
    for _ in range(5):
        prob = random_isotonic_problem(rng, PhiKind.IDENTITY, 4.0 / 3.0, n_max=6)
        sol = brute_isotonic(prob)
        best = prob.objective(sol.v)
        for _ in range(200):
            v = np.sort(rng.standard_normal(prob.n) * 2)[::-1].copy()
            assert best <= prob.objective(v) + 1e-9


def test_brute_isotonic_nonneg(rng):
    prob = st.IsotonicProblem(s=np.array([0.2, -1.0]), w=np.array([1.0, 0.5]),
                              phi=PhiKind.ABSOLUTE, reg=st.Regularizer(2.0, 1.0))
    sol = brute_isotonic(prob, nonneg=True)
    assert np.all(sol.v >= -1e-12)


def test_brute_isotonic_refuses_large_n():
    prob = st.IsotonicProblem(s=np.zeros(13), w=np.zeros(13),
                              phi=PhiKind.IDENTITY, reg=st.Regularizer(2.0, 1.0))
    with pytest.raises(st.InvalidArgumentError):
        brute_isotonic(prob)


def test_fd_jacobian_of_identity(rng):
    x = rng.standard_normal(4)
    np.testing.assert_allclose(fd_jacobian(lambda z: z, x), np.eye(4),
                               atol=1e-10)


def test_fd_jacobian_of_hard_mask_is_zero(rng):
    x = np.array([3.0, 1.0, -2.0])
    np.testing.assert_array_equal(fd_jacobian(lambda z: st.topkmask(z, 2), x),
                                  np.zeros((3, 3)))


def test_fd_jacobian_validation():
    with pytest.raises(st.InvalidArgumentError):
        fd_jacobian(lambda z: z, np.ones(2), h=0.0)


def test_topk_phi_sum_examples():
    assert topk_phi_sum([1.0, -3.0, 2.0], 2, PhiKind.HALF_SQUARE) == \
        pytest.approx(6.5)
    assert topk_phi_sum([1.0, -3.0, 2.0], 3, PhiKind.IDENTITY) == \
        pytest.approx(0.0)
    assert topk_phi_sum([-1.0, -5.0], 1, PhiKind.ABSOLUTE) == pytest.approx(5.0)
    with pytest.raises(st.InvalidArgumentError):
        topk_phi_sum([1.0], 2, PhiKind.IDENTITY)
