"""Nonlinearities and the conjugate regularization kernel."""

import numpy as np
import pytest

import softtopk as st
from softtopk.regularization import PhiKind


def test_phi_apply_and_grad():
    x = np.array([-2.0, 0.0, 3.0])
    np.testing.assert_array_equal(PhiKind.IDENTITY.apply(x), x)
    np.testing.assert_array_equal(PhiKind.HALF_SQUARE.apply(x), [2.0, 0.0, 4.5])
    np.testing.assert_array_equal(PhiKind.ABSOLUTE.apply(x), [2.0, 0.0, 3.0])
    np.testing.assert_array_equal(PhiKind.IDENTITY.grad(x), [1.0, 1.0, 1.0])
    np.testing.assert_array_equal(PhiKind.HALF_SQUARE.grad(x), x)
    np.testing.assert_array_equal(PhiKind.ABSOLUTE.grad(x), [-1.0, 0.0, 1.0])


def test_phi_evenness():
    assert not PhiKind.IDENTITY.is_even
    assert PhiKind.HALF_SQUARE.is_even
    assert PhiKind.ABSOLUTE.is_even


def test_regularizer_validation():
    for bad_p in (1.0, 0.5, 2.5, np.nan):
        with pytest.raises(st.InvalidArgumentError):
            st.Regularizer(p=bad_p, lam=1.0)
    for bad_lam in (0.0, -1.0, np.nan):
        with pytest.raises(st.InvalidArgumentError):
            st.Regularizer(p=2.0, lam=bad_lam)


def test_conjugate_exponent_is_snapped():
    assert st.Regularizer(p=4.0 / 3.0, lam=1.0).q == 4.0
    assert st.Regularizer(p=2.0, lam=1.0).q == 2.0
    assert st.Regularizer(p=1.5, lam=1.0).q == 3.0


def test_rstar_p2_closed_form():
    reg = st.Regularizer(p=2.0, lam=0.5)
    t = np.array([-1.0, 0.0, 2.0])
    np.testing.assert_allclose(reg.rstar(t), t ** 2 / (2 * 0.5))
    np.testing.assert_allclose(reg.rstar_grad(t), t / 0.5)
    np.testing.assert_allclose(reg.rstar_hess(t), np.full(3, 2.0))


@pytest.mark.parametrize("p", [2.0, 4.0 / 3.0, 1.5])
def test_rstar_derivatives_match_finite_differences(p, rng):
    reg = st.Regularizer(p=p, lam=0.7)
    t = rng.uniform(0.2, 2.0, size=8) * rng.choice([-1.0, 1.0], size=8)
    h = 1e-6
    fd_grad = (reg.rstar(t + h) - reg.rstar(t - h)) / (2 * h)
    fd_hess = (reg.rstar_grad(t + h) - reg.rstar_grad(t - h)) / (2 * h)
    np.testing.assert_allclose(reg.rstar_grad(t), fd_grad, rtol=1e-6)
    np.testing.assert_allclose(reg.rstar_hess(t), fd_hess, rtol=1e-5)


def test_rstar_grad_inverts_regularizer_gradient(rng):
    # grad R and grad R* are inverse maps: (r*)'(lam * sign(y)|y|^(p-1)) = y.
    for p in (2.0, 4.0 / 3.0):
        reg = st.Regularizer(p=p, lam=1.3)
        y = rng.uniform(0.1, 3.0, size=6) * rng.choice([-1.0, 1.0], size=6)
        t = reg.lam * np.sign(y) * np.abs(y) ** (p - 1.0)
        np.testing.assert_allclose(reg.rstar_grad(t), y, rtol=1e-12)
