"""Fenchel-Young top-k loss."""

import numpy as np
import pytest

import softtopk as st

CFG = st.LossConfig(k=2, reg=st.Regularizer(2.0, 1.0))


def test_gradient_is_mask_minus_target(rng):
    x = rng.standard_normal(6)
    t = np.zeros(6)
    t[2] = 1.0
    _, grad = st.fy_topk_loss(x, t, CFG)
    mask = st.soft_topkmask(x, 2, CFG.reg)
    np.testing.assert_allclose(grad, mask - t, atol=1e-12)


def test_gradient_matches_finite_differences(rng):
    x = rng.standard_normal(7) * 2
    t = np.zeros(7)
    t[0] = 1.0
    _, grad = st.fy_topk_loss(x, t, CFG)
    h = 1e-5
    for i in range(7):
        e = np.zeros(7)
        e[i] = h
        fd = (st.fy_topk_loss(x + e, t, CFG)[0]
              - st.fy_topk_loss(x - e, t, CFG)[0]) / (2 * h)
        assert fd == pytest.approx(grad[i], abs=1e-7)


def test_saturated_logits_have_vanishing_gradient():
    cfg = st.LossConfig(k=1, reg=st.Regularizer(2.0, 1.0))
    t = np.array([1.0, 0.0, 0.0])
    for big in (10.0, 100.0):
        _, grad = st.fy_topk_loss(np.array([big, 0.0, 0.0]), t, cfg)
        assert np.max(np.abs(grad)) <= 2.0 / big


def test_all_equal_logits():
    t = np.array([0.0, 1.0, 0.0, 0.0])
    _, grad = st.fy_topk_loss(np.zeros(4), t, CFG)
    np.testing.assert_allclose(grad, np.full(4, 0.5) - t, atol=1e-12)


def test_midpoint_convexity(rng):
    t = np.zeros(5)
    t[1] = 1.0
    for _ in range(50):
        x1, x2 = rng.standard_normal(5) * 2, rng.standard_normal(5) * 2
        mid = st.fy_topk_loss(0.5 * (x1 + x2), t, CFG)[0]
        avg = 0.5 * (st.fy_topk_loss(x1, t, CFG)[0]
                     + st.fy_topk_loss(x2, t, CFG)[0])
        assert mid <= avg + 1e-9


def test_translation_identity(rng):
    # shifting all logits by c changes the loss by c * (k - sum(t))
    x = rng.standard_normal(6)
    t = np.zeros(6)
    t[4] = 1.0
    base = st.fy_topk_loss(x, t, CFG)[0]
    for c in (-1.3, 0.7):
        shifted = st.fy_topk_loss(x + c, t, CFG)[0]
        assert shifted - base == pytest.approx(c * (2 - t.sum()), abs=1e-9)


def test_validation():
    with pytest.raises(st.InvalidArgumentError):
        st.LossConfig(k=0, reg=st.Regularizer(2.0, 1.0))
    with pytest.raises(st.InvalidArgumentError):
        st.fy_topk_loss([1.0, 2.0], [1.0], CFG)
