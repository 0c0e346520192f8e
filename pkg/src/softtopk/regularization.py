"""Elementwise nonlinearities and p-norm regularization.

The regularizer is R(y) = (lam / p) * ||y||_p^p with 1 < p <= 2.  Its
conjugate is separable, R*(t) = sum_i r*(t_i) with

    r*(t) = lam^(1-q) * |t|^q / q,    1/p + 1/q = 1,

so q >= 2.  For p = 2 this is the familiar r*(t) = t^2 / (2 lam).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgumentError


class PhiKind(enum.Enum):
    """Scalar nonlinearity applied elementwise before the linear program."""

    IDENTITY = "identity"
    HALF_SQUARE = "half_square"
    ABSOLUTE = "absolute"

    @property
    def is_even(self) -> bool:
        """True for sign-invariant nonlinearities (half_square, absolute)."""
        return self is not PhiKind.IDENTITY

    def apply(self, x: np.ndarray) -> np.ndarray:
        if self is PhiKind.IDENTITY:
            return np.asarray(x, dtype=float)
        if self is PhiKind.HALF_SQUARE:
            return 0.5 * np.square(x)
        return np.abs(x)

    def grad(self, x: np.ndarray) -> np.ndarray:
        if self is PhiKind.IDENTITY:
            return np.ones_like(np.asarray(x, dtype=float))
        if self is PhiKind.HALF_SQUARE:
            return np.asarray(x, dtype=float)
        return np.sign(x)


def _snap(value: float, tol: float = 1e-9) -> float:
    # p = 4/3 in floating point gives q = 4 + O(1e-15); snap so that the
    # closed-form subproblem dispatch sees exact integers.
    rounded = round(value)
    return float(rounded) if abs(value - rounded) < tol else value


@dataclass(frozen=True)
class Regularizer:
    """Strength and exponent of the p-norm regularization term.

    Parameters
    ----------
    p : float
        Exponent in (1, 2].  p = 2 gives an a.e.-differentiable operator,
        p in (1, 2) a differentiable-everywhere one.
    lam : float
        Positive regularization strength.
    """

    p: float
    lam: float

    def __post_init__(self):
        if not np.isfinite(self.p) or not (1.0 < self.p <= 2.0):
            raise InvalidArgumentError(f"p must be in (1, 2], got {self.p}")
        if not np.isfinite(self.lam) or self.lam <= 0.0:
            raise InvalidArgumentError(f"lam must be positive, got {self.lam}")

    @property
    def q(self) -> float:
        """Conjugate exponent, 1/p + 1/q = 1 (snapped to integers)."""
        return _snap(self.p / (self.p - 1.0))

    def rstar(self, t: np.ndarray) -> np.ndarray:
        """Conjugate kernel r*(t) = lam^(1-q) |t|^q / q, elementwise."""
        q = self.q
        return self.lam ** (1.0 - q) * np.abs(t) ** q / q

    def rstar_grad(self, t: np.ndarray) -> np.ndarray:
        """(r*)'(t) = lam^(1-q) sign(t) |t|^(q-1), elementwise."""
        q = self.q
        t = np.asarray(t, dtype=float)
        return self.lam ** (1.0 - q) * np.sign(t) * np.abs(t) ** (q - 1.0)

    def rstar_hess(self, t: np.ndarray) -> np.ndarray:
        """(r*)''(t) = lam^(1-q) (q-1) |t|^(q-2), elementwise.

        For q = 2 the exponent is 0 and the result is the constant 1/lam.
        """
        q = self.q
        t = np.asarray(t, dtype=float)
        if q == 2.0:
            return np.full_like(t, 1.0 / self.lam)
        return self.lam ** (1.0 - q) * (q - 1.0) * np.abs(t) ** (q - 2.0)
