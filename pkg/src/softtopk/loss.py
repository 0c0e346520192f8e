"""Fenchel-Young top-k loss.

l(x, t) = f_{phi,R}(x, 1_k) - <x, t> with phi fixed to the identity (the
regularized max is over top-k masks).  The loss is convex in x and its
gradient is the relaxed top-k mask minus the target.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgumentError
from .hard import as_vector
from .regularization import PhiKind, Regularizer
from .relaxed import OperatorSpec, objective_at, relaxed_apply


@dataclass(frozen=True)
class LossConfig:
    k: int
    reg: Regularizer

    def __post_init__(self):
        if int(self.k) < 1:
            raise InvalidArgumentError(f"k must be positive, got {self.k}")


def fy_topk_loss(logits, target, cfg: LossConfig) -> tuple[float, np.ndarray]:
    """Loss value and gradient for one example.

    ``target`` is typically one-hot but any vector of matching length is
    accepted; no normalization is applied.  Batch reduction is up to the
    caller.
    """
    logits = as_vector(logits, "logits")
    target = as_vector(target, "target")
    if logits.size != target.size:
        raise InvalidArgumentError("logits and target must have the same length")
    spec = OperatorSpec.top_k(PhiKind.IDENTITY, cfg.reg, cfg.k)
    out = relaxed_apply(logits, spec)
    value = objective_at(logits, spec, out) - float(logits @ target)
    gradient = out.y - target
    return value, gradient
