"""Least-squares link-delay estimation from per-epoch basis-path delays.

Each epoch plays every basis path once, so after m epochs the design
matrix D stacks m copies of B^T and D^T D = m B B^T.  Only the running sum
of each basis path's delays is needed to form D^T r = B s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .spanner import Basis


@dataclass(frozen=True)
class ConfidenceParams:
    S: float
    R: float
    dim: int
    delta: float

    def __post_init__(self):
        if self.S <= 0 or self.R < 0 or self.dim < 1:
            raise ValueError("S must be positive, R non-negative, dim >= 1")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")


def radius_identifiable(m: int, params: ConfidenceParams) -> float:
    """Deviation bound after m epochs when the basis spans R^d."""
    if m < 1:
        raise ValueError("m must be >= 1")
    d = params.dim
    return params.S * params.R * math.sqrt(
        (2 * math.log(2) * d ** 2 + 4 * d * math.log(1 / params.delta)) / m)


def radius_general(m: int, params: ConfidenceParams) -> float:
    """Deviation bound after m epochs for a rank-deficient path set (dim = d0)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    d0 = params.dim
    return params.S * params.R * math.sqrt(
        (32 * math.log(6) * d0 ** 2 + 32 * d0 * math.log(1 / params.delta)) / m)


class DesignState:
    """Accumulated exploration data and the current estimate of link delays.

    Args:
        basis: exploration basis; epoch i plays ``basis.paths`` in order.
        general: use the pseudo-inverse estimator.  Defaults to ``d0 < d``.
    """

    def __init__(self, basis: Basis, general: bool | None = None):
        self.basis = basis
        self.general = basis.d0 < basis.d if general is None else general
        b = basis.matrix
        self._b = b
        self._bbt = b @ b.T
        self.m = 0
        self.V = np.zeros((basis.d, basis.d))
        self.responses_sum = np.zeros(basis.d0)
        self.mu_hat = np.zeros(basis.d)

    def record_epoch(self, losses) -> np.ndarray:
        """Add one epoch of basis-path delays (in basis order) and re-estimate."""
        losses = np.asarray(losses, dtype=float)
        if losses.shape != (self.basis.d0,):
            raise ValueError(f"expected {self.basis.d0} losses, got shape {losses.shape}")
        self.m += 1
        self.V += self._bbt
        self.responses_sum += losses
        self.mu_hat = ols_general(self) if self.general else ols_identifiable(self)
        return self.mu_hat

    @property
    def design_response(self) -> np.ndarray:
        """D^T r, i.e. sum over all plays of path * observed delay."""
        return self._b @ self.responses_sum


def ols_identifiable(state: DesignState) -> np.ndarray:
    if state.m < 1:
        raise ValueError("no epochs recorded")
    return linalg.solve(state.V, state.design_response)


def ols_general(state: DesignState) -> np.ndarray:
    if state.m < 1:
        raise ValueError("no epochs recorded")
    return linalg.pinv(state.V) @ state.design_response
