"""Gauss-Legendre quadrature and grids on the semi-infinite rays (xi, inf).

Each ray is truncated at X_max = max(sqrt(4n+2), xi) + 8: the classical
turning point of every oscillator function that enters the kernel plus a
Gaussian-decay margin, so the neglected tail is far below working accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["QuadratureGrid", "gauss_legendre", "ray_grid"]


@dataclass
class QuadratureGrid:
    """Nodes/weights of a Gauss-Legendre rule mapped onto (xi, x_max)."""

    xi: float
    x_max: float
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)

    @property
    def m(self) -> int:
        return self.nodes.size


def gauss_legendre(m: int) -> tuple[np.ndarray, np.ndarray]:
    """m-point Gauss-Legendre nodes and weights on [-1, 1]."""
    if not 1 <= m <= 512:
        raise ValueError(f"m must be in [1, 512], got {m}")
    return np.polynomial.legendre.leggauss(m)


def ray_grid(xi: float, n: int, m: int) -> QuadratureGrid:
    """Affine Gauss-Legendre grid on [xi, X_max] for matrix size n."""
    if m < 8:
        raise ValueError(f"m must be >= 8, got {m}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not np.isfinite(xi):
        raise ValueError(f"xi must be finite, got {xi}")
    x_max = max(math.sqrt(4.0 * n + 2.0), xi) + 8.0
    t, w = gauss_legendre(m)
    half = 0.5 * (x_max - xi)
    nodes = xi + half * (t + 1.0)
    weights = half * w
    return QuadratureGrid(xi=xi, x_max=x_max, nodes=nodes, weights=weights)
