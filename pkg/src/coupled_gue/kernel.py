"""Pointwise evaluation of the 2x2-block extended Hermite kernel.

Blocks, for coupling c in (0, 1) and matrix size n:

    K_11 = K_22 = sum_{k<n} phi_k(x) phi_k(y)          (Christoffel-Darboux)
    K_21       = sum_{k<n} c^(n-k) phi_k(x) phi_k(y)
    K_12       = -c^(-n) * sum_{k>=n} c^k phi_k(x) phi_k(y)

The infinite sum in K_12 is evaluated through the Mehler closed form

    sum_{k>=0} c^k phi_k(x) phi_k(y)
        = (pi (1-c^2))^(-1/2) exp[(4xyc - (x^2+y^2)(1+c^2)) / (2(1-c^2))]

minus the first n terms.  For very small c that subtraction loses all
precision against the c^(-n) prefactor, so below C_DIRECT the tail is summed
directly (a short geometric sum there).  The brute-force tail sum also
serves as the test oracle for the Mehler identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hermite import phi_matrix, dphi_matrix

__all__ = ["KernelParams", "mehler_sum", "kernel_entry", "kernel_block", "kernel_block_dx"]

# Below this coupling the K_12 tail is summed directly instead of via Mehler.
C_DIRECT = 0.05

# Arguments closer than this (relative) use the confluent form of the
# Christoffel-Darboux kernel.
_CONFLUENT_TOL = 1e-7


@dataclass(frozen=True)
class KernelParams:
    """One probability evaluation: size n, coupling c, endpoints (xi1, xi2)."""

    n: int
    c: float
    xi1: float
    xi2: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0.0 < self.c < 1.0:
            raise ValueError(f"c must be in (0, 1), got {self.c}")
        if not (np.isfinite(self.xi1) and np.isfinite(self.xi2)):
            raise ValueError("endpoints must be finite")

    @property
    def sigma(self) -> float:
        """Scalar sigma = (1-c)/(1+c)."""
        return (1.0 - self.c) / (1.0 + self.c)

    @property
    def sigma2(self) -> float:
        return self.sigma**2


def mehler_sum(c: float, x, y):
    """Full geometric-weighted sum over all k >= 0 (Mehler closed form)."""
    if not 0.0 < c < 1.0:
        raise ValueError(f"c must be in (0, 1), got {c}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    one_m = 1.0 - c * c
    expo = (4.0 * x * y * c - (x * x + y * y) * (1.0 + c * c)) / (2.0 * one_m)
    out = np.exp(expo) / math.sqrt(math.pi * one_m)
    return float(out) if out.ndim == 0 else out


def _tail_terms(n: int, c: float) -> int:
    """Number of direct tail terms for truncation error below ~1e-20."""
    return n + max(8, int(math.ceil(-46.0 / math.log(c))))


def _tail_sum_direct(n: int, c: float, x, y):
    """sum_{k>=n} c^(k-n) phi_k(x) phi_k(y), summed term by term."""
    k_hi = _tail_terms(n, c)
    px = phi_matrix(k_hi, np.asarray(x, dtype=float))
    py = phi_matrix(k_hi, np.asarray(y, dtype=float))
    ks = np.arange(n, k_hi + 1)
    coef = c ** (ks - n)
    return np.einsum("k,k...,k...->...", coef, px[n:], py[n:])


def tail_block(n: int, c: float, x, y):
    """c^(-n) * sum_{k>=n} c^k phi_k phi_k; K_12 = -tail_block."""
    if c < C_DIRECT:
        out = _tail_sum_direct(n, c, x, y)
    else:
        px = phi_matrix(n - 1, np.asarray(x, dtype=float))
        py = phi_matrix(n - 1, np.asarray(y, dtype=float))
        coef = c ** (np.arange(n) - float(n))
        partial = np.einsum("k,k...,k...->...", coef, px, py)
        out = c ** (-n) * mehler_sum(c, x, y) - partial
    return float(out) if np.ndim(out) == 0 else out


def hermite_kernel_n(n: int, x, y):
    """Christoffel-Darboux form of sum_{k<n} phi_k(x) phi_k(y).

    The confluent x = y limit is n phi_{n-1}^2 - sqrt(n(n-1)) phi_{n-2} phi_n;
    a narrow band around the diagonal falls back to the direct partial sum,
    which is exact and free of cancellation.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    px = phi_matrix(n, x)
    py = phi_matrix(n, y)
    b = math.sqrt(n / 2.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        cd = b * (px[n] * py[n - 1] - px[n - 1] * py[n]) / (x - y)
    near = np.abs(x - y) < _CONFLUENT_TOL * (1.0 + np.abs(x) + np.abs(y))
    if np.any(near):
        direct = np.einsum("k...,k...->...", px[:n], py[:n])
        cd = np.where(near, direct, cd)
    return float(cd) if cd.ndim == 0 else cd


def weighted_partial_sum(n: int, c: float, x, y):
    """K_21: sum_{k<n} c^(n-k) phi_k(x) phi_k(y)."""
    px = phi_matrix(n - 1, np.asarray(x, dtype=float))
    py = phi_matrix(n - 1, np.asarray(y, dtype=float))
    coef = c ** (float(n) - np.arange(n))
    out = np.einsum("k,k...,k...->...", coef, px, py)
    return float(out) if np.ndim(out) == 0 else out


def kernel_entry(i: int, j: int, x: float, y: float, p: KernelParams) -> float:
    """Kernel block (i, j) at a single point, i, j in {1, 2}."""
    if i not in (1, 2) or j not in (1, 2):
        raise ValueError(f"block indices must be 1 or 2, got ({i}, {j})")
    if i == j:
        return float(hermite_kernel_n(p.n, x, y))
    if i == 2:  # (2, 1)
        return float(weighted_partial_sum(p.n, p.c, x, y))
    return -float(tail_block(p.n, p.c, x, y))  # (1, 2)


def kernel_block(i: int, j: int, x, y, p: KernelParams):
    """Vectorized kernel block; x and y broadcast together."""
    if i not in (1, 2) or j not in (1, 2):
        raise ValueError(f"block indices must be 1 or 2, got ({i}, {j})")
    if i == j:
        return hermite_kernel_n(p.n, x, y)
    if i == 2:
        return weighted_partial_sum(p.n, p.c, x, y)
    return -np.asarray(tail_block(p.n, p.c, x, y))


def _dx_partial_sum(coef: np.ndarray, x, y):
    """d/dx of sum_k coef_k phi_k(x) phi_k(y)."""
    n_hi = coef.size - 1
    dx = dphi_matrix(n_hi, np.asarray(x, dtype=float))
    py = phi_matrix(n_hi, np.asarray(y, dtype=float))
    return np.einsum("k,k...,k...->...", coef, dx, py)


def kernel_block_dx(i: int, j: int, x, y, p: KernelParams):
    """d/dx of kernel block (i, j).  Used for resolvent endpoint partials."""
    if i not in (1, 2) or j not in (1, 2):
        raise ValueError(f"block indices must be 1 or 2, got ({i}, {j})")
    n, c = p.n, p.c
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if i == j:
        coef = np.ones(n)
        return _dx_partial_sum(coef, x, y)
    if i == 2:
        coef = c ** (float(n) - np.arange(n))
        return _dx_partial_sum(coef, x, y)
    # (1, 2): differentiate the tail; Mehler route differentiates the closed
    # form, direct route the term-by-term sum.
    if c < C_DIRECT:
        k_hi = _tail_terms(n, c)
        coef = np.zeros(k_hi + 1)
        coef[n:] = c ** (np.arange(n, k_hi + 1) - float(n))
        return -_dx_partial_sum(coef, x, y)
    one_m = 1.0 - c * c
    dmehler = mehler_sum(c, x, y) * (4.0 * y * c - 2.0 * x * (1.0 + c * c)) / (2.0 * one_m)
    coef = c ** (np.arange(n) - float(n))
    return -(c ** (-n) * dmehler - _dx_partial_sum(coef, x, y))
