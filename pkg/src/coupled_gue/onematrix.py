"""Scalar Hermite-kernel Fredholm machinery for a single GUE matrix.

Independent oracle path: none of this shares assembly code with the 2x2
block engine.  Provides the largest-eigenvalue probability det(I - K_n) on
(xi, inf), endpoint scalars (resolvent value r, q, p and the inner products
u, w), and the Painleve IV combination those quantities satisfy,

    (X')^2 - 2 X^2 (X - 4n) - G1^2 = 0,
    X = -2 r',   G1 = 4 (r - xi r'),

which is the one-matrix limit of the coupled third-order systems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .hermite import phi_matrix
from .kernel import hermite_kernel_n
from .quadrature import ray_grid

__all__ = ["OneMatrixData", "solve_one_matrix", "painleve_iv_residual"]


@dataclass
class OneMatrixData:
    n: int
    xi: float
    log_prob: float
    r: float        # R(xi, xi) = d/dxi ln P
    q: float
    p: float
    u: float
    w: float

    @property
    def prob(self) -> float:
        return math.exp(self.log_prob)


def solve_one_matrix(n: int, xi: float, m: int = 64) -> OneMatrixData:
    """Scalar Nystrom solve of det(I - K_n) on (xi, inf)."""
    grid = ray_grid(xi, n, m)
    z, wts = grid.nodes, grid.weights
    sw = np.sqrt(wts)
    kfull = hermite_kernel_n(n, z[:, None], z[None, :])
    kmat = sw[:, None] * kfull * sw[None, :]
    mat = np.eye(m) - kmat
    lu, piv = sla.lu_factor(mat)
    diag = np.diag(lu)
    perm_sign = 1 if np.sum(piv != np.arange(m)) % 2 == 0 else -1
    if perm_sign * np.prod(np.sign(diag)) <= 0:
        raise RuntimeError("one-matrix determinant lost positivity")
    log_prob = float(np.sum(np.log(np.abs(diag))))
    r_disc = sla.lu_solve((lu, piv), kmat) / (sw[:, None] * sw[None, :])

    scale = (n / 2.0) ** 0.25
    pm = phi_matrix(n, z)
    phi_g = scale * pm[n]
    psi_g = scale * pm[n - 1]
    pm_xi = phi_matrix(n, np.array([xi]))
    phi_xi = scale * pm_xi[n][0]
    psi_xi = scale * pm_xi[n - 1][0]

    # Resolvent row at the endpoint: R(xi, z_b) = K + K W R
    krow = hermite_kernel_n(n, xi, z)
    rrow = krow + (krow * wts) @ r_disc
    r_val = float(hermite_kernel_n(n, xi, xi) + (rrow * wts) @ krow)

    q_val = float(phi_xi + (rrow * wts) @ phi_g)
    p_val = float(psi_xi + (rrow * wts) @ psi_g)
    q_grid = phi_g + r_disc @ (wts * phi_g)
    p_grid = psi_g + r_disc @ (wts * psi_g)
    u_val = float((wts * phi_g) @ q_grid)
    w_val = float((wts * psi_g) @ p_grid)

    return OneMatrixData(
        n=n, xi=xi, log_prob=log_prob, r=r_val, q=q_val, p=p_val, u=u_val, w=w_val
    )


def painleve_iv_residual(n: int, xi: float, m: int = 64) -> tuple[float, float]:
    """Painleve IV combination for one-matrix GUE: (residual, scale).

    All derivatives come from the scalar first-order system:
        r'  = -2 p q
        q'  = -xi q + 2 p (b - u)
        p'  =  xi p - 2 q (b + w),      b = sqrt(n/2).
    """
    d = solve_one_matrix(n, xi, m)
    b = math.sqrt(n / 2.0)
    rp = -2.0 * d.p * d.q
    x_val = 4.0 * d.p * d.q
    xp = 8.0 * (d.p**2 * (b - d.u) - d.q**2 * (b + d.w))
    g1 = 4.0 * (d.r - xi * rp)
    terms = (xp**2, 2.0 * x_val**2 * (x_val - 4.0 * n), g1**2)
    residual = terms[0] - terms[1] - terms[2]
    scale = max(abs(t) for t in terms)
    return residual, scale
