"""Nystrom discretization of the extended Hermite kernel on J1 (+) J2.

solve() produces ln P = ln det(I - K^J) through a pivoted LU factorization
with explicit sign tracking, the discrete resolvent, and enough cached grid
data to interpolate the resolvent kernel anywhere (Gauss nodes exclude the
ray endpoints, so endpoint values are always interpolated).

endpoint_data() evaluates the 2x2 endpoint matrices of the theory: the
resolvent values r and its partials, the functions q, p, q~, p~ obtained by
applying the resolvent to the scaled oscillator functions

    phi = (n/2)^(1/4) phi_n,     psi = (n/2)^(1/4) phi_{n-1},

the inner-product matrices u, w, and the combinations U_hat, W_hat.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .hermite import phi_matrix
from .kernel import KernelParams, kernel_block, kernel_block_dx, kernel_entry
from .quadrature import QuadratureGrid, ray_grid

__all__ = [
    "FredholmError",
    "FredholmSolution",
    "EndpointData",
    "solve",
    "resolvent_at",
    "endpoint_data",
]

SIGMA3 = np.diag([1.0, -1.0])
THETA = np.ones((2, 2))
I2 = np.eye(2)


class FredholmError(RuntimeError):
    """Numerical failure of the determinant computation (sign/singularity)."""

    def __init__(self, msg: str, cond: float = math.nan):
        super().__init__(msg)
        self.cond = cond


@dataclass
class FredholmSolution:
    """Discretized solve at one parameter point (immutable after build)."""

    params: KernelParams
    m: int
    grids: tuple[QuadratureGrid, QuadratureGrid]
    nodes: np.ndarray        # (2m,) quadrature nodes, ray 1 then ray 2
    weights: np.ndarray      # (2m,) positive weights
    blocks: np.ndarray       # (2m,) ray label, 1 or 2
    kmat: np.ndarray         # (2m, 2m) weight-symmetrized kernel
    log_prob: float          # ln det(I - kmat)
    sign: int
    cond: float              # 1-norm condition estimate of I - kmat
    resolvent_mat: np.ndarray  # symmetrized discrete resolvent
    r_disc: np.ndarray       # unsymmetrized resolvent values R(z_a, z_b)

    @property
    def prob(self) -> float:
        return math.exp(self.log_prob)


@dataclass
class EndpointData:
    """2x2 endpoint matrices at (xi_1, xi_2)."""

    params: KernelParams
    r: np.ndarray
    r_x: np.ndarray
    r_y: np.ndarray
    q: np.ndarray
    p: np.ndarray
    qt: np.ndarray
    pt: np.ndarray
    u: np.ndarray
    w: np.ndarray
    U_hat: np.ndarray
    W_hat: np.ndarray


def _assemble(p: KernelParams, nodes: np.ndarray, blocks: np.ndarray) -> np.ndarray:
    """Unsymmetrized kernel matrix K_{blk(a),blk(b)}(z_a, z_b)."""
    size = nodes.size
    kfull = np.empty((size, size))
    for bi in (1, 2):
        ia = blocks == bi
        for bj in (1, 2):
            jb = blocks == bj
            kfull[np.ix_(ia, jb)] = kernel_block(
                bi, bj, nodes[ia][:, None], nodes[jb][None, :], p
            )
    return kfull


def solve(p: KernelParams, m: int = 64) -> FredholmSolution:
    """Solve the Nystrom system at parameter point p with m nodes per ray."""
    if m < 8:
        raise ValueError(f"m must be >= 8, got {m}")
    g1 = ray_grid(p.xi1, p.n, m)
    g2 = ray_grid(p.xi2, p.n, m)
    nodes = np.concatenate([g1.nodes, g2.nodes])
    weights = np.concatenate([g1.weights, g2.weights])
    blocks = np.concatenate([np.ones(m, dtype=int), 2 * np.ones(m, dtype=int)])

    kfull = _assemble(p, nodes, blocks)
    sw = np.sqrt(weights)
    kmat = sw[:, None] * kfull * sw[None, :]

    ident = np.eye(2 * m)
    mat = ident - kmat
    anorm = np.linalg.norm(mat, 1)
    lu, piv = sla.lu_factor(mat)
    diag = np.diag(lu)

    rcond, info = sla.lapack.dgecon(lu, anorm, norm="1")
    cond = math.inf if rcond == 0.0 else 1.0 / rcond

    if np.any(diag == 0.0):
        raise FredholmError("I - K is numerically singular", cond=cond)
    perm_sign = 1 if np.sum(piv != np.arange(2 * m)) % 2 == 0 else -1
    sign = perm_sign * (1 if np.prod(np.sign(diag)) > 0 else -1)
    if sign <= 0:
        raise FredholmError(
            f"det(I - K) has non-positive sign (cond ~ {cond:.3e})", cond=cond
        )
    log_prob = float(np.sum(np.log(np.abs(diag))))

    resolvent_mat = sla.lu_solve((lu, piv), kmat)
    r_disc = resolvent_mat / (sw[:, None] * sw[None, :])

    return FredholmSolution(
        params=p,
        m=m,
        grids=(g1, g2),
        nodes=nodes,
        weights=weights,
        blocks=blocks,
        kmat=kmat,
        log_prob=log_prob,
        sign=sign,
        cond=cond,
        resolvent_mat=resolvent_mat,
        r_disc=r_disc,
    )


def _kernel_row(sol: FredholmSolution, i: int, x: float) -> np.ndarray:
    """K_{i,blk(b)}(x, z_b) over the whole grid."""
    p = sol.params
    row = np.empty(sol.nodes.size)
    for bj in (1, 2):
        jb = sol.blocks == bj
        row[jb] = kernel_block(i, bj, x, sol.nodes[jb], p)
    return row


def _kernel_col(sol: FredholmSolution, j: int, y: float) -> np.ndarray:
    """K_{blk(a),j}(z_a, y) over the whole grid."""
    p = sol.params
    col = np.empty(sol.nodes.size)
    for bi in (1, 2):
        ia = sol.blocks == bi
        col[ia] = kernel_block(bi, j, sol.nodes[ia], y, p)
    return col


def _kernel_row_dx(sol: FredholmSolution, i: int, x: float) -> np.ndarray:
    """d/dx K_{i,blk(b)}(x, z_b) over the grid."""
    p = sol.params
    row = np.empty(sol.nodes.size)
    for bj in (1, 2):
        jb = sol.blocks == bj
        row[jb] = kernel_block_dx(i, bj, x, sol.nodes[jb], p)
    return row


def _resolvent_row(sol: FredholmSolution, i: int, x: float) -> np.ndarray:
    """R_{i,blk(b)}(x, z_b) via R = K + K W R."""
    krow = _kernel_row(sol, i, x)
    return krow + (krow * sol.weights) @ sol.r_disc


def _resolvent_col(sol: FredholmSolution, j: int, y: float) -> np.ndarray:
    """R_{blk(a),j}(z_a, y) via R = K + R W K."""
    kcol = _kernel_col(sol, j, y)
    return kcol + sol.r_disc @ (sol.weights * kcol)


def resolvent_at(sol: FredholmSolution, i: int, j: int, x: float, y: float) -> float:
    """Nystrom interpolation of the resolvent kernel R_ij(x, y)."""
    if i not in (1, 2) or j not in (1, 2):
        raise ValueError(f"block indices must be 1 or 2, got ({i}, {j})")
    rrow = _resolvent_row(sol, i, x)
    kcol = _kernel_col(sol, j, y)
    return float(kernel_entry(i, j, x, y, sol.params) + (rrow * sol.weights) @ kcol)


def endpoint_data(sol: FredholmSolution) -> EndpointData:
    p = sol.params
    n = p.n
    xi = (p.xi1, p.xi2)
    scale = (n / 2.0) ** 0.25

    pm = phi_matrix(n, sol.nodes)
    phi_g = scale * pm[n]          # phi at the grid nodes
    psi_g = scale * pm[n - 1]      # psi at the grid nodes
    phi_xi = [scale * phi_matrix(n, np.array([x]))[n][0] for x in xi]
    psi_xi = [scale * phi_matrix(n, np.array([x]))[n - 1][0] for x in xi]

    wts = sol.weights
    masks = [sol.blocks == 1, sol.blocks == 2]

    # On-grid Q, P (columns j = 1, 2):  Q_.j(z_a) = delta phi + int R phi
    q_grid = np.zeros((sol.nodes.size, 2))
    p_grid = np.zeros((sol.nodes.size, 2))
    for j in range(2):
        mj = masks[j]
        q_grid[:, j] = mj * phi_g + sol.r_disc[:, mj] @ (wts[mj] * phi_g[mj])
        p_grid[:, j] = mj * psi_g + sol.r_disc[:, mj] @ (wts[mj] * psi_g[mj])

    rrow = [_resolvent_row(sol, i + 1, xi[i]) for i in range(2)]
    rcol = [_resolvent_col(sol, j + 1, xi[j]) for j in range(2)]

    qm = np.zeros((2, 2))
    pmx = np.zeros((2, 2))
    qt = np.zeros((2, 2))
    ptm = np.zeros((2, 2))
    um = np.zeros((2, 2))
    wm = np.zeros((2, 2))
    rm = np.zeros((2, 2))
    rxm = np.zeros((2, 2))
    rym = np.zeros((2, 2))

    for i in range(2):
        dkrow_i = _kernel_row_dx(sol, i + 1, xi[i])
        for j in range(2):
            mj = masks[j]
            mi = masks[i]
            delta = 1.0 if i == j else 0.0
            qm[i, j] = delta * phi_xi[i] + (rrow[i][mj] * wts[mj]) @ phi_g[mj]
            pmx[i, j] = delta * psi_xi[i] + (rrow[i][mj] * wts[mj]) @ psi_g[mj]
            qt[i, j] = delta * phi_xi[j] + (wts[mi] * phi_g[mi]) @ rcol[j][mi]
            ptm[i, j] = delta * psi_xi[j] + (wts[mi] * psi_g[mi]) @ rcol[j][mi]
            um[i, j] = (wts[mi] * phi_g[mi]) @ q_grid[mi, j]
            wm[i, j] = (wts[mi] * psi_g[mi]) @ p_grid[mi, j]

            kcol_j = _kernel_col(sol, j + 1, xi[j])
            rm[i, j] = kernel_entry(i + 1, j + 1, xi[i], xi[j], p) + (
                rrow[i] * wts
            ) @ kcol_j
            rxm[i, j] = kernel_block_dx(i + 1, j + 1, xi[i], xi[j], p) + (
                dkrow_i * wts
            ) @ rcol[j]
            # d/dy K_ij(x, y) = (d/dx K_ij)(y, x) by block symmetry
            dkcol_j = np.empty(sol.nodes.size)
            for bb in (1, 2):
                ib = sol.blocks == bb
                dkcol_j[ib] = kernel_block_dx(bb, j + 1, xi[j], sol.nodes[ib], p)
            rym[i, j] = kernel_block_dx(i + 1, j + 1, xi[j], xi[i], p) + (
                rrow[i] * wts
            ) @ dkcol_j

    sig = p.sigma
    sig_m = sig * SIGMA3
    w_hatted = (I2 - sig_m) @ wm @ (I2 + sig_m) / (1.0 - sig * sig)
    u_hat = math.sqrt(n / 2.0) * THETA - THETA @ um @ THETA
    w_hat = math.sqrt(n / 2.0) * THETA + THETA @ w_hatted @ THETA

    return EndpointData(
        params=p,
        r=rm,
        r_x=rxm,
        r_y=rym,
        q=qm,
        p=pmx,
        qt=qt,
        pt=ptm,
        u=um,
        w=wm,
        U_hat=u_hat,
        W_hat=w_hat,
    )
