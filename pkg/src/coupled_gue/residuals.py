"""Numerical residual evaluation for every PDE and first integral.

Each equation is evaluated on a (xi1, xi2, c) stencil around a center
point.  Quantities up to second derivatives of ln tau come exact from the
closed first-order system (see observables); only the highest derivative of
each equation is taken by finite differences of those exact fields:
4th-order central stencils in the endpoint directions, 2nd-order in the
coupling c.  Reports carry the residual, the magnitude scale of the
constituent terms, and the relative residual, which is what tolerances
apply to.

Equations whose natural scale collapses at a center (empty-constraint
limits xi -> inf, or the X_3 = 0 locus xi1 = xi2) are downgraded to
status "degenerate" instead of producing meaningless ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from functools import cached_property

from .kernel import KernelParams
from .fredholm import solve, endpoint_data
from .observables import (
    build_quartet,
    build_derived,
    theorem1_uw,
    log_tau_n,
    final_composites,
)
from .onematrix import painleve_iv_residual

__all__ = [
    "Stencil",
    "ResidualReport",
    "PointCache",
    "EQUATION_IDS",
    "HIGHER_ORDER_IDS",
    "evaluate",
    "richardson",
    "residual_boundary_toda",
    "residual_theorem1",
    "residual_avm",
    "residual_f4t",
    "residual_corollary_main",
    "residual_ccom",
    "residual_final_four",
    "residual_appendix",
    "painleve_boundary_check",
]

# 4th/2nd-order central first-derivative stencils: (offsets, weights)
_D1 = {
    2: ((-1, 1), (-0.5, 0.5)),
    4: ((-2, -1, 1, 2), (1.0 / 12, -2.0 / 3, 2.0 / 3, -1.0 / 12)),
}

_DEGENERATE_SCALE = 1e-13
_X3_GUARD = 1e-7
_A2_GUARD = 1e-10
_FHAT_GUARD = 1e-10
_DELTA_GUARD = 1e-12


@dataclass(frozen=True)
class Stencil:
    """FD steps around a center; order applies to the xi directions."""

    h_xi: float = 5e-3
    h_c: float = 1e-3
    order: int = 2

    def __post_init__(self):
        if self.h_xi <= 0 or self.h_c <= 0:
            raise ValueError("stencil steps must be positive")
        if self.order not in (2, 4):
            raise ValueError(f"order must be 2 or 4, got {self.order}")

    def check_c(self, c: float) -> None:
        if not (0.0 < c - 2 * self.h_c and c + 2 * self.h_c < 1.0):
            raise ValueError(f"c={c} too close to (0,1) boundary for h_c={self.h_c}")

    def scaled(self, f: float) -> "Stencil":
        return Stencil(h_xi=f * self.h_xi, h_c=f * self.h_c, order=self.order)


DEFAULT_STENCIL = Stencil(h_xi=5e-3, h_c=1e-3, order=4)
# Larger steps / lower order for the 5th-order Toda-side equations.
HIGHER_STENCIL = Stencil(h_xi=2e-2, h_c=4e-3, order=2)


@dataclass
class ResidualReport:
    equation: str
    center: dict
    residual: float
    scale: float
    relative: float
    tolerance: float
    passed: bool | None   # None when the check was skipped as degenerate
    status: str = "ok"
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


class _Point:
    """Lazy per-point data; heavy members computed once."""

    def __init__(self, params: KernelParams, m: int):
        self.params = params
        self.m = m

    @cached_property
    def sol(self):
        return solve(self.params, self.m)

    @cached_property
    def end(self):
        return endpoint_data(self.sol)

    @cached_property
    def quartet(self):
        return build_quartet(self.end)

    @cached_property
    def derived(self):
        return build_derived(self.end, self.quartet, self.params)

    @cached_property
    def uw(self):
        return theorem1_uw(self.end, self.params)

    @cached_property
    def T(self):
        return self.sol.log_prob + log_tau_n(self.params.n, self.params.c)


class PointCache:
    """Memoizes solves per (n, c, xi1, xi2, m); shared by all residuals."""

    def __init__(self, n: int, m: int = 64):
        self.n = n
        self.m = m
        self._points: dict = {}

    def point(self, xi1: float, xi2: float, c: float) -> _Point:
        key = (xi1, xi2, c)
        p = self._points.get(key)
        if p is None:
            p = _Point(KernelParams(self.n, c, xi1, xi2), self.m)
            self._points[key] = p
        return p

    def f(self, name: str):
        """Scalar field (xi1, xi2, c) -> value.

        Names resolve against DerivedQuantities attributes, the theorem-1
        U/W dict, or the specials 'T' and 'log_prob'.
        """
        if name == "T":
            return lambda x1, x2, c: self.point(x1, x2, c).T
        if name == "log_prob":
            return lambda x1, x2, c: self.point(x1, x2, c).sol.log_prob
        if name in ("U", "W", "DpU", "DmU", "DpW", "DmW"):
            return lambda x1, x2, c: self.point(x1, x2, c).uw[name]
        return lambda x1, x2, c: getattr(self.point(x1, x2, c).derived, name)


def _d_dir(f, x1, x2, c, direction, h, order):
    """Directional derivative along `direction` in the xi-plane."""
    offs, wts = _D1[order]
    dx1, dx2 = direction
    return sum(
        w * f(x1 + o * h * dx1, x2 + o * h * dx2, c) for o, w in zip(offs, wts)
    ) / h


def _d_c(f, x1, x2, c, hc):
    return (f(x1, x2, c + hc) - f(x1, x2, c - hc)) / (2.0 * hc)


def _mk_report(eq, cache, center, residual, terms, tol, status="ok", extras=None):
    x1, x2, c = center
    scale = max((abs(t) for t in terms), default=0.0)
    if status == "ok" and scale < _DEGENERATE_SCALE:
        status = "degenerate"
    if status == "ok":
        relative = float(abs(residual) / scale)
        passed = bool(relative <= tol)
    else:
        relative = math.nan
        passed = None
    return ResidualReport(
        equation=eq,
        center={"n": cache.n, "c": c, "xi1": x1, "xi2": x2, "m": cache.m},
        residual=float(residual),
        scale=float(scale),
        relative=float(relative),
        tolerance=tol,
        passed=passed,
        status=status,
        extras=extras or {},
    )


def _degenerate_guard(eq_id, d, *, x3=False, a2f=False, delta=None):
    """Return a degenerate-status string or 'ok'."""
    if x3 and abs(d.X_3) < _X3_GUARD * max(1.0, abs(d.X_t)):
        return "degenerate"
    if a2f and (abs(d.A2) < _A2_GUARD or abs(d.F_hat) < _FHAT_GUARD):
        return "degenerate"
    if delta is not None and abs(delta) < _DELTA_GUARD:
        return "degenerate"
    return "ok"


# --------------------------------------------------------------------------
# FD-free residuals
# --------------------------------------------------------------------------

def _eval_toda00(cache, center, st, eq_id="toda00", tol=1e-6):
    x1, x2, c = center
    d = cache.point(x1, x2, c).derived
    sig2 = d.sigma2
    lhs = (1.0 + c) ** 2 / 4.0 * (d.dp_rt - sig2 * d.dm_r3)
    uw_prod = d.tr_U * d.tr_W / 4.0
    t_uw = 4.0 * c * uw_prod
    t_n = 2.0 * c * cache.n
    return [
        _mk_report(eq_id, cache, center, lhs - t_uw + t_n, [lhs, t_uw, t_n], tol)
    ]


def _eval_cor_x(cache, center, st, tol=1e-6):
    x1, x2, c = center
    d = cache.point(x1, x2, c).derived
    terms = [d.Phi_t * d.Phi_3, 2.0 * d.X_t * d.X_3 * d.F_hat, d.G_t * d.G_3]
    res = terms[0] - terms[1] - terms[2]
    status = _degenerate_guard("cor_x", d, x3=True)
    return [_mk_report("cor_x", cache, center, res, terms, tol, status)]


# --------------------------------------------------------------------------
# Toda-side system (theorem-1 AKNS equations), AvM, F4T
# --------------------------------------------------------------------------

def _a2t_exact(d, c, tilde=False):
    """A^2 T or At^2 T from exact second derivatives."""
    sig = math.sqrt(d.sigma2)
    s = -1.0 if tilde else 1.0
    return (1.0 + c) ** 2 / 4.0 * (
        d.dp_rt + 2.0 * s * sig * d.dp_r3 + d.sigma2 * d.dm_r3
    )


def _eval_theorem1(cache, center, st, tol=1e-4):
    x1, x2, c = center
    st.check_c(c)
    pt = cache.point(x1, x2, c)
    d = pt.derived
    uw = pt.uw
    sig = math.sqrt(d.sigma2)
    a2t = _a2t_exact(d, c)
    at2t = _a2t_exact(d, c, tilde=True)

    def a_of(which):
        def fval(a, b, cc):
            s = (1.0 - cc) / (1.0 + cc)
            u = cache.point(a, b, cc).uw
            return (1.0 + cc) / 2.0 * (u["Dp" + which] + s * u["Dm" + which])
        return fval

    def at_of(which):
        def fval(a, b, cc):
            s = (1.0 - cc) / (1.0 + cc)
            u = cache.point(a, b, cc).uw
            return (1.0 + cc) / 2.0 * (u["Dp" + which] - s * u["Dm" + which])
        return fval

    reports = _eval_toda00(cache, center, st, eq_id="thm1_00", tol=1e-6)
    for which, sgn, ids in (("U", +1.0, ("thm1_pt", "thm1_ps")),
                            ("W", -1.0, ("thm1_mt", "thm1_ms"))):
        val = uw[which]
        d1 = (uw["Dp" + which] + uw["Dm" + which]) / 2.0
        d2 = (uw["Dp" + which] - uw["Dm" + which]) / 2.0
        dc = _d_c(cache.f(which), x1, x2, c, st.h_c)
        a0 = x1 * d1 + c * c * x2 * d2 - (1.0 - c * c) * c * dc
        at0 = x2 * d2 + c * c * x1 * d1 - (1.0 - c * c) * c * dc
        a2v = _d_dir(a_of(which), x1, x2, c, (1.0, c), st.h_xi, st.order)
        at2v = _d_dir(at_of(which), x1, x2, c, (c, 1.0), st.h_xi, st.order)
        res_t = a2v + 2.0 * sgn * a0 + 2.0 * a2t * val
        res_s = at2v + 2.0 * sgn * at0 + 2.0 * at2t * val
        reports.append(
            _mk_report(ids[0], cache, center, res_t,
                       [a2v, 2.0 * a0, 2.0 * a2t * val], tol)
        )
        reports.append(
            _mk_report(ids[1], cache, center, res_s,
                       [at2v, 2.0 * at0, 2.0 * at2t * val], tol)
        )
    # keep declared order: 00, +t, -t, +s, -s
    return [reports[0], reports[1], reports[3], reports[2], reports[4]]


def _a0t_field(cache, tilde=False, hc=1e-3):
    """A_0 T (or At_0 T) as a field; the c-derivative is 2nd-order FD."""
    t_field = cache.f("T")

    def fval(x1, x2, c):
        d = cache.point(x1, x2, c).derived
        d1t = (d.r_t + d.r_3) / 2.0
        d2t = (d.r_t - d.r_3) / 2.0
        dct = _d_c(t_field, x1, x2, c, hc)
        if tilde:
            return x2 * d2t + c * c * x1 * d1t - (1.0 - c * c) * c * dct
        return x1 * d1t + c * c * x2 * d2t - (1.0 - c * c) * c * dct

    return fval


def _f_field(cache):
    n = cache.n

    def fval(x1, x2, c):
        d = cache.point(x1, x2, c).derived
        return (d.dp_rt - d.sigma2 * d.dm_r3) / (4.0 * (1.0 - d.sigma2)) + n / 2.0

    return fval


def _eval_avm(cache, center, st, tol=1e-4):
    x1, x2, c = center
    st.check_c(c)
    a0t = _a0t_field(cache, tilde=False, hc=st.h_c)
    a0t_t = _a0t_field(cache, tilde=True, hc=st.h_c)
    ff = _f_field(cache)

    def g_over_f(a, b, cc):
        d = cache.point(a, b, cc).derived
        s = math.sqrt(d.sigma2)
        at_ = (1.0 + cc) / 2.0 * (d.r_t + s * d.r_3)
        g = at_ - _d_dir(a0t, a, b, cc, (cc, 1.0), st.h_xi, st.order) / (2.0 * cc)
        return g / ff(a, b, cc)

    def gt_over_f(a, b, cc):
        d = cache.point(a, b, cc).derived
        s = math.sqrt(d.sigma2)
        att = (1.0 + cc) / 2.0 * (d.r_t - s * d.r_3)
        gt = att - _d_dir(a0t_t, a, b, cc, (1.0, cc), st.h_xi, st.order) / (2.0 * cc)
        return gt / ff(a, b, cc)

    f0 = ff(x1, x2, c)
    status = "degenerate" if abs(f0) < _FHAT_GUARD else "ok"
    lhs = _d_dir(gt_over_f, x1, x2, c, (1.0, c), st.h_xi, st.order)
    rhs = _d_dir(g_over_f, x1, x2, c, (c, 1.0), st.h_xi, st.order)
    return [
        _mk_report("avm", cache, center, lhs - rhs, [lhs, rhs], tol, status,
                   extras={"lhs": lhs, "rhs": rhs, "F": f0})
    ]


def _eval_f4t(cache, center, st, tol=1e-4):
    x1, x2, c = center
    st.check_c(c)
    n = cache.n
    ff = _f_field(cache)
    rt_f = cache.f("r_t")
    r3_f = cache.f("r_3")

    def gp(a, b, cc):
        d = cache.point(a, b, cc).derived
        s2 = d.sigma2
        xp_, xm_ = a + b, a - b
        dcrt = _d_c(rt_f, a, b, cc, st.h_c)
        return (0.5 * d.r_t - 0.25 * xp_ * d.dp_rt - 0.25 * xm_ * d.dp_r3
                + 0.5 * (1.0 - cc * cc) * dcrt
                - 0.5 * xp_ * s2 * (d.dp_rt - d.dm_r3) / (1.0 - s2))

    def gm(a, b, cc):
        d = cache.point(a, b, cc).derived
        s2 = d.sigma2
        xp_, xm_ = a + b, a - b
        dcr3 = _d_c(r3_f, a, b, cc, st.h_c)
        return (0.5 * d.r_3 - 0.25 * xm_ * d.dm_r3 - 0.25 * xp_ * d.dp_r3
                - 0.5 * (1.0 - cc * cc) * dcr3
                - 0.5 * xm_ * (d.dp_rt - d.dm_r3) / (1.0 - s2))

    d0 = cache.point(x1, x2, c).derived
    f0 = ff(x1, x2, c)
    gp0 = gp(x1, x2, c)
    gm0 = gm(x1, x2, c)
    dpf = _d_dir(ff, x1, x2, c, (1, 1), st.h_xi, st.order)
    dmf = _d_dir(ff, x1, x2, c, (1, -1), st.h_xi, st.order)

    def dmf_field(a, b, cc):
        return _d_dir(ff, a, b, cc, (1, -1), st.h_xi, st.order)

    dpdmf = _d_dir(dmf_field, x1, x2, c, (1, 1), st.h_xi, st.order)
    xp_, xm_ = x1 + x2, x1 - x2
    terms = [
        2.0 * f0 * dpdmf,
        dpf * dmf,
        gp0 * gm0,
        2.0 * f0 * (xm_ * gp0 + xp_ * gm0),
        8.0 * d0.dp_r3 * f0 * f0,
    ]
    res = terms[0] - terms[1] + terms[2] + terms[3] + terms[4]
    # cross-formalism check: 2 Fhat * (Tt3) - (x), rescaled by 64, matches
    phi3_fd = _d_dir(cache.f("X_t"), x1, x2, c, (1, -1), st.h_xi, st.order)
    dpdmxt = _d_dir(
        lambda a, b, cc: _d_dir(cache.f("X_t"), a, b, cc, (1, -1), st.h_xi, st.order),
        x1, x2, c, (1, 1), st.h_xi, st.order,
    )
    tt3_expr = dpdmxt - xm_ * d0.G_t - xp_ * d0.G_3 - d0.X_3 * (3.0 * d0.X_t - 8.0 * n)
    x_expr = d0.Phi_t * d0.Phi_3 - 2.0 * d0.X_t * d0.X_3 * d0.F_hat - d0.G_t * d0.G_3
    combo = (2.0 * d0.F_hat * tt3_expr - x_expr) / 64.0
    return [
        _mk_report("f4t", cache, center, res, terms, tol,
                   extras={"tw_combo": combo, "combo_diff": res - combo})
    ]


# --------------------------------------------------------------------------
# Corollary system, ccom, final-four, appendix equations (TW side)
# --------------------------------------------------------------------------

def _fd_thirds(cache, center, st):
    """FD values of the four senior derivatives on exact fields."""
    x1, x2, c = center
    xt_f = cache.f("X_t")
    a2_f = cache.f("A2")
    return {
        "phi_t": _d_dir(xt_f, x1, x2, c, (1, 1), st.h_xi, st.order),
        "phi_3": _d_dir(xt_f, x1, x2, c, (1, -1), st.h_xi, st.order),
        "dp_a2": _d_dir(a2_f, x1, x2, c, (1, 1), st.h_xi, st.order),
        "dm_a2": _d_dir(a2_f, x1, x2, c, (1, -1), st.h_xi, st.order),
    }


def _eval_corollary(cache, center, st, tol=1e-4):
    x1, x2, c = center
    d = cache.point(x1, x2, c).derived
    fd = _fd_thirds(cache, center, st)
    sig2 = d.sigma2
    reports = _eval_cor_x(cache, center, st)

    status = _degenerate_guard("cor", d, x3=True, a2f=True)

    t_ax = [4.0 * sig2 * fd["dp_a2"] * fd["dm_a2"],
            8.0 * sig2 * d.X_3 * d.A2**2,
            d.A_plus * d.A_minus]
    res_ax = t_ax[0] - t_ax[1] - t_ax[2]
    reports.append(_mk_report("cor_Ax", cache, center, res_ax, t_ax, tol, status))

    p_t = fd["phi_t"] ** 2 - d.F_hat * (2.0 * d.X_3**2 + d.J) - d.G_t**2
    p_3 = fd["phi_3"] ** 2 - d.F_hat * (2.0 * d.X_3**2 + d.J) - d.G_3**2
    d_t = 4.0 * sig2 * fd["dp_a2"] ** 2 + 2.0 * sig2 * d.A2 * d.J - d.A_plus**2
    d_3 = 4.0 * sig2 * fd["dm_a2"] ** 2 + 2.0 * d.A2 * d.J - d.A_minus**2
    e1 = 2.0 * sig2 * d.A2 * p_t
    e2 = -2.0 * sig2 * d.A2 * p_3
    e3 = -d.F_hat * d_t
    e4 = sig2 * d.F_hat * d_3
    for eq, lhs, rhs in (("cor_pm1", e1, e2), ("cor_pm2", e2, e3),
                         ("cor_pm3", e3, e4)):
        reports.append(
            _mk_report(eq, cache, center, lhs - rhs, [e1, e2, e3, e4], tol, status)
        )

    t_a = [d.F_hat * fd["dp_a2"] * d.A_minus,
           d.F_hat * fd["dm_a2"] * d.A_plus,
           d.A2 * d.G_3 * fd["phi_t"],
           d.A2 * d.G_t * fd["phi_3"]]
    res_a = (t_a[0] - t_a[1]) - (t_a[2] - t_a[3])
    reports.append(_mk_report("cor_a", cache, center, res_a, t_a, tol, status))
    return reports


def _eval_ccom(cache, center, st, tol=1e-5):
    x1, x2, c = center
    st.check_c(c)
    d = cache.point(x1, x2, c).derived
    r = cache.point(x1, x2, c).end.r
    lhs_p = r[0, 1] * d.dp_r[1, 0] - d.dp_r[0, 1] * r[1, 0]
    lhs_m = r[0, 1] * d.dm_r[1, 0] - d.dm_r[0, 1] * r[1, 0]
    rhs_p = -2.0 * c * _d_c(cache.f("r_t"), x1, x2, c, st.h_c)
    rhs_m = 2.0 * c * _d_c(cache.f("r_3"), x1, x2, c, st.h_c)
    return [
        _mk_report("ccom_p", cache, center, lhs_p - rhs_p, [lhs_p, rhs_p], tol),
        _mk_report("ccom_m", cache, center, lhs_m - rhs_m, [lhs_m, rhs_m], tol),
    ]


def _eval_final_four(cache, center, st, tol=1e-4):
    x1, x2, c = center
    d = cache.point(x1, x2, c).derived
    fd = _fd_thirds(cache, center, st)
    sig2 = d.sigma2
    comp = final_composites(
        phi_t=fd["phi_t"], phi_3=fd["phi_3"], dp_a2=fd["dp_a2"], dm_a2=fd["dm_a2"],
        x_t=d.X_t, x_3=d.X_3, a2=d.A2, f_hat=d.F_hat, j=d.J,
        h_t=d.H_t, h_3=d.H_3, sigma2=sig2,
    )
    delta = comp["Delta"]
    status = _degenerate_guard("fin", d, x3=True, a2f=True, delta=delta)
    l1 = d.H_t * comp["P_plus"] - 2.0 * comp["F_3"] * d.H_3 * comp["P_x"]
    l2 = 2.0 * comp["F_t"] * d.H_t * comp["P_x"] - d.H_3 * comp["P_plus"]
    reports = []

    t = [l1 * l2, 4.0 * delta**2 * comp["J_A"]]
    reports.append(_mk_report("fin_Axx", cache, center, t[0] - t[1], t, tol, status))

    t = [l1 * l1, 4.0 * delta**2 * comp["J_plus"], 8.0 * delta * sig2 * d.A2 * comp["P_a"]]
    reports.append(_mk_report("fin_Ap2", cache, center, t[0] - t[1] + t[2], t, tol, status))

    t = [l2 * l2, 4.0 * delta**2 * comp["J_minus"], 8.0 * delta * d.A2 * comp["P_a"]]
    reports.append(_mk_report("fin_Am2", cache, center, t[0] - t[1] - t[2], t, tol, status))

    t = [comp["S_3"] * l1, comp["S_t"] * l2, 2.0 * d.A2 * delta * comp["J_a"]]
    reports.append(_mk_report("fin_aa", cache, center, t[0] - t[1] - t[2], t, tol, status))

    ratio = d.A2 * comp["P_a"] / delta if status == "ok" else 0.0
    t = [comp["P_x"] ** 2, comp["P_hat_A"], 2.0 * (d.H_t**2 - sig2 * d.H_3**2) * ratio]
    reports.append(_mk_report("fin_Px", cache, center, t[0] - t[1] - t[2], t, tol, status))

    t = [comp["P_plus"] ** 2,
         4.0 * (comp["F_t"] * comp["F_3"] * comp["P_hat_A"]
                + delta * (comp["F_t"] * comp["J_plus"] - comp["F_3"] * comp["J_minus"])),
         8.0 * (comp["F_3"] ** 2 * d.H_3**2 - sig2 * comp["F_t"] ** 2 * d.H_t**2) * ratio]
    reports.append(_mk_report("fin_Pp", cache, center, t[0] - t[1] - t[2], t, tol, status))

    t = [d.A2 * comp["P_a"] ** 2,
         2.0 * delta * comp["P_a"] * (fd["dp_a2"] ** 2 - sig2 * fd["dm_a2"] ** 2),
         delta**2 * comp["I_a"]]
    reports.append(_mk_report("fin_Pa", cache, center, t[0] - t[1] - t[2], t, tol, status))
    return reports


def _eval_appendix(cache, center, st, tol=1e-4):
    x1, x2, c = center
    n = cache.n
    d = cache.point(x1, x2, c).derived
    fd = _fd_thirds(cache, center, st)
    sig2 = d.sigma2
    xp_, xm_ = x1 + x2, x1 - x2
    reports = []
    status3 = _degenerate_guard("app", d, x3=True)

    dpdmx3 = _d_dir(cache.f("DmX3"), x1, x2, c, (1, 1), st.h_xi, st.order)
    t = [d.X_3 * dpdmx3, d.DpX3 * d.DmX3, d.R_t * d.R_3,
         (d.X_3 + xp_ * xm_) * d.X_3**2]
    reports.append(_mk_report("app_S", cache, center, t[0] - t[1] + t[2] - t[3],
                              t, tol, status3))

    dp_phi3 = _d_dir(cache.f("Phi_3"), x1, x2, c, (1, 1), st.h_xi, st.order)
    t = [dp_phi3, xm_ * d.G_t, xp_ * d.G_3, d.X_3 * (3.0 * d.X_t - 8.0 * n)]
    reports.append(_mk_report("app_Tt3", cache, center, t[0] - t[1] - t[2] - t[3],
                              t, tol))

    dp_phit = _d_dir(cache.f("Phi_t"), x1, x2, c, (1, 1), st.h_xi, st.order)
    t = [2.0 * d.F_hat * d.X_3 * dp_phit,
         2.0 * d.F_hat * (d.DpX3 * d.Phi_t - d.R_t * d.G_3 + xp_ * d.X_3 * d.G_t),
         d.X_3 * (d.Phi_t**2 - d.G_t**2)]
    reports.append(_mk_report("app_pTt", cache, center, t[0] - t[1] - t[2],
                              t, tol, status3))

    dm_phi3 = _d_dir(cache.f("Phi_3"), x1, x2, c, (1, -1), st.h_xi, st.order)
    t = [2.0 * d.F_hat * d.X_3 * dm_phi3,
         2.0 * d.F_hat * (d.DmX3 * d.Phi_3 - d.R_3 * d.G_t + xm_ * d.X_3 * d.G_3),
         d.X_3 * (d.Phi_3**2 - d.G_3**2)]
    reports.append(_mk_report("app_mT3", cache, center, t[0] - t[1] - t[2],
                              t, tol, status3))

    dpdm_a2 = _d_dir(cache.f("D_minus"), x1, x2, c, (1, 1), st.h_xi, st.order)
    t = [-2.0 * sig2 * dpdm_a2,
         -(6.0 * sig2 * d.X_3 * d.A2 - xm_ * d.A_plus - sig2 * xp_ * d.A_minus)]
    reports.append(_mk_report("app_DDA", cache, center, t[0] - t[1], t, tol))

    dp_gt = _d_dir(cache.f("G_t"), x1, x2, c, (1, 1), st.h_xi, st.order)
    t = [d.X_3 * dp_gt, d.DpX3 * d.G_t, d.R_t * d.Phi_3, xp_ * d.X_3 * d.Phi_t]
    reports.append(_mk_report("app_pGt", cache, center, t[0] - t[1] + t[2] - t[3],
                              t, tol, status3))

    dm_g3 = _d_dir(cache.f("G_3"), x1, x2, c, (1, -1), st.h_xi, st.order)
    t = [d.X_3 * dm_g3, d.DmX3 * d.G_3, d.R_3 * d.Phi_t, xm_ * d.X_3 * d.Phi_3]
    reports.append(_mk_report("app_mG3", cache, center, t[0] - t[1] + t[2] - t[3],
                              t, tol, status3))

    # first integrals, FD route for the derivative factors
    t = [2.0 * d.F_hat * (4.0 * d.Xp_a2 + d.X_3**2), fd["phi_t"] ** 2, d.G_t**2]
    reports.append(_mk_report("app_pB", cache, center, t[0] - t[1] + t[2], t, tol))
    t = [2.0 * d.F_hat * (4.0 * d.Xm_a2 + d.X_3**2), fd["phi_3"] ** 2, d.G_3**2]
    reports.append(_mk_report("app_mB", cache, center, t[0] - t[1] + t[2], t, tol))
    t = [4.0 * (d.Xp_a2 + d.Xm_a2), d.J]
    reports.append(_mk_report("app_Bp", cache, center, t[0] - t[1], t, tol))
    t = [16.0 * sig2 * d.A2 * d.Xp_a2, d.A_plus**2, 4.0 * sig2 * fd["dp_a2"] ** 2]
    reports.append(_mk_report("app_Ap", cache, center, t[0] - t[1] + t[2], t, tol))
    t = [16.0 * d.A2 * d.Xm_a2, d.A_minus**2, 4.0 * sig2 * fd["dm_a2"] ** 2]
    reports.append(_mk_report("app_Am", cache, center, t[0] - t[1] + t[2], t, tol))
    t = [4.0 * d.A2 * d.C_a, d.A_minus * fd["dp_a2"], d.A_plus * fd["dm_a2"]]
    reports.append(_mk_report("app_Ca", cache, center, t[0] - t[1] + t[2], t, tol))
    return reports


# --------------------------------------------------------------------------
# Higher-order Toda-side equations (5th order in T): larger 2nd-order stencil
# --------------------------------------------------------------------------

def _eval_higher(cache, center, st, tol=1e-2):
    x1, x2, c = center
    if st.order != 2:
        st = HIGHER_STENCIL
    st.check_c(c)
    n = cache.n
    h, hc = st.h_xi, st.h_c
    ff = _f_field(cache)
    a0t = _a0t_field(cache, tilde=False, hc=hc)
    a0t_t = _a0t_field(cache, tilde=True, hc=hc)

    def a2t_f(a, b, cc):
        return _a2t_exact(cache.point(a, b, cc).derived, cc)

    def at2t_f(a, b, cc):
        return _a2t_exact(cache.point(a, b, cc).derived, cc, tilde=True)

    def g_f(a, b, cc):
        d = cache.point(a, b, cc).derived
        s = math.sqrt(d.sigma2)
        at_ = (1.0 + cc) / 2.0 * (d.r_t + s * d.r_3)
        return at_ - _d_dir(a0t, a, b, cc, (cc, 1.0), h, 2) / (2.0 * cc)

    def gt_f(a, b, cc):
        d = cache.point(a, b, cc).derived
        s = math.sqrt(d.sigma2)
        att = (1.0 + cc) / 2.0 * (d.r_t - s * d.r_3)
        return att - _d_dir(a0t_t, a, b, cc, (1.0, cc), h, 2) / (2.0 * cc)

    def a0_apply(f, a, b, cc):
        d1v = _d_dir(f, a, b, cc, (1, 0), h, 2)
        d2v = _d_dir(f, a, b, cc, (0, 1), h, 2)
        dcv = _d_c(f, a, b, cc, hc)
        return a * d1v + cc * cc * b * d2v - (1.0 - cc * cc) * cc * dcv

    def a0t_apply(f, a, b, cc):
        d1v = _d_dir(f, a, b, cc, (1, 0), h, 2)
        d2v = _d_dir(f, a, b, cc, (0, 1), h, 2)
        dcv = _d_c(f, a, b, cc, hc)
        return b * d2v + cc * cc * a * d1v - (1.0 - cc * cc) * cc * dcv

    reports = []

    def t1_like(eq_id, adir, a0_field, a2t_field, g_field, a0_app):
        def inner_lhs(a, b, cc):
            dirv = (1.0, cc) if adir == "A" else (cc, 1.0)
            a2f_ = _d_dir(
                lambda aa, bb, ccc: _d_dir(ff, aa, bb, ccc,
                                           (1.0, ccc) if adir == "A" else (ccc, 1.0),
                                           h, 2),
                a, b, cc, dirv, h, 2)
            af = _d_dir(ff, a, b, cc, dirv, h, 2)
            gv = g_field(a, b, cc)
            fv = ff(a, b, cc)
            return (-a2f_ - 4.0 * a0_field(a, b, cc)
                    - 4.0 * a2t_field(a, b, cc) * fv + (af * af - gv * gv) / fv)

        def inner_rhs(a, b, cc):
            a2tv = a2t_field(a, b, cc)
            return (0.5 / cc) * a2tv * a2tv + (1.0 / cc) * (
                a0_app(a0_field, a, b, cc) + 2.0 * a0_field(a, b, cc)
            )

        dir_main = (1.0, c) if adir == "A" else (c, 1.0)
        dir_dual = (c, 1.0) if adir == "A" else (1.0, c)
        lhs = _d_dir(inner_lhs, x1, x2, c, dir_main, h, 2)
        rhs = -_d_dir(inner_rhs, x1, x2, c, dir_dual, h, 2)
        reports.append(_mk_report(eq_id, cache, center, lhs - rhs, [lhs, rhs], tol))

    t1_like("app_T1", "A", a0t, a2t_f, g_f, a0_apply)
    t1_like("app_T2", "At", a0t_t, at2t_f, gt_f, a0t_apply)

    # AG0 / tAG0 need G0 = W A0 U - U A0 W (and the dual)
    u_f, w_f = cache.f("U"), cache.f("W")

    def g0_f(a, b, cc):
        pt = cache.point(a, b, cc)
        return pt.uw["W"] * a0_apply(u_f, a, b, cc) - pt.uw["U"] * a0_apply(w_f, a, b, cc)

    def g0t_f(a, b, cc):
        pt = cache.point(a, b, cc)
        return pt.uw["W"] * a0t_apply(u_f, a, b, cc) - pt.uw["U"] * a0t_apply(w_f, a, b, cc)

    def ag0_inner(a, b, cc):
        af = _d_dir(ff, a, b, cc, (1.0, cc), h, 2)
        gv = g_f(a, b, cc)
        return g0_f(a, b, cc) + (af * af - gv * gv) / (4.0 * ff(a, b, cc)) \
            - 2.0 * a0t(a, b, cc)

    def ag0_rhs(a, b, cc):
        a2tv = _a2t_exact(cache.point(a, b, cc).derived, cc)
        return (0.25 / cc) * a2tv * a2tv + (0.5 / cc) * (
            a0_apply(a0t, a, b, cc) + 2.0 * a0t(a, b, cc)
        )

    lhs = _d_dir(ag0_inner, x1, x2, c, (1.0, c), h, 2)
    rhs = -_d_dir(ag0_rhs, x1, x2, c, (c, 1.0), h, 2)
    reports.append(_mk_report("app_AG0", cache, center, lhs - rhs, [lhs, rhs], tol))

    def tag0_inner(a, b, cc):
        atf = _d_dir(ff, a, b, cc, (cc, 1.0), h, 2)
        gtv = gt_f(a, b, cc)
        return g0t_f(a, b, cc) + (atf * atf - gtv * gtv) / (4.0 * ff(a, b, cc)) \
            - 2.0 * a0t_t(a, b, cc)

    def tag0_rhs(a, b, cc):
        at2tv = _a2t_exact(cache.point(a, b, cc).derived, cc, tilde=True)
        return (0.25 / cc) * at2tv * at2tv + (0.5 / cc) * (
            a0t_apply(a0t_t, a, b, cc) + 2.0 * a0t_t(a, b, cc)
        )

    lhs = _d_dir(tag0_inner, x1, x2, c, (c, 1.0), h, 2)
    rhs = -_d_dir(tag0_rhs, x1, x2, c, (1.0, c), h, 2)
    reports.append(_mk_report("app_tAG0", cache, center, lhs - rhs, [lhs, rhs], tol))
    return reports


# --------------------------------------------------------------------------
# Registry and drivers
# --------------------------------------------------------------------------

# id -> (group evaluator, nominal FD convergence order; 0 = FD-free)
_GROUPS = {
    "toda00": (_eval_toda00, 0),
    "cor_x": (_eval_corollary, 0),
    "thm1_00": (_eval_theorem1, 0),
    "thm1_pt": (_eval_theorem1, 2),
    "thm1_mt": (_eval_theorem1, 2),
    "thm1_ps": (_eval_theorem1, 2),
    "thm1_ms": (_eval_theorem1, 2),
    "avm": (_eval_avm, 2),
    "f4t": (_eval_f4t, 2),
    "cor_Ax": (_eval_corollary, 4),
    "cor_pm1": (_eval_corollary, 4),
    "cor_pm2": (_eval_corollary, 4),
    "cor_pm3": (_eval_corollary, 4),
    "cor_a": (_eval_corollary, 4),
    "ccom_p": (_eval_ccom, 2),
    "ccom_m": (_eval_ccom, 2),
    "fin_Axx": (_eval_final_four, 4),
    "fin_Ap2": (_eval_final_four, 4),
    "fin_Am2": (_eval_final_four, 4),
    "fin_aa": (_eval_final_four, 4),
    "fin_Px": (_eval_final_four, 4),
    "fin_Pp": (_eval_final_four, 4),
    "fin_Pa": (_eval_final_four, 4),
    "app_S": (_eval_appendix, 4),
    "app_Tt3": (_eval_appendix, 4),
    "app_pTt": (_eval_appendix, 4),
    "app_mT3": (_eval_appendix, 4),
    "app_DDA": (_eval_appendix, 4),
    "app_pGt": (_eval_appendix, 4),
    "app_mG3": (_eval_appendix, 4),
    "app_pB": (_eval_appendix, 4),
    "app_mB": (_eval_appendix, 4),
    "app_Bp": (_eval_appendix, 0),
    "app_Ap": (_eval_appendix, 4),
    "app_Am": (_eval_appendix, 4),
    "app_Ca": (_eval_appendix, 4),
    "app_T1": (_eval_higher, 2),
    "app_T2": (_eval_higher, 2),
    "app_AG0": (_eval_higher, 2),
    "app_tAG0": (_eval_higher, 2),
}

HIGHER_ORDER_IDS = ["app_T1", "app_T2", "app_AG0", "app_tAG0"]
EQUATION_IDS = [k for k in _GROUPS if k not in HIGHER_ORDER_IDS]


def nominal_order(eq_id: str) -> int:
    return _GROUPS[eq_id][1]


def evaluate(cache, center, stencil=None, ids=None, include_higher=False):
    """Evaluate residual reports for the requested equation ids."""
    st = stencil or DEFAULT_STENCIL
    if ids is None:
        ids = list(EQUATION_IDS) + (HIGHER_ORDER_IDS if include_higher else [])
    unknown = [i for i in ids if i not in _GROUPS]
    if unknown:
        raise ValueError(f"unknown equation ids: {unknown}")
    wanted = set(ids)
    seen_groups = []
    reports = []
    for eq in ids:
        fn = _GROUPS[eq][0]
        if fn in seen_groups:
            continue
        seen_groups.append(fn)
        reports.extend(r for r in fn(cache, center, st) if r.equation in wanted)
    order = {eq: k for k, eq in enumerate(ids)}
    reports.sort(key=lambda r: order[r.equation])
    return reports


def richardson(cache, center, eq_id, stencil=None, factors=(8.0, 4.0, 2.0),
               floor=1e-10, slope_tol=0.2):
    """Step-halving convergence diagnostic for one equation.

    Residuals are measured on a ladder of stencils scaled by `factors`; the
    observed slope log2(res(2h)/res(h)) is compared against the stencil's
    nominal order.  Pairs whose residuals sit below `floor` (relative) are
    noise-dominated and skipped; if no pair is measurable the equation is
    already at the quadrature floor, which satisfies the requirement
    vacuously (status 'floor').
    """
    st = stencil or DEFAULT_STENCIL
    order = nominal_order(eq_id)
    rels = []
    for f in factors:
        # scale only the step whose truncation order is being measured:
        # h_c for the 2nd-order (coupling) stencils, h_xi for the 4th-order
        # endpoint stencils.
        if order == 2:
            sc = Stencil(h_xi=st.h_xi, h_c=f * st.h_c, order=st.order)
        elif order == 4:
            sc = Stencil(h_xi=f * st.h_xi, h_c=st.h_c, order=st.order)
        else:
            sc = st
        rep = evaluate(cache, center, sc, ids=[eq_id])[0]
        if rep.status != "ok":
            return {"equation": eq_id, "status": rep.status, "order": order,
                    "relatives": [], "slopes": [], "ok": True}
        rels.append(rep.relative)
    slopes = []
    for a, b, fa, fb in zip(rels[:-1], rels[1:], factors[:-1], factors[1:]):
        if a > floor and b > floor:
            slopes.append(math.log(a / b, fa / fb))
    if order == 0 or not slopes:
        status = "floor" if not slopes or order == 0 else "ok"
        return {"equation": eq_id, "status": status, "order": order,
                "relatives": rels, "slopes": slopes, "ok": True}
    ok = any(abs(s - order) <= slope_tol * order for s in slopes)
    return {"equation": eq_id, "status": "ok", "order": order,
            "relatives": rels, "slopes": slopes, "ok": ok}


# --------------------------------------------------------------------------
# Grouped-operation wrappers
# --------------------------------------------------------------------------

def residual_boundary_toda(cache, center, stencil=None):
    return evaluate(cache, center, stencil, ids=["toda00"])[0]


def residual_theorem1(cache, center, stencil=None):
    return evaluate(cache, center, stencil,
                    ids=["thm1_00", "thm1_pt", "thm1_mt", "thm1_ps", "thm1_ms"])


def residual_avm(cache, center, stencil=None):
    return evaluate(cache, center, stencil, ids=["avm"])[0]


def residual_f4t(cache, center, stencil=None):
    return evaluate(cache, center, stencil, ids=["f4t"])[0]


def residual_corollary_main(cache, center, stencil=None):
    return evaluate(cache, center, stencil,
                    ids=["cor_x", "cor_Ax", "cor_pm1", "cor_pm2", "cor_pm3", "cor_a"])


def residual_ccom(cache, center, stencil=None):
    return evaluate(cache, center, stencil, ids=["ccom_p", "ccom_m"])


def residual_final_four(cache, center, stencil=None):
    return evaluate(cache, center, stencil,
                    ids=["fin_Axx", "fin_Ap2", "fin_Am2", "fin_aa",
                         "fin_Px", "fin_Pp", "fin_Pa"])


def residual_appendix(cache, center, stencil=None, include_higher=False):
    ids = [i for i in EQUATION_IDS if i.startswith("app_")]
    if include_higher:
        ids += HIGHER_ORDER_IDS
    return evaluate(cache, center, stencil, ids=ids, include_higher=include_higher)


def painleve_boundary_check(n, xi1, c, m=64, xi2=12.0, stencil=None):
    """One-matrix boundary behavior at xi2 -> +inf.

    The coupled composites P_t, P_3, P_x (third-order system) and P_x, the
    normalized P_plus (final system) all converge to the one-matrix
    Painleve IV combination; each is compared, at the one-matrix scale,
    against an independent scalar-kernel evaluation.
    """
    st = stencil or DEFAULT_STENCIL
    cache = PointCache(n, m)
    center = (xi1, xi2, c)
    d = cache.point(*center).derived
    fd = _fd_thirds(cache, center, st)
    p1_res, p1_scale = painleve_iv_residual(n, xi1, m)

    p_t = fd["phi_t"] ** 2 - d.F_hat * (2.0 * d.X_3**2 + d.J) - d.G_t**2
    p_3 = fd["phi_3"] ** 2 - d.F_hat * (2.0 * d.X_3**2 + d.J) - d.G_3**2
    p_x = fd["phi_t"] * fd["phi_3"] - 2.0 * d.X_t * d.X_3 * d.F_hat - d.G_t * d.G_3
    comp = final_composites(
        phi_t=fd["phi_t"], phi_3=fd["phi_3"], dp_a2=fd["dp_a2"], dm_a2=fd["dm_a2"],
        x_t=d.X_t, x_3=d.X_3, a2=d.A2, f_hat=d.F_hat, j=d.J,
        h_t=d.H_t, h_3=d.H_3, sigma2=d.sigma2,
    )
    p_plus_norm = comp["P_plus"] / (comp["F_t"] + comp["F_3"])
    out = {"one_matrix": p1_res / p1_scale, "scale": p1_scale}
    for name, val in (("P_t", p_t), ("P_3", p_3), ("P_x", p_x),
                      ("final_Px", comp["P_x"]), ("final_Pplus", p_plus_norm)):
        out[name] = val / p1_scale
        out[name + "_gap"] = abs(val - p1_res) / p1_scale
    rep = evaluate(cache, center, st, ids=["avm"])[0]
    out["avm_relative"] = rep.relative if rep.status == "ok" else 0.0
    out["avm_residual"] = rep.residual
    out["avm_scale"] = rep.scale
    return out
