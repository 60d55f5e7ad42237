import json
import math

import pytest

from coupled_gue.residuals import (
    DEFAULT_STENCIL,
    EQUATION_IDS,
    HIGHER_ORDER_IDS,
    PointCache,
    Stencil,
    evaluate,
    painleve_boundary_check,
    residual_appendix,
    residual_avm,
    residual_boundary_toda,
    residual_ccom,
    residual_corollary_main,
    residual_f4t,
    residual_final_four,
    residual_theorem1,
    richardson,
)

CENTER = (0.0, 0.3, 0.5)


@pytest.fixture(scope="module")
def cache():
    return PointCache(2, 64)


def test_all_default_equations_pass(cache):
    reports = evaluate(cache, CENTER)
    assert len(reports) == len(EQUATION_IDS)
    for r in reports:
        assert r.status == "ok", r.equation
        assert r.passed, (r.equation, r.relative)


def test_fd_free_residuals_independent_of_stencil(cache):
    for eq in ("toda00", "app_Bp"):
        vals = [
            evaluate(cache, CENTER, Stencil(h_xi=h, h_c=1e-3, order=4), ids=[eq])[0]
            for h in (5e-3, 2e-2)
        ]
        assert vals[0].residual == vals[1].residual


def test_boundary_toda_trivial_limit(cache):
    rep = residual_boundary_toda(cache, (12.0, 12.0, 0.5))
    assert rep.relative <= 1e-9


def test_boundary_toda_convergence_with_quadrature():
    # residual drops with m until the working-precision floor
    c32 = PointCache(2, 32)
    c64 = PointCache(2, 64)
    r32 = residual_boundary_toda(c32, CENTER)
    r64 = residual_boundary_toda(c64, CENTER)
    assert r64.relative <= max(r32.relative, 1e-13)
    assert r64.relative <= 1e-6


def test_theorem1_reports(cache):
    reports = residual_theorem1(cache, CENTER)
    assert [r.equation for r in reports] == [
        "thm1_00", "thm1_pt", "thm1_mt", "thm1_ps", "thm1_ms"
    ]
    for r in reports:
        assert r.relative <= 1e-5, (r.equation, r.relative)


def test_theorem1_one_matrix_limit(cache):
    # xi2 -> +inf reduces the system to the single-matrix equations
    for r in residual_theorem1(cache, (0.0, 12.0, 0.5)):
        assert r.relative <= 1e-5, (r.equation, r.relative)


def test_theorem1_c_step_halving(cache):
    info = richardson(cache, CENTER, "thm1_pt")
    assert info["ok"]
    assert any(abs(s - 2.0) <= 0.4 for s in info["slopes"])


def test_theorem1_stencil_c_guard(cache):
    with pytest.raises(ValueError):
        residual_theorem1(cache, (0.0, 0.3, 0.0015))


def test_avm_generic_point(cache):
    rep = residual_avm(cache, CENTER)
    assert rep.status == "ok"
    assert rep.relative <= 1e-4
    assert abs(rep.extras["F"]) > 1e-3  # denominator bounded away from zero


def test_avm_trivial_in_one_matrix_limit(cache):
    rep = residual_avm(cache, (0.0, 12.0, 0.5))
    assert rep.relative <= 1e-8


def test_f4t_generic_and_cross_formalism(cache):
    rep = residual_f4t(cache, CENTER)
    assert rep.relative <= 1e-4
    # Toda-route evaluation equals the 2Fhat*(Tt3) - (x) combination of the
    # matrix-kernel route after the /64 rescaling
    assert abs(rep.extras["combo_diff"]) <= 1e-5 * rep.scale


def test_f4t_trivial_at_infinity(cache):
    rep = residual_f4t(cache, (12.0, 12.0, 0.5))
    assert abs(rep.residual) <= 1e-10


def test_corollary_main_reports(cache):
    reports = residual_corollary_main(cache, CENTER)
    ids = [r.equation for r in reports]
    assert ids == ["cor_x", "cor_Ax", "cor_pm1", "cor_pm2", "cor_pm3", "cor_a"]
    assert reports[0].relative <= 1e-7  # (x) is FD-free
    for r in reports[1:]:
        assert r.relative <= 1e-5


def test_corollary_x_degenerate_on_diagonal(cache):
    # X_3 vanishes on xi1 = xi2; the check must be skipped, not failed
    reports = residual_corollary_main(cache, (0.2, 0.2, 0.5))
    by_id = {r.equation: r for r in reports}
    assert by_id["cor_x"].status == "degenerate"
    assert by_id["cor_x"].passed is None


def test_ccom_pair(cache):
    for c in (0.3, 0.5, 0.7):
        for rep in residual_ccom(cache, (0.3, -0.2, c)):
            assert rep.relative <= 1e-5, (rep.equation, c, rep.relative)


def test_ccom_trivial_limit(cache):
    for rep in residual_ccom(cache, (12.0, 12.0, 0.5)):
        assert rep.status == "degenerate" or abs(rep.residual) <= 1e-9


def test_ccom_a_pm_correspondences(cache):
    # A+ = 4((1-c^2) dc r_t - xi_+ sigma^2 A^2);
    # A- = -4((1-c^2) dc r_3 + xi_- A^2)
    x1, x2, c = CENTER
    d = cache.point(*CENTER).derived
    hc = 1e-3
    dcrt = (cache.point(x1, x2, c + hc).derived.r_t
            - cache.point(x1, x2, c - hc).derived.r_t) / (2 * hc)
    dcr3 = (cache.point(x1, x2, c + hc).derived.r_3
            - cache.point(x1, x2, c - hc).derived.r_3) / (2 * hc)
    ap = 4.0 * ((1 - c * c) * dcrt - (x1 + x2) * d.sigma2 * d.A2)
    am = -4.0 * ((1 - c * c) * dcr3 + (x1 - x2) * d.A2)
    assert abs(d.A_plus - ap) <= 1e-5 * max(1.0, abs(d.A_plus))
    assert abs(d.A_minus - am) <= 1e-5 * max(1.0, abs(d.A_minus))


def test_final_four_reports(cache):
    reports = residual_final_four(cache, CENTER)
    assert [r.equation for r in reports] == [
        "fin_Axx", "fin_Ap2", "fin_Am2", "fin_aa", "fin_Px", "fin_Pp", "fin_Pa"
    ]
    for r in reports:
        assert r.relative <= 1e-5, (r.equation, r.relative)


def test_final_four_degenerate_guard(cache):
    # at xi2 -> inf, Delta -> 0: the one-matrix degeneration is skipped
    reports = residual_final_four(cache, (0.0, 12.0, 0.5))
    assert all(r.status == "degenerate" for r in reports)


def test_appendix_reports(cache):
    reports = residual_appendix(cache, CENTER)
    for r in reports:
        assert r.relative <= 1e-4, (r.equation, r.relative)


def test_higher_order_equations(cache):
    reports = evaluate(cache, CENTER, ids=HIGHER_ORDER_IDS, include_higher=True)
    for r in reports:
        assert r.relative <= 1e-2, (r.equation, r.relative)


def test_richardson_fourth_order(cache):
    for eq in ("cor_Ax", "app_S", "fin_Px"):
        info = richardson(cache, CENTER, eq)
        assert info["ok"], info
        assert any(abs(s - 4.0) <= 0.8 for s in info["slopes"])


def test_appendix_c_reduction_identity(cache):
    # D+ applied to the (x) expression equals
    # D- X_t * (+Tt expression) + 2 Fhat X_3 D+ X_t * (Tt3 expression)
    # modulo lower-order residual noise.
    x1, x2, c = CENTER
    st = DEFAULT_STENCIL
    h = st.h_xi
    coef = [(1.0 / 12, -2), (-2.0 / 3, -1), (2.0 / 3, 1), (-1.0 / 12, 2)]

    def x_expr(a, b):
        d = cache.point(a, b, c).derived
        return d.Phi_t * d.Phi_3 - 2.0 * d.X_t * d.X_3 * d.F_hat - d.G_t * d.G_3

    dp_x_expr = sum(w * x_expr(x1 + o * h, x2 + o * h) for w, o in coef) / h

    d = cache.point(*CENTER).derived

    def dfield(name, direction):
        f = cache.f(name)
        return sum(w * f(x1 + o * h * direction[0], x2 + o * h * direction[1], c)
                   for w, o in coef) / h

    ptt_expr = (2.0 * d.F_hat * d.X_3 * dfield("Phi_t", (1, 1))
                - 2.0 * d.F_hat * (d.DpX3 * d.Phi_t - d.R_t * d.G_3
                                   + (x1 + x2) * d.X_3 * d.G_t)
                - d.X_3 * (d.Phi_t**2 - d.G_t**2))
    tt3_expr = (dfield("Phi_3", (1, 1)) - (x1 - x2) * d.G_t - (x1 + x2) * d.G_3
                - d.X_3 * (3.0 * d.X_t - 8.0 * cache.n))
    # expressions enter at senior-term-normalization: (+Tt)/(2 Fhat X_3)
    # carries unit coefficient on D+ Phi_t, (Tt3) on D+ Phi_3
    combo = (d.Phi_3 * ptt_expr / (2.0 * d.F_hat * d.X_3)
             + d.Phi_t * tt3_expr)
    scale = max(abs(d.Phi_t * d.Phi_3), abs(2.0 * d.F_hat * d.X_t * d.X_3), 1.0)
    assert abs(dp_x_expr - combo) <= 1e-3 * scale


def test_pa_over_delta_vanishes_in_tail(cache):
    # |A^2 P_a / Delta| -> 0 monotonically as xi2 grows
    from coupled_gue.observables import final_composites
    from coupled_gue.residuals import _fd_thirds

    prev = math.inf
    for x2 in (1.5, 2.5, 3.5, 4.5):
        center = (0.0, x2, 0.5)
        d = cache.point(*center).derived
        fd = _fd_thirds(cache, center, DEFAULT_STENCIL)
        comp = final_composites(
            phi_t=fd["phi_t"], phi_3=fd["phi_3"], dp_a2=fd["dp_a2"],
            dm_a2=fd["dm_a2"], x_t=d.X_t, x_3=d.X_3, a2=d.A2,
            f_hat=d.F_hat, j=d.J, h_t=d.H_t, h_3=d.H_3, sigma2=d.sigma2,
        )
        ratio = abs(d.A2 * comp["P_a"] / comp["Delta"])
        assert ratio < prev
        prev = ratio
    assert prev < 1e-12


def test_report_serialization(cache):
    rep = residual_boundary_toda(cache, CENTER)
    blob = json.dumps(rep.to_dict(), sort_keys=True)
    back = json.loads(blob)
    for key in ("equation", "center", "residual", "scale", "relative",
                "tolerance", "passed"):
        assert key in back


def test_unknown_equation_id(cache):
    with pytest.raises(ValueError):
        evaluate(cache, CENTER, ids=["nope"])


def test_painleve_boundary(cache):
    out = painleve_boundary_check(2, 0.0, 0.5)
    assert abs(out["one_matrix"]) <= 1e-5
    for name in ("P_t", "P_3", "P_x", "final_Px", "final_Pplus"):
        assert out[name + "_gap"] <= 1e-5, name
    assert out["avm_relative"] <= 1e-8


def test_stencil_validation():
    with pytest.raises(ValueError):
        Stencil(h_xi=0.0)
    with pytest.raises(ValueError):
        Stencil(order=3)
    Stencil().check_c(0.5)
    with pytest.raises(ValueError):
        Stencil(h_c=0.3).check_c(0.5)
