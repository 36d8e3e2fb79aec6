"""Warped-product geometry: model profiles, curvature, comparison bounds."""

import math

import numpy as np
import pytest

from warpspec import (
    ComparisonFailureError,
    ConfigError,
    InvalidProfileError,
    ResolutionError,
    WarpProfile,
    curvature_of_profile,
    cusp_profile,
    euclidean_profile,
    fd_derivative,
    hessian_comparison_check,
    hyperbolic_profile,
    profile_from_json,
    profile_from_shape,
    profile_to_json,
    reference_profile,
    solve_riccati_bound,
    sphere_area,
    uniform_grid,
)
from warpspec.warp_geometry import DEFAULT_STEP, MAX_GRID_STEP

# frozen from scripts/oracle_riccati.py (independent fixed-step RK4)
ORACLE_F1_AT_100 = 0.9949619252164672


def test_sphere_area_closed_forms():
    assert sphere_area(2) == pytest.approx(2.0 * math.pi, rel=1e-15)
    assert sphere_area(3) == pytest.approx(4.0 * math.pi, rel=1e-15)
    assert sphere_area(4) == pytest.approx(2.0 * math.pi**2, rel=1e-15)
    assert sphere_area(5) == pytest.approx(8.0 * math.pi**2 / 3.0, rel=1e-14)


def test_uniform_grid_spacing():
    g = uniform_grid(1.0, 20.0)
    assert g[0] == 1.0
    assert g[-1] <= 20.0 + 1e-12
    steps = np.diff(g)
    assert np.allclose(steps, steps[0], rtol=1e-12)
    assert steps[0] <= DEFAULT_STEP * (1 + 1e-12)


def test_model_profile_curvatures():
    n = 3
    hyp = hyperbolic_profile(n)
    fld = curvature_of_profile(hyp)
    assert np.allclose(fld.k_rad, -1.0, atol=1e-10)
    assert np.allclose(fld.ricci_rr, -(n - 1), atol=1e-9)
    assert np.allclose(fld.s, 1.0 / np.tanh(hyp.grid), atol=1e-10)

    euc = euclidean_profile(n)
    fld_e = curvature_of_profile(euc)
    assert np.allclose(fld_e.k_rad, 0.0, atol=1e-10)
    assert np.allclose(euc.f, euc.grid, rtol=1e-14)
    assert np.allclose(fld_e.laplacian_r, (n - 1) / euc.grid, rtol=1e-10)

    cus = cusp_profile(n)
    fld_c = curvature_of_profile(cus)
    assert np.allclose(fld_c.s, 1.0, atol=1e-14)
    assert np.allclose(fld_c.k_rad, -1.0, atol=1e-10)


@pytest.mark.parametrize(
    "make, bound",
    [
        (lambda: euclidean_profile(3), 1e-9),
        (lambda: hyperbolic_profile(3), 1e-8),
        (lambda: hyperbolic_profile(2), 1e-8),
        (lambda: cusp_profile(3), 1e-10),
        (lambda: reference_profile(3, 1.0, r_max=600.0), 1e-6),
    ],
)
def test_trace_identity_residual(make, bound):
    # d(Delta r)/dr + (n-1) S^2 + Ric_rr = 0 against finite differences
    fld = curvature_of_profile(make())
    assert fld.trace_residual <= bound


def test_fd_derivative_accuracy():
    x = uniform_grid(0.5, 30.0)
    d = fd_derivative(x, np.cos(x))
    err = np.abs(d + np.sin(x))
    assert np.max(err) < 1e-7  # one-sided stencils at the segment edges
    assert np.max(err[3:-3]) < 1e-8


def test_fd_derivative_respects_junctions():
    x = uniform_grid(0.0, 10.0, 0.05)
    c = x[100]
    y = np.where(x < c, x**2, x**2 + 3.0 * (x - c))
    d = fd_derivative(x, y, junctions=(float(c),))
    exact = np.where(x < c, 2.0 * x, 2.0 * x + 3.0)
    assert np.max(np.abs(d - exact)) < 1e-9


def test_resolution_policy():
    g = np.linspace(1.0, 20.0, 40)  # step ~ 0.49 > pi/20
    assert np.max(np.diff(g)) > MAX_GRID_STEP
    prof = profile_from_shape(
        3,
        s=lambda r: 1.0 / np.asarray(r),
        s_prime=lambda r: -1.0 / np.asarray(r) ** 2,
        grid=g,
        log_f=lambda r: np.log(np.asarray(r)),
    )
    with pytest.raises(ResolutionError):
        curvature_of_profile(prof)


def test_warp_profile_validation():
    g = uniform_grid(1.0, 5.0)
    with pytest.raises(InvalidProfileError):
        WarpProfile(
            n=3,
            kind="bad",
            params={},
            grid=g,
            f=np.zeros_like(g),  # not strictly positive
            f_prime=np.ones_like(g),
            f_second=np.zeros_like(g),
            r_max=5.0,
        )


@pytest.mark.parametrize(
    "make",
    [
        lambda: euclidean_profile(3),
        lambda: hyperbolic_profile(2, r_max=30.0),
        lambda: cusp_profile(4),
        lambda: reference_profile(3, 1.5, r_max=200.0),
    ],
)
def test_profile_json_round_trip_registered_kinds(make):
    prof = make()
    doc = profile_to_json(prof)
    assert "grid" not in doc  # closed-form kinds persist parameters only
    back = profile_from_json(doc)
    assert back.n == prof.n and back.kind == prof.kind
    assert np.array_equal(back.grid, prof.grid)
    assert np.array_equal(back.f, prof.f)
    assert back.junctions == prof.junctions


def test_profile_json_round_trip_tabulated():
    g = uniform_grid(1.0, 10.0)
    prof = profile_from_shape(
        3,
        s=lambda r: np.ones_like(np.asarray(r, dtype=float)),
        s_prime=lambda r: np.zeros_like(np.asarray(r, dtype=float)),
        grid=g,
        log_f=lambda r: np.asarray(r, dtype=float) - 1.0,
    )
    back = profile_from_json(profile_to_json(prof))
    assert np.array_equal(back.grid, prof.grid)
    assert np.array_equal(back.f, prof.f)
    assert np.array_equal(back.f_second, prof.f_second)


# ---------------------------------------------------------------- comparison


def riccati_grid(r0, r_hi=500.0):
    return uniform_grid(r0, r_hi, 0.05)


def test_riccati_constant_curvature_closed_forms():
    r0, u0 = 1.0, 2.0
    bound = solve_riccati_bound(a1=0.0, b1_half=0.0, r0=r0, upper_start=u0, grid=riccati_grid(r0, 40.0))
    t = bound.grid - r0
    f1_exact = np.tanh(t)
    c0 = 0.5 * math.log((u0 + 1.0) / (u0 - 1.0))
    f2_exact = 1.0 / np.tanh(t + c0)
    assert np.max(np.abs(bound.f1 - f1_exact)) < 1e-10
    assert np.max(np.abs(bound.f2 - f2_exact)) < 1e-10


def test_riccati_decaying_curvature_against_oracle():
    bound = solve_riccati_bound(a1=0.5, b1_half=0.5, r0=1.0, upper_start=2.0, grid=riccati_grid(1.0, 120.0))
    f1_100 = float(np.interp(100.0, bound.grid, bound.f1))
    assert f1_100 == pytest.approx(ORACLE_F1_AT_100, rel=1e-8)


def test_riccati_asymptotic_residuals():
    a1, b1h = 0.5, 0.5
    bound = solve_riccati_bound(a1=a1, b1_half=b1h, r0=1.0, upper_start=2.0, grid=riccati_grid(1.0))
    r = bound.grid
    win = (r >= 50.0) & (r <= 500.0)
    # raw r^3 |f - (1 -+ C/r)| grows linearly: each curve carries a nonzero
    # 1/r^2 term, so boundedness is certified against a linear envelope
    for key, coef in (("f1", 0.5 * a1 * (1.0 + a1)), ("f2", 0.5 * b1h * (1.0 - b1h))):
        raw = bound.asymptotic_residuals[key][win]
        assert np.all(raw <= coef * r[win] * 1.25 + 5.0)
    # subtracting the second-order coefficient leaves a genuinely bounded tail
    corr1 = r**3 * np.abs(bound.f1 - (1.0 - a1 / r - 0.5 * a1 * (1.0 + a1) / r**2))
    corr2 = r**3 * np.abs(bound.f2 - (1.0 + b1h / r + 0.5 * b1h * (1.0 - b1h) / r**2))
    assert np.max(corr1[win]) < 1.0
    assert np.max(corr2[win]) < 1.0


def test_riccati_blow_up_reported():
    with pytest.raises(ComparisonFailureError) as exc:
        solve_riccati_bound(a1=0.0, b1_half=0.0, r0=1.0, upper_start=-1.5, grid=riccati_grid(1.0, 60.0))
    assert exc.value.blow_up_radius is not None
    assert exc.value.blow_up_radius > 1.0


def test_riccati_rejects_bad_inputs():
    with pytest.raises(ConfigError):
        solve_riccati_bound(a1=-0.1, b1_half=0.0, r0=1.0, upper_start=2.0, grid=riccati_grid(1.0, 10.0))
    with pytest.raises(ConfigError):
        # upper curvature bound positive at r0: need r0 >= 2 A1
        solve_riccati_bound(a1=2.0, b1_half=0.0, r0=1.0, upper_start=2.0, grid=riccati_grid(1.0, 10.0))


def test_hessian_comparison_hyperbolic_inside():
    # S = coth r lies strictly between the a1 = 0 lower curve and the
    # b1 > 0 upper curve started above S(r0)
    prof = hyperbolic_profile(3, r_min=0.5, r_max=40.0)
    u0 = float(prof.s_values[0])
    bound = solve_riccati_bound(a1=0.0, b1_half=0.2, r0=0.5, upper_start=u0 + 0.2, grid=riccati_grid(0.5, 40.0))
    rep = hessian_comparison_check(prof, bound, tol=1e-7)
    assert rep.ok
    assert rep.max_lower_gap <= 1e-7 and rep.max_upper_gap <= 1e-7


def test_hessian_comparison_flags_violation():
    prof = euclidean_profile(3, r_min=0.5, r_max=40.0)  # S = 1/r decays below tanh
    u0 = float(prof.s_values[0])
    bound = solve_riccati_bound(a1=0.0, b1_half=0.0, r0=0.5, upper_start=u0, grid=riccati_grid(0.5, 40.0))
    rep = hessian_comparison_check(prof, bound)
    assert not rep.ok
    assert rep.which == "lower"
    assert rep.first_violation_radius is not None and rep.first_violation_radius > 0.5
