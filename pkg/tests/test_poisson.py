import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sint

from conftest import KERNEL_HALF_RHO01, MEAN_X_RHO01, PHI_I, U1_ANCHOR, random_cfg
from hypwave.errors import ExtrapolationUnstable, RhoTooLarge
from hypwave.fields import (CharPolynomial, constant_field, coordinate_field, random_dalembert)
from hypwave.geom import DependenceConfig
from hypwave.hypcore import HPoint, hrotate
from hypwave.poisson import (DIRECT, LimitSchedule, boundary_sum_limit, boundary_sum_trace,
                             decay_exponent, extrapolate_to_zero, final_identity,
                             finite_rho_identity, kernel, kernel_half_integral,
                             kernel_integral_closed_form, mean_limit, mean_on_I, mean_trace,
                             poisson_rhs, theta_range_ratio)

S2T3 = "s^2 + t^3"


def test_kernel_examples():
    assert kernel(2, 1, 0.0) == 3.0
    assert kernel(2, 1, 0.5) == pytest.approx(3 / (5 - 4 * math.cosh(0.5)), rel=1e-14)
    assert kernel(2, 1, 0.5) == pytest.approx(6.1288, abs=1e-4)
    assert kernel(2, 1, PHI_I) == pytest.approx(300.0, rel=1e-10)


@given(st.floats(0.5, 5), st.floats(0.05, 0.95), st.floats(-0.999, 0.999))
def test_kernel_positive_and_even(p, frac, t):
    q = frac * p
    phi = t * math.log(p / q)
    assert kernel(p, q, phi) > 0
    assert kernel(p, q, phi) == pytest.approx(kernel(p, q, -phi), rel=1e-12)


def test_kernel_closed_form_examples():
    assert kernel_integral_closed_form(2, 1, 0.0) == 0.0
    half = kernel_integral_closed_form(2, 1, PHI_I)
    assert half == pytest.approx(KERNEL_HALF_RHO01, rel=1e-12)
    assert math.atanh(3 * math.tanh(PHI_I / 2)) == pytest.approx(KERNEL_HALF_RHO01 / 2, rel=1e-12)
    assert kernel_integral_closed_form(2, 1, -0.3) == -kernel_integral_closed_form(2, 1, 0.3)
    with pytest.raises(ValueError):
        kernel_integral_closed_form(2, 1, math.log(2))
    with pytest.raises(ValueError):
        kernel_integral_closed_form(1, 2, 0.1)


def test_kernel_closed_form_vs_scipy():
    rng = np.random.default_rng(8)
    for _ in range(20):
        p = rng.uniform(0.5, 5)
        q = p * rng.uniform(0.05, 0.95)
        hi = rng.uniform(0, 0.98) * math.log(p / q)
        ref, _ = sint.quad(lambda f: kernel(p, q, f), 0, hi, epsabs=0, epsrel=1e-13, limit=200)
        assert kernel_integral_closed_form(p, q, hi) == pytest.approx(ref, rel=1e-10)


def test_kernel_half_integral_stable(cfg_axis):
    assert kernel_half_integral(2, 1, 0.1) == pytest.approx(KERNEL_HALF_RHO01, rel=1e-14)
    for rho in (1e-2, 1e-4, 1e-7):
        a = cfg_axis.rho_angles(rho)
        # equals theta_i + theta_i* (the arc ranges of I and I*)
        assert kernel_half_integral(2, 1, rho) == pytest.approx(a.theta_i + a.theta_istar, rel=1e-13)
    with pytest.raises(RhoTooLarge):
        kernel_half_integral(2, 1, 1.5)


@pytest.mark.parametrize("rho", [0.1, 0.01])
def test_rhs_methods_agree(cfg_main, rho):
    u = random_dalembert(np.random.default_rng(5), 4)
    a = poisson_rhs(u, cfg_main, rho)
    b = poisson_rhs(u, cfg_main, rho, method=DIRECT)
    assert a == pytest.approx(b, rel=1e-10)
    with pytest.raises(ValueError):
        poisson_rhs(u, cfg_main, rho, method="nope")


def test_finite_rho_examples(cfg_axis, cfg_main):
    c = finite_rho_identity(constant_field(1.0), cfg_axis, 0.1)
    assert c.lhs == pytest.approx(U1_ANCHOR, rel=1e-13)
    assert c.rhs == pytest.approx(U1_ANCHOR, rel=1e-12)
    assert c.residual <= 1e-8
    c = finite_rho_identity(CharPolynomial.parse(S2T3), cfg_main, 0.01)
    assert c.residual <= 1e-8 * (1 + abs(c.rhs))
    assert finite_rho_identity(coordinate_field("x"), cfg_axis, 0.1).residual <= 1e-8


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2 ** 31), st.sampled_from([0.5, 0.1, 1e-3, 1e-6]))
def test_finite_rho_random(seed, frac):
    rng = np.random.default_rng(seed)
    cfg = random_cfg(rng, alpha_max=1.0)
    u = random_dalembert(rng, 4)
    c = finite_rho_identity(u, cfg, frac * (cfg.p - cfg.q))
    assert c.residual <= 1e-9 * (1 + abs(c.rhs))


def test_mean_examples(cfg_axis):
    assert mean_on_I(coordinate_field("x"), cfg_axis, 0.1) == pytest.approx(MEAN_X_RHO01, rel=1e-13)
    for rho in (0.5, 0.1, 1e-4):
        assert mean_on_I(constant_field(2.5), cfg_axis, rho) == pytest.approx(2.5, rel=1e-14)
    assert mean_on_I(coordinate_field("y"), cfg_axis, 0.1) == pytest.approx(0.0, abs=1e-14)
    th = cfg_axis.rho_angles(0.1)
    starred = mean_on_I(constant_field(1.0), cfg_axis, 0.1, starred=True)
    assert starred == pytest.approx(th.theta_istar / th.theta_i, rel=1e-13)


def test_theta_range_ratio(cfg_axis):
    assert theta_range_ratio(cfg_axis, 0.1) == pytest.approx(0.796921477713219, rel=1e-12)
    ratios = [theta_range_ratio(cfg_axis, 10.0 ** -k) for k in range(1, 9)]
    assert all(b > a for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] == pytest.approx(0.964489124713607, rel=1e-10)


def test_final_identity_examples(cfg_main):
    c = final_identity(CharPolynomial.parse(S2T3), cfg_main)
    assert (c.lhs, c.rhs, c.residual) == (76.125, 76.125, 0.0)
    c = final_identity(constant_field(-1.5), cfg_main)
    assert c.lhs == c.rhs == -3.0


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_final_identity_random(seed):
    rng = np.random.default_rng(seed)
    c = final_identity(random_dalembert(rng, 4), random_cfg(rng))
    assert c.residual <= 1e-12 * (1 + abs(c.rhs))


def test_schedule_validation(cfg_axis):
    LimitSchedule((0.1, 0.01, 0.001), 2)
    for bad in [((0.1, 0.01), 2), ((0.01, 0.1, 0.001), 2), ((0.1, 0.0, -1.0), 1), ((0.1,), -1)]:
        with pytest.raises(ValueError):
            LimitSchedule(*bad)
    with pytest.raises(RhoTooLarge):
        LimitSchedule((2.0, 0.1), 1).validate_for(cfg_axis)
    assert LimitSchedule.decades(2, 5).rho_values == (1e-2, 1e-3, 1e-4, 1e-5)


def test_extrapolation():
    w = np.array([0.3, 0.2, 0.1, 0.05])
    e = extrapolate_to_zero(w, 1.5 - 2 * w + 0.5 * w ** 2, 2)
    assert e.value == pytest.approx(1.5, abs=1e-13)
    with pytest.raises(ExtrapolationUnstable):
        extrapolate_to_zero(w, np.sin(40 * w), 1, fit_tol=1e-3)
    with pytest.raises(ExtrapolationUnstable):
        extrapolate_to_zero(w, [1.0, np.nan, 2.0, 3.0], 1)
    with pytest.raises(ExtrapolationUnstable):
        extrapolate_to_zero(w[:2], [1.0, 2.0], 2)


def test_boundary_sum_limits(cfg_axis, cfg_main):
    sched = LimitSchedule.decades(3, 6)
    assert boundary_sum_limit(constant_field(1.0), cfg_axis, sched) == pytest.approx(2.0, abs=1e-4)
    assert boundary_sum_limit(coordinate_field("x"), cfg_axis, sched) == pytest.approx(5.0, abs=1e-4)
    assert boundary_sum_limit(CharPolynomial.parse(S2T3), cfg_main, sched) == pytest.approx(76.125, abs=1e-4)


def test_boundary_sum_unit_field_trace(cfg_axis):
    rows = boundary_sum_trace(constant_field(1.0), cfg_axis, LimitSchedule.decades(1, 4))
    for r in rows:
        a = cfg_axis.rho_angles(r.rho)
        assert r.value == pytest.approx(1 + a.theta_istar / a.theta_i, rel=1e-12)


def test_mean_limits(cfg_axis):
    sched = LimitSchedule.decades(2, 5)
    x = coordinate_field("x")
    assert mean_limit(x, cfg_axis, sched) == pytest.approx(1.0, abs=1e-4)
    assert mean_limit(x, cfg_axis, sched, starred=True) == pytest.approx(4.0, abs=1e-3)


def test_raw_error_decays_like_w(cfg_axis):
    rows = mean_trace(coordinate_field("x"), cfg_axis, LimitSchedule.decades(2, 8))
    slope = decay_exponent([r.w for r in rows], [r.value - 1.0 for r in rows])
    assert slope == pytest.approx(1.0, abs=0.2)
    with pytest.raises(ValueError):
        decay_exponent([0.1, 0.2], [0.0, 1.0])


def test_concurrent_trace_matches_serial(cfg_main):
    u = CharPolynomial.parse(S2T3)
    sched = LimitSchedule.decades(1, 4)
    assert boundary_sum_trace(u, cfg_main, sched, workers=4) == boundary_sum_trace(u, cfg_main, sched)


@settings(max_examples=10, deadline=None)
@given(st.floats(-1.0, 1.0), st.integers(0, 2 ** 31))
def test_rotational_covariance(mu, seed):
    rng = np.random.default_rng(seed)
    u = random_dalembert(rng, 3)
    Q = HPoint(1.0, 0.2)
    cfg = DependenceConfig.build(Q, 2.0)
    cfg_r = DependenceConfig.build(hrotate(Q, mu), 2.0)
    ur = u.rotated(mu)
    a = finite_rho_identity(u, cfg, 0.05)
    b = finite_rho_identity(ur, cfg_r, 0.05)
    assert b.lhs == pytest.approx(a.lhs, rel=1e-10, abs=1e-10)
    assert b.rhs == pytest.approx(a.rhs, rel=1e-10, abs=1e-10)
    assert abs(b.residual - a.residual) <= 1e-10 * (1 + abs(a.rhs))
    assert final_identity(ur, cfg_r).residual <= 1e-10 * (1 + abs(a.rhs))
