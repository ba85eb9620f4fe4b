import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypwave.errors import NearCharacteristic, SpacelikeSeparation
from hypwave.fields import (CharPolynomial, DAlembertField, Profile, ScalarField, c_field,
                            constant_field, coordinate_field, dalembert, fd_wave_op, log_r_field,
                            manufactured, mixed_parameter, parse_poly, random_dalembert,
                            wave_operator)
from hypwave.geom import DependenceConfig
from hypwave.hypcore import HPoint


def plain(fn):
    """A field with no analytic derivatives, forcing finite differences."""
    return ScalarField(fn)


def test_wave_operator_trivial_examples():
    P = HPoint(0.7, -0.3)
    assert wave_operator(plain(lambda x, y: (x + y) ** 2), P) == pytest.approx(0.0, abs=1e-6)
    assert wave_operator(plain(lambda x, y: x * x + y * y), P) == pytest.approx(0.0, abs=1e-6)
    assert wave_operator(plain(lambda x, y: x * x), P) == pytest.approx(2.0, abs=1e-6)
    with pytest.raises(ValueError):
        wave_operator(plain(lambda x, y: x), P, h=0.0)


def test_mixed_parameter_examples():
    x, y = coordinate_field("x"), coordinate_field("y")
    P = HPoint(1.5, 0.0)
    assert mixed_parameter(x, x, P) == pytest.approx(1.0)
    assert mixed_parameter(x, y, P) == pytest.approx(0.0)
    assert mixed_parameter(log_r_field(HPoint(1, 0)), x, P) == pytest.approx(2.0)
    # finite-difference route agrees with the analytic one
    assert mixed_parameter(plain(lambda x, y: 0.5 * np.log((x - 1) ** 2 - y ** 2)),
                           plain(lambda x, y: x), P) == pytest.approx(2.0, rel=1e-7)


def test_log_r_examples():
    lr = log_r_field(HPoint(1, 0))
    assert lr.at(HPoint(2, 0)) == 0.0
    P = HPoint(2 * math.cosh(0.5), 2 * math.sinh(0.5))
    assert lr.at(P) == pytest.approx(math.log(0.69964), abs=1e-5)
    assert lr.at(P) == pytest.approx(-0.35719, abs=1e-5)
    lr_plain = plain(lr.eval)
    lr_plain.cones = lr.cones
    assert wave_operator(lr_plain, HPoint(1.8, 0.3)) == pytest.approx(0.0, abs=1e-5)
    with pytest.raises(SpacelikeSeparation):
        lr.at(HPoint(1.0, 2.0))


def test_near_characteristic_refused():
    lr = plain(log_r_field(HPoint(1, 0)).eval)
    lr.cones = (HPoint(1, 0),)
    with pytest.raises(NearCharacteristic):
        fd_wave_op(lr, 1.5, 0.5 - 5e-4)


def test_c_field_properties():
    cfg = DependenceConfig.build(HPoint(1.0, 0.0), 2.0)
    C = c_field(cfg)
    phi = np.linspace(-0.6, 0.6, 7)
    np.testing.assert_allclose(C(2 * np.cosh(phi), 2 * np.sinh(phi)), 0.0, atol=1e-12)
    fd = plain(C.eval)
    fd.cones = C.cones
    assert wave_operator(fd, HPoint(1.7, 0.2)) == pytest.approx(0.0, abs=1e-5)


def test_dalembert_example():
    u = dalembert(Profile.monomial(2, var="s"), Profile.monomial(3, var="t"))
    assert u.at(HPoint(1.25, 0.75)) == pytest.approx(4.125)
    assert u.wave_op(0.3, 0.1) == 0.0
    z = dalembert(Profile.zero(), Profile.zero())
    assert z.at(HPoint(3.0, 1.0)) == 0.0


def test_manufactured_st():
    u, f = manufactured(CharPolynomial.parse("s*t"))
    xs = np.array([0.3, 1.7, 2.5])
    np.testing.assert_allclose(f(xs, 0.2 * xs), 4.0)
    _, f_fd = manufactured(plain(lambda x, y: (x + y) * (x - y)))
    assert float(f_fd(1.2, 0.4)) == pytest.approx(4.0, abs=1e-6)


def test_profile_monomial_bounds():
    Profile.monomial(6)
    with pytest.raises(ValueError):
        Profile.monomial(7)


def test_profiles_exp_sin_derivatives():
    for prof in (Profile.exp(0.7), Profile.sin(1.3)):
        z, h = 0.4, 1e-5
        assert prof.d1(z) == pytest.approx((prof(z + h) - prof(z - h)) / (2 * h), rel=1e-8)
        assert prof.d2(z) == pytest.approx((prof.d1(z + h) - prof.d1(z - h)) / (2 * h), rel=1e-8)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 31), st.floats(-2, 2), st.floats(-2, 2))
def test_dalembert_fd_wave_op_vanishes(seed, x, y):
    u = random_dalembert(np.random.default_rng(seed), degree=4)
    fd = plain(u.eval)
    scale = 1 + np.max(np.abs(u.F.value.coef)) + np.max(np.abs(u.G.value.coef))
    assert abs(float(fd_wave_op(fd, x, y, 1e-3))) <= 1e-4 * scale * (1 + abs(x) + abs(y)) ** 4


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 31), st.floats(-2, 2), st.floats(-2, 2))
def test_analytic_gradient_matches_fd(seed, x, y):
    rng = np.random.default_rng(seed)
    C = rng.standard_normal((4, 4))
    u = CharPolynomial(C)
    gx, gy = u.gradient(x, y)
    fx, fy = plain(u.eval).gradient(x, y, 1e-5)
    scale = np.abs(C).sum() * (1 + abs(x) + abs(y)) ** 6
    assert float(gx) == pytest.approx(float(fx), abs=1e-7 * scale)
    assert float(gy) == pytest.approx(float(fy), abs=1e-7 * scale)
    assert float(u.wave_op(x, y)) == pytest.approx(float(fd_wave_op(plain(u.eval), x, y, 1e-3)),
                                                   abs=1e-4 * scale)


def test_parse_poly():
    np.testing.assert_array_equal(parse_poly("s^2"), [[0.0], [0.0], [1.0]])
    np.testing.assert_array_equal(parse_poly("t^3"), [[0, 0, 0, 1.0]])
    C = parse_poly("2*s*t - 0.5 + -t")
    assert C[1, 1] == 2.0 and C[0, 0] == -0.5 and C[0, 1] == -1.0
    # x = (s + t)/2, y = (s - t)/2
    X = CharPolynomial.parse("x^2 - y^2")
    assert X.at(HPoint(1.3, 0.4)) == pytest.approx(1.3 ** 2 - 0.4 ** 2)
    assert X.is_dalembert() is False
    for bad in ("", "s^", "s + + ", "s^1.5", "3 s", "s % t", "*s"):
        with pytest.raises(ValueError):
            parse_poly(bad)


def test_char_polynomial_profiles():
    u = CharPolynomial.parse("1 + s^2 + t^3")
    F, G = u.profiles()
    assert F(2.0) + G(0.5) == pytest.approx(u.at(HPoint(1.25, 0.75)))
    with pytest.raises(ValueError):
        CharPolynomial.parse("s*t").profiles()


def test_coordinate_fields():
    x, y = coordinate_field("x"), coordinate_field("y")
    assert x.at(HPoint(1.3, -0.4)) == pytest.approx(1.3)
    assert y.at(HPoint(1.3, -0.4)) == pytest.approx(-0.4)
    with pytest.raises(ValueError):
        coordinate_field("z")


def test_field_algebra_and_rotation():
    a = CharPolynomial.parse("s^2")
    b = constant_field(3.0)
    assert (a + b).at(HPoint(1.0, 0.5)) == pytest.approx(1.5 ** 2 + 3)
    assert a.scaled(2.0).at(HPoint(1.0, 0.5)) == pytest.approx(2 * 1.5 ** 2)
    mu = 0.4
    r = CharPolynomial.parse("s^2*t").rotated(mu)
    P = HPoint(1.1, 0.3)
    # rotation scales s by e^mu and t by e^-mu
    assert r.at(P) == pytest.approx((P.s * math.exp(-mu)) ** 2 * (P.t * math.exp(mu)))
    gx, gy = r.gradient(P.x, P.y)
    fx, fy = plain(r.eval).gradient(P.x, P.y, 1e-6)
    assert (float(gx), float(gy)) == pytest.approx((float(fx), float(fy)), rel=1e-7)
    assert float(r.wave_op(P.x, P.y)) == pytest.approx(
        float(fd_wave_op(plain(r.eval), P.x, P.y, 1e-3)), rel=1e-5)


def test_fields_broadcast():
    u = constant_field(2.0)
    assert u(np.zeros(3), 0.0).shape == (3,)
    assert CharPolynomial.parse("s")(np.zeros((2, 2)), 1.0).shape == (2, 2)
