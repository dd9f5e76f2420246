from fractions import Fraction
from math import pi

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vconv.bump import BumpFunction, Convolution, ball_moment, polynomial_bump
from vconv.quadrature import ball_rule, box_rule, gauss_legendre

F = Fraction


def quad(phi, order=24, extra=None):
    X, W = phi.quadrature(order)
    vals = phi(X) if extra is None else phi(X) * extra(X)
    return complex(np.sum(W * vals))


def test_gauss_legendre_integrates_polynomials():
    x, w = gauss_legendre(5, 0.0, 2.0)
    for d in range(10):
        assert np.sum(w * x**d) == pytest.approx(2.0 ** (d + 1) / (d + 1), rel=1e-13)
    with pytest.raises(ValueError):
        gauss_legendre(0)


def test_box_and_ball_rules_measure_volume():
    _, W = box_rule([0, -1], [2, 3], 4)
    assert np.sum(W) == pytest.approx(8.0)
    for n, vol in ((1, 2.0), (2, pi), (3, 4 * pi / 3)):
        _, W = ball_rule(np.zeros(n), 1.0, 8)
        assert np.sum(W) == pytest.approx(vol, rel=1e-12)
    with pytest.raises(ValueError):
        box_rule([0], [0], 3)


def test_ball_moment_values():
    # int_{-1}^{1} (1 - y^2)^2 dy = 16/15 ; int over the unit disc of 1 = pi
    assert ball_moment((0,), 2) == F(16, 15)
    assert ball_moment((0, 0), 0) == 1
    assert ball_moment((1, 0), 3) == 0


@pytest.mark.parametrize("n", [1, 2, 3])
def test_exact_moments_match_quadrature(n):
    phi = polynomial_bump([F(1, 3)] + [F(-1, 5)] * (n - 1), F(3, 4), 3, "1+x[1]-x[" + str(n) + "]^2")
    for gamma_ in [(0,) * n, (1,) + (0,) * (n - 1), (2,) * n, tuple(range(n))]:
        mono = lambda X, g=gamma_: np.prod(X ** np.array(g), axis=1)
        assert phi.moment(gamma_) == pytest.approx(quad(phi, 24, mono), rel=1e-11, abs=1e-14)


def test_derivative_matches_finite_difference():
    phi = polynomial_bump([F(0), F(1, 4)], 1, 4, "2+x[1]*x[2]")
    d = phi.derivative([1, 1])
    x = np.array([[0.2, 0.1]])
    h = 1e-4
    fd = (phi(x + [h, h]) - phi(x + [h, -h]) - phi(x + [-h, h]) + phi(x + [-h, -h])) / (4 * h * h)
    assert d(x)[0] == pytest.approx(fd[0], rel=1e-6)


def test_derivative_kills_low_moments():
    # moments below |alpha| vanish; moment alpha equals (-1)^|alpha| alpha! * integral
    psi = polynomial_bump([F(1, 5)], 1, 7, "1+x[1]")
    for d in range(4):
        phi = psi.derivative([d])
        for m in range(d):
            assert phi.moment_exact((m,)) == 0
        fact = 1
        for j in range(2, d + 1):
            fact *= j
        assert phi.moment_exact((d,)) == (-1) ** d * fact * psi.moment_exact((0,))


def test_translate_and_reflect():
    phi = polynomial_bump([F(1, 2)], 1, 3, "1+x[1]")
    x = np.array([[0.3], [0.9], [-0.2]])
    assert np.allclose(phi.translate([F(1, 4)])(x), phi(x - 0.25))
    assert np.allclose(phi.reflect()(x), phi(-x))
    assert phi.value_exact([F(1, 2)]) == F(3, 2)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_fourier_closed_form_matches_quadrature(n):
    phi = polynomial_bump([F(1, 4)] + [F(0)] * (n - 1), 1, 4, "1+x[1]^2")
    rng = np.random.default_rng(n)
    xi = rng.standard_normal((3, n)) * 3 + 0.5j * rng.standard_normal((3, n))
    closed = phi.fourier(xi)
    for i in range(3):
        X, W = phi.quadrature(24, float(np.linalg.norm(xi[i])))
        num = np.sum(W * phi(X) * np.exp(-1j * X @ xi[i]))
        assert closed[i] == pytest.approx(num, rel=1e-10, abs=1e-13)


def test_fourier_at_zero_is_integral():
    phi = polynomial_bump([F(0), F(0)], 2, 3, "1")
    assert phi.fourier(np.zeros((1, 2)))[0] == pytest.approx(phi.integral())


def test_serialization_round_trip():
    phi = polynomial_bump([F(1, 3), F(0)], F(5, 4), 3, "1+x[2]").derivative([1, 0])
    back = BumpFunction.from_dict(phi.to_dict())
    X = np.array([[0.1, 0.2], [0.5, -0.3]])
    assert np.allclose(back(X), phi(X))
    assert back.spec["alpha"] == [1, 0]


def test_convolution_moments_and_support():
    a = polynomial_bump([F(1, 2)], 1, 3, "1")
    b = polynomial_bump([F(-1, 4)], F(1, 2), 4, "1+x[1]")
    c = Convolution(a, b)
    assert complex(c.integral()) == pytest.approx(complex(a.integral()) * complex(b.integral()))
    lo, hi = c.bounding_box()
    assert lo[0] == pytest.approx(-1.25) and hi[0] == pytest.approx(1.75)
    xi = np.array([[1.3 + 0.2j]])
    assert c.fourier(xi)[0] == pytest.approx(a.fourier(xi)[0] * b.fourier(xi)[0])


@given(st.integers(2, 6), st.fractions(min_value=F(1, 4), max_value=2, max_denominator=8))
def test_bump_integral_scales_with_radius(s, r):
    phi = polynomial_bump([F(0), F(0)], r, s)
    unit = polynomial_bump([F(0), F(0)], 1, s)
    assert phi.moment_exact((0, 0)) == unit.moment_exact((0, 0)) * r * r


def test_invalid_bumps_rejected():
    with pytest.raises(ValueError):
        polynomial_bump([0], 0, 3)
    with pytest.raises(ValueError):
        polynomial_bump([0], 1, -1)
    with pytest.raises(ValueError):
        polynomial_bump([0], 1, 0).derivative([1])
