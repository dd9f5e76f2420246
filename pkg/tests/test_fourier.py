from fractions import Fraction
from math import factorial

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vconv.bump import BumpFunction, polynomial_bump, x_polynomial
from vconv.fourier import (
    FourierPoint,
    SupportBody,
    f_prefactor,
    f_transform,
    fourier_closed_form,
    fourier_gw,
    from_f_transform,
    gram_ratio_check,
    prescribe_moments,
    pws_envelope,
    series_of_F,
    standard_grid,
    support_function,
    wd_membership,
)
from vconv.minors import build_basis, membership
from vconv.monge_ampere import maval_basis
from vconv.poly import MatShape, Polynomial
from vconv.scalars import GaussianRational
from vconv.suites import standard_valuation, wd_ladder_valuation
from vconv.valuation import SmoothValuation, mollify, translate

F = Fraction
PHI = polynomial_bump([F(1, 5)], 1, 4, "1+x[1]")
MU1 = SmoothValuation.from_basis(MatShape(1, 1), [PHI])


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def random_points(n, k, count, seed=0, scale=2.0):
    rng = np.random.default_rng(seed)
    return [scale * (rng.standard_normal((n, k)) + 0.3j * rng.standard_normal((n, k))) for _ in range(count)]


def test_fourier_point_decomposition():
    w = random_points(3, 2, 1)[0]
    pt = FourierPoint(w)
    assert np.allclose(pt.diagonal[:, 0], pt.diagonal[:, 1])
    assert np.allclose(pt.diagonal + pt.offdiagonal, w)
    assert np.allclose(pt.offdiagonal.sum(axis=1), 0)
    assert np.allclose(pt.column_sum, w.sum(axis=1))
    assert np.allclose(pt.imag_sum, w.imag.sum(axis=1))


@pytest.mark.parametrize("n,k", [(1, 1), (2, 1), (2, 2), (3, 2)])
def test_transform_vanishes_at_origin(n, k):
    assert fourier_gw(standard_valuation(n, k), np.zeros((n, k))).value == 0


def test_one_dimensional_transform_against_direct_quadrature():
    for w in (0.7, 3.0 - 0.5j, -6.0 + 1j):
        X, W = PHI.quadrature(40, abs(w))
        direct = np.sum(W * PHI(X) * (-1j * w) ** 2 * np.exp(-1j * w * X[:, 0]))
        assert rel(fourier_gw(MU1, np.array([[w]])).value, direct) < 1e-12
        assert rel(fourier_gw(MU1, np.array([[w]])).value, -(w**2) * PHI.fourier([[w]])[0]) < 1e-12


@pytest.mark.parametrize("n,k", [(1, 1), (2, 1), (2, 2), (3, 2), (3, 3)])
def test_two_routes_agree(n, k):
    mu = standard_valuation(n, k)
    for w in random_points(n, k, 5, seed=n + k):
        num = fourier_gw(mu, w)
        closed = fourier_closed_form(mu, w)
        assert rel(num.value, closed) < 1e-9
        assert num.refinement < 1e-9 * max(abs(closed), 1e-12)


def test_prefactor_and_round_trip():
    assert f_prefactor(1) == -1
    assert f_prefactor(2) == 2 * 4
    assert f_prefactor(3) == -6 * 3**4
    for n, k in ((1, 1), (2, 2), (3, 2)):
        mu = standard_valuation(n, k)
        for w in random_points(n, k, 20, seed=3):
            back = from_f_transform(lambda v: f_transform(mu, v), w, k)
            assert rel(back, fourier_closed_form(mu, w)) < 1e-12


def test_maval_form_of_the_normalized_transform():
    for n, k in ((2, 1), (2, 2), (3, 2)):
        shape = MatShape(n, k)
        for el in maval_basis(shape)[:3]:
            phi = polynomial_bump([F(1, 7)] + [F(0)] * (n - 1), 1, 4, "1+x[1]")
            mu = SmoothValuation(shape, ((phi, el.psi, el.index),))
            for w in random_points(n, k, 3, seed=el.index):
                expected = complex(el.q_polynomial.evaluate_numeric(w)) * phi.fourier(w[:, -1][None, :])[0]
                assert rel(f_transform(mu, w), expected) < 1e-11
                assert rel(f_transform(mu, w, route="numeric"), expected) < 1e-9
    with pytest.raises(ValueError):
        f_transform(MU1, np.ones((1, 1)), route="sideways")


def test_series_low_orders_vanish_and_slices_are_members():
    for n, k in ((2, 1), (2, 2), (3, 2)):
        mu = standard_valuation(n, k)
        S = series_of_F(mu, 2 * k + 2)
        basis = build_basis(mu.shape)
        for m in range(2 * k):
            assert S.slice(m).is_zero()
        for m in range(2 * k, 2 * k + 3):
            assert membership(S.slice(m), basis)


def test_series_hand_derived_coefficients():
    S = series_of_F(MU1, 7)
    assert S.pi_exponent == 0
    for m in range(2, 8):
        moment = PHI.moment_exact((m - 2,))
        expected = GaussianRational(0, -1) ** (m - 2) * F(m * (m - 1), factorial(m)) * moment
        assert S.polynomial.coefficient((m,)) == expected


def test_series_matches_numeric_transform_near_origin():
    mu = standard_valuation(2, 2)
    S = series_of_F(mu, 14)
    w = 0.05 * random_points(2, 2, 1, seed=9)[0]
    assert rel(S.evaluate(w), f_transform(mu, w)) < 1e-9


def test_prescribe_moments_examples():
    one = x_polynomial(2, "1")
    phi = prescribe_moments(one, 0)
    assert phi.pi_exponent() == 0
    assert phi.moment_exact((0, 0)) == 1
    z1 = x_polynomial(2, "x[1]")
    phi = prescribe_moments(z1, 1)
    assert phi.moment_exact((0, 0)) == 0
    assert phi.moment_exact((1, 0)) == GaussianRational(0, 1)
    assert phi.moment_exact((0, 1)) == 0
    with pytest.raises(ValueError):
        prescribe_moments(x_polynomial(2, "x[1]^3"), 2)


@pytest.mark.parametrize("n,k,text,N", [(1, 1, "2-3*x[1]^2", 2), (2, 1, "1+x[1]*x[2]", 2), (2, 2, "x[2]-1/2", 1)])
def test_prescribed_pipeline(n, k, text, N):
    shape = MatShape(n, k)
    P = x_polynomial(n, text)
    phi = prescribe_moments(P, N)
    for el in maval_basis(shape):
        mu = SmoothValuation(shape, ((phi, el.psi, el.index),))
        top = 2 * k + N
        S = series_of_F(mu, top)
        last = [Polynomial.variable(shape, i + 1, k) for i in range(n)]
        expected = (el.q_polynomial * P.substitute(last)).truncate(top)
        assert S.pi_exponent == 0
        assert S.polynomial == expected


def test_wd_examples_and_nesting():
    mu = standard_valuation(2, 1)
    assert wd_membership(mu, 0).verdict
    assert not wd_membership(mu, 1).verdict
    for d in range(4):
        ladder = wd_ladder_valuation(1, 1, d)
        inside = wd_membership(ladder, d)
        assert inside.verdict and inside.series_vanishes and inside.codimension == d
        assert not wd_membership(ladder, d + 1).verdict
        for e in range(d):
            assert wd_membership(ladder, e).verdict
    rep = wd_membership(wd_ladder_valuation(2, 1, 1), 2).to_dict()
    assert rep["nonzero_residuals"] and not rep["verdict"]


def test_translation_law():
    mu = standard_valuation(2, 2)
    y = [F(1, 3), F(-2, 5)]
    moved = translate(mu, y)
    yf = np.array([float(v) for v in y])
    for w in random_points(2, 2, 4, seed=5):
        phase = np.exp(-1j * np.dot(w.sum(axis=1), yf))
        assert rel(fourier_gw(moved, w).value, phase * fourier_gw(mu, w).value) < 1e-10


def test_mollification_law():
    mu = standard_valuation(2, 1)
    b = polynomial_bump([F(1, 10), F(0)], F(1, 3), 4, "1+x[1]")
    rho = BumpFunction(b.center, b.radius, b.terms, 1 / b.moment_exact((0, 0)), -1)
    smooth = mollify(mu, rho)
    for w in random_points(2, 1, 4, seed=6, scale=1.0):
        # densities become phi * rho(-.), so the factor is F(rho) at -w_k
        factor = rho.fourier(-w[:, -1][None, :])[0]
        assert rel(f_transform(smooth, w), factor * f_transform(mu, w)) < 1e-10
    w = random_points(2, 1, 1, seed=7, scale=1.0)[0]
    assert rel(fourier_gw(smooth, w).value, fourier_closed_form(smooth, w)) < 1e-6


def test_support_function_examples():
    assert support_function(SupportBody.ball([0, 0, 0], 1), [1, 0, 0]) == 1
    assert support_function(SupportBody.box([-1] * 3, [1] * 3), [1, 1, 1]) == 3
    tri = SupportBody.polytope([[0, 0], [1, 0], [0, 2]])
    assert support_function(tri, [1, 1]) == 2
    assert SupportBody.parse("ball:1.5@1,2", 2) == SupportBody.ball([1, 2], 1.5)
    assert SupportBody.parse("box:2", 2) == SupportBody.box([-2, -2], [2, 2])
    assert SupportBody.parse("box:0,1;2,3", 2) == SupportBody.box([0, 1], [2, 3])
    with pytest.raises(ValueError):
        SupportBody.parse("disc:1", 2)


vec = st.lists(st.floats(-50, 50), min_size=3, max_size=3)
bodies = st.sampled_from(
    [
        SupportBody.ball([0.5, -1, 0], 2),
        SupportBody.box([-1, 0, -3], [2, 1, -1]),
        SupportBody.polytope([[0, 0, 0], [1, 2, 0], [0, -1, 3], [2, 2, 2]]),
    ]
)


@given(bodies, vec, vec)
def test_support_function_is_subadditive(A, y1, y2):
    lhs = support_function(A, np.add(y1, y2))
    assert lhs <= support_function(A, y1) + support_function(A, y2) + 1e-9 * (1 + abs(lhs))


@given(bodies, vec, st.floats(0, 10))
def test_support_function_is_positively_homogeneous(A, y, t):
    assert support_function(A, t * np.array(y)) == pytest.approx(t * support_function(A, y), rel=1e-12, abs=1e-9)


def test_standard_grid_shape():
    pts = standard_grid(2, 2, seed=1)
    assert len(pts) == 8 * (8 + 4 + 1)
    assert max(np.linalg.norm(p.imag) for p in pts) <= 8 + 1e-12
    assert all(p.shape == (2, 2) for p in pts)


def test_envelope_examples():
    phi = polynomial_bump([0], 1, 6)
    mu = SmoothValuation.hessian_type(1, 1, phi)
    A = SupportBody.ball([0], 1)
    rep = pws_envelope(mu, A, [0, 2, 4])
    assert rep["verdict"] and rep["max_N_passed"] == 4
    assert not pws_envelope(mu, A, [0], use_exponential=False)["verdict"]
    assert not pws_envelope(mu, SupportBody.ball([0], 0.5), [0])["verdict"]
    assert not pws_envelope(mu, A, [8])["verdict"]


def test_gram_ratio_examples():
    rep = gram_ratio_check(MU1, [[1]], samples=4)
    assert rep["relative_spread"] < 1e-12
    rep = gram_ratio_check(standard_valuation(2, 2), [[1, 0], [0, 1]], samples=10)
    assert rep["relative_spread"] < 1e-5
    assert rep["first_column_doubling_factor"] == pytest.approx([4.0, 0.0], abs=1e-8)
