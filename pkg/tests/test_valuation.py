import warnings
from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest

from vconv.bump import BumpFunction, polynomial_bump, x_polynomial
from vconv.monge_ampere import MaxAffineFunction, QuadraticFunction, SmoothFunction
from vconv.poly import MatShape
from vconv.quadrature import gauss_legendre
from vconv.suites import standard_valuation
from vconv.valuation import (
    BumpSlot,
    ConvexityError,
    ExponentialSlot,
    SmoothValuation,
    evaluate,
    gw_eval,
    gw_eval_inclusion_exclusion,
    lattice_pair,
    mollify,
    polarize,
    polarize_fd,
    translate,
)

F = Fraction


def eye(n, c=1):
    return [[F(c) if i == j else F(0) for j in range(n)] for i in range(n)]


def smooth_convex(n):
    """exp(x_1) + |x|^2/2 as a sampled handle."""

    def hess(X):
        H = np.zeros((X.shape[0], n, n))
        H[:, 0, 0] = np.exp(X[:, 0])
        return H + np.eye(n)[None]

    return SmoothFunction(n, hess, lambda X: np.exp(X[:, 0]) + 0.5 * np.sum(X * X, axis=1))


def normalized_bump(n, radius, s=4):
    b = polynomial_bump([F(0)] * n, radius, s)
    return BumpFunction(b.center, b.radius, b.terms, 1 / b.moment_exact((0,) * n), -(n // 2))


PHI1 = polynomial_bump([F(1, 5)], 1, 4, "1+x[1]")
MU1 = SmoothValuation.hessian_type(1, 1, PHI1)


def test_evaluate_one_dimensional_example():
    assert evaluate(MU1, QuadraticFunction(eye(1))) == pytest.approx(complex(PHI1.integral()).real, rel=1e-13)


@pytest.mark.parametrize("n,k", [(1, 1), (2, 1), (2, 2), (3, 2)])
def test_affine_invariance_is_exact(n, k):
    mu = standard_valuation(n, k)
    for f in (QuadraticFunction([[F(2 + i + j if i == j else 1, 2) for j in range(n)] for i in range(n)]), smooth_convex(n)):
        assert evaluate(mu, f) == evaluate(mu, f.add_affine([F(3)] + [F(-1, 2)] * (n - 1), 4))


@pytest.mark.parametrize("n,k", [(1, 1), (2, 1), (2, 2), (3, 2)])
def test_homogeneity(n, k):
    mu = standard_valuation(n, k)
    f = smooth_convex(n)
    base = evaluate(mu, f)
    for t in (2, 3, 0.5):
        assert evaluate(mu, f.scaled(t)) == pytest.approx(t**k * base, rel=1e-10)


def test_convexity_is_policed():
    with pytest.raises(ConvexityError):
        evaluate(MU1, QuadraticFunction(eye(1, -1)))
    # switching the check off evaluates anyway
    assert evaluate(MU1, QuadraticFunction(eye(1, -1)), check_convexity=False) < 0


def test_max_affine_only_in_top_degree():
    mu = standard_valuation(2, 1)
    with pytest.raises(ValueError):
        evaluate(mu, MaxAffineFunction([((1, 0), 0), ((0, 1), 0)]))
    top = SmoothValuation.from_basis(MatShape(1, 1), [polynomial_bump([0], 2, 3, "1+x[1]")])
    value = evaluate(top, MaxAffineFunction([((1,), 0), ((-1,), 0)]))
    assert isinstance(value, Fraction) and value == 2


def test_polarization_diagonal_and_mixed_example():
    mu = standard_valuation(2, 2)
    f = smooth_convex(2)
    assert polarize(mu, [f, f]) == pytest.approx(evaluate(mu, f), rel=1e-12)
    phi = polynomial_bump([F(0), F(0)], 1, 3)
    top = SmoothValuation.from_basis(MatShape(2, 2), [phi])
    f1 = QuadraticFunction([[F(1), F(0)], [F(0), F(0)]])
    f2 = QuadraticFunction([[F(0), F(0)], [F(0), F(1)]])
    assert polarize(top, [f1, f2]) == pytest.approx(0.5 * complex(phi.integral()).real, rel=1e-12)


@pytest.mark.parametrize("n,k", [(2, 2), (3, 2), (3, 3)])
def test_finite_difference_polarization_matches_direct(n, k):
    mu = standard_valuation(n, k)
    fs = [QuadraticFunction([[F(1 + j if a == b else 1, 3) for b in range(n)] for a in range(n)]) for j in range(k - 1)]
    fs.append(smooth_convex(n))
    assert polarize_fd(mu, fs) == pytest.approx(polarize(mu, fs), rel=1e-8)


def test_gw_eval_examples():
    x2 = x_polynomial(1, "x[1]^2")
    assert gw_eval(MU1, [x2]).real == pytest.approx(2 * complex(PHI1.integral()).real, rel=1e-13)
    mu = standard_valuation(2, 2)
    affine = x_polynomial(2, "3*x[1] - x[2] + 5")
    other = x_polynomial(2, "x[1]^2*x[2] + x[2]^3")
    assert gw_eval(mu, [affine, other]) == 0
    assert gw_eval(mu, [x_polynomial(2, "1"), other]) == 0
    base = gw_eval(mu, [other, x_polynomial(2, "x[1]^4")])
    assert gw_eval(mu, [other.scale(3), x_polynomial(2, "x[1]^4")]) == pytest.approx(3 * base, rel=1e-14)


def test_gw_eval_is_exactly_symmetric():
    mu = standard_valuation(3, 3)
    slots = [
        x_polynomial(3, "x[1]^2*x[3]"),
        ExponentialSlot([0.3, -1.1, 0.5 + 0.2j]),
        BumpSlot(polynomial_bump([F(1, 4), 0, 0], 2, 4, "1+x[2]")),
    ]
    ref = gw_eval(mu, slots)
    for perm in permutations(range(3)):
        assert gw_eval(mu, [slots[i] for i in perm]) == ref


def test_inclusion_exclusion_oracle():
    mu = standard_valuation(2, 2)
    slots = [
        BumpSlot(polynomial_bump([F(1, 3), 0], 1, 4, "1+x[1]")),
        BumpSlot(polynomial_bump([0, F(-1, 4)], F(3, 2), 5, "2-x[2]")),
    ]
    assert gw_eval_inclusion_exclusion(mu, slots).real == pytest.approx(gw_eval(mu, slots).real, rel=1e-6)
    zero = BumpSlot(slots[0].bump, 0.0)
    assert gw_eval_inclusion_exclusion(mu, [zero, slots[1]]) == pytest.approx(0.0, abs=1e-12)


def test_inclusion_exclusion_single_slot_is_a_difference():
    slot = BumpSlot(polynomial_bump([F(1, 3)], 1, 4, "1+x[1]"))
    value = gw_eval_inclusion_exclusion(MU1, [slot])
    direct = gw_eval(MU1, [slot]).real
    assert value == pytest.approx(direct, rel=1e-9)


def test_translation_covariance():
    mu = standard_valuation(2, 1)
    y = [F(1, 3), F(-1, 2)]
    moved = translate(mu, y)
    q = QuadraticFunction([[F(2), F(1)], [F(1), F(3)]])
    assert evaluate(moved, q) == evaluate(mu, q.translated(y))
    f = smooth_convex(2)
    assert evaluate(moved, f) == pytest.approx(evaluate(mu, f.translated(y)), rel=1e-13)
    assert moved.support_box[0][0] == pytest.approx(mu.support_box[0][0] + 1 / 3)


def test_support_locality():
    mu = standard_valuation(2, 2)
    lo, hi = (np.array(b) for b in mu.support_box)
    f = smooth_convex(2)

    def far_hess(X):
        H = f.hessian(X).copy()
        outside = np.any((X < lo - 0.5) | (X > hi + 0.5), axis=1)
        H[outside] = H[outside] + 7 * np.eye(2)
        return H

    g = SmoothFunction(2, far_hess)
    assert evaluate(mu, f) == evaluate(mu, g)


def _mollified_by_quadrature(mu, rho, f, order=24):
    """int rho(x) mu(f(. - x)) dx with an outer Gauss rule on the support of rho."""
    (lo,), (hi,) = rho.bounding_box()
    xs, ws = gauss_legendre(order, lo, hi)
    vals = [evaluate(mu, f.translated([-x])) for x in xs]
    return float(np.sum(ws * np.real(rho(xs[:, None])) * np.array(vals)))


def test_mollification_two_paths_and_support():
    mu = SmoothValuation.hessian_type(1, 1, polynomial_bump([F(1, 5)], 1, 4, "1+x[1]"))
    rho = normalized_bump(1, F(1, 4))
    smooth = mollify(mu, rho)
    f = smooth_convex(1)
    assert evaluate(smooth, f) == pytest.approx(_mollified_by_quadrature(mu, rho, f), rel=1e-6)
    assert smooth.support_box[0][0] == pytest.approx(mu.support_box[0][0] - 0.25)
    assert smooth.support_box[1][0] == pytest.approx(mu.support_box[1][0] + 0.25)


def test_mollification_converges_as_mollifier_shrinks():
    mu = standard_valuation(2, 1)
    f = smooth_convex(2)
    target = evaluate(mu, f)
    errors = [abs(evaluate(mollify(mu, normalized_bump(2, r)), f) - target) for r in (F(1, 2), F(1, 4), F(1, 8))]
    assert errors[0] > errors[1] > errors[2]


def test_mollify_warns_on_unnormalized_kernel():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        mollify(MU1, polynomial_bump([0], 1, 3))
    assert any("integrates" in str(w.message) for w in caught)


def test_lattice_pair_and_non_convex_minimum():
    f = MaxAffineFunction([((1,), 0), ((0,), 0)])
    h = MaxAffineFunction([((-1,), 0), ((0,), 0)])
    up, low = lattice_pair(f, h)
    assert low.value_exact([F(3)]) == 0 and up.value_exact([F(-2)]) == 2
    with pytest.raises(ValueError):
        lattice_pair(MaxAffineFunction([((1,), 0)]), MaxAffineFunction([((-1,), 0)]))


def test_valuation_serialization_round_trip():
    mu = standard_valuation(3, 2)
    back = SmoothValuation.from_dict(mu.to_dict())
    f = smooth_convex(3)
    assert evaluate(back, f) == evaluate(mu, f)
    hess = SmoothValuation.hessian_type(2, 1, polynomial_bump([0, 0], 1, 3))
    assert evaluate(SmoothValuation.from_dict(hess.to_dict()), f=smooth_convex(2)) == evaluate(hess, smooth_convex(2))
