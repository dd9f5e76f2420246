from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from vconv.minors import minor
from vconv.poly import MatShape, Polynomial, PolyParseError, parse_poly, render_poly
from vconv.scalars import GaussianRational, exact_str, parse_scalar

S22 = MatShape(2, 2)
S32 = MatShape(3, 2)


def w(shape, i, j):
    return Polynomial.variable(shape, i, j)


def det2(shape=S22):
    return minor(shape, (1, 2))


# examples


def test_binomial_square():
    p = (w(S22, 1, 1) + w(S22, 2, 1)) ** 2
    assert p == parse_poly("w[1,1]^2 + 2*w[1,1]*w[2,1] + w[2,1]^2", S22)


def test_times_zero():
    assert (det2() * Polynomial.zero(S22)).is_zero()


def test_det_squared():
    expected = parse_poly("w[1,1]^2*w[2,2]^2 - 2*w[1,1]*w[2,1]*w[1,2]*w[2,2] + w[2,1]^2*w[1,2]^2", S22)
    assert det2() * det2() == expected


def test_initial_terms():
    exp, c = det2().initial_term()
    assert exp == (1, 0, 0, 1) and c == 1
    exp, _ = (w(S22, 2, 1) + w(S22, 1, 2)).initial_term()
    assert exp == (0, 1, 0, 0)
    exp, c = Polynomial.constant(S22, 5).initial_term()
    assert exp == (0, 0, 0, 0) and c == 5
    with pytest.raises(ValueError):
        Polynomial.zero(S22).initial_term()


def test_column_degree():
    d = det2()
    assert d.column_degree() == (1, 1)
    assert (d * d).column_degree() == (2, 2)
    assert (w(S22, 1, 1) + w(S22, 1, 1) ** 2).column_degree() is None


def test_substitution_examples():
    assert det2().evaluate([[1, 0], [0, 1]]) == 1
    # restriction of a principal minor to span{e1, e2}
    sq = det2(S32) ** 2
    restricted = sq.restrict([[1, 0, 0], [0, 1, 0]])
    assert restricted == det2(S22) ** 2
    # w[1,k] at a diagonal point
    z = [Fraction(3), Fraction(-2), Fraction(7)]
    assert w(S32, 1, 2).evaluate([[zi, zi] for zi in z]) == 3


def test_parse_examples():
    p = parse_poly("3/2*w[1,1]^2*w[2,2] - w[2,1]", S22)
    assert len(p.terms) == 2
    assert p.coefficient((2, 0, 0, 1)) == Fraction(3, 2)
    q = parse_poly("i*w[1,1]", S22)
    assert q.coefficient((1, 0, 0, 0)) == GaussianRational(0, 1)
    assert not q.is_rational()
    r = parse_poly("(1/2 - 3i)*w[2,2]", S22)
    assert r.coefficient((0, 0, 0, 1)) == GaussianRational(Fraction(1, 2), -3)


@pytest.mark.parametrize("text", ["w[0,1]", "w[3,1]", "w[1,1]*+", "w[1,1", "2**w[1,1]", "1/0"])
def test_parse_errors_carry_position(text):
    with pytest.raises(PolyParseError) as info:
        parse_poly(text, S22)
    assert isinstance(info.value.position, int)
    assert 0 <= info.value.position <= len(text)


def test_shape_validation():
    with pytest.raises(ValueError):
        MatShape(2, 3)
    with pytest.raises(ValueError):
        det2(S22) + det2(S32)


def test_scalar_text_round_trip():
    for text in ("0", "-7/3", "2i", "(1/2-3i)", "(-1+1i)"):
        x = parse_scalar(text)
        assert parse_scalar(exact_str(x)) == x


# properties

coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=4)
monos = st.lists(st.integers(0, 2), min_size=4, max_size=4).map(tuple)
polys = st.dictionaries(monos, coeffs, max_size=4).map(lambda t: Polynomial(S22, t))
nonzero_polys = polys.filter(lambda p: not p.is_zero())


@given(monos, monos, monos)
def test_order_is_multiplicative(u, v, m):
    if u < v:
        assert tuple(a + b for a, b in zip(u, m)) < tuple(a + b for a, b in zip(v, m))


@given(nonzero_polys, nonzero_polys)
def test_initial_term_is_multiplicative(p, q):
    ep, cp = p.initial_term()
    eq, cq = q.initial_term()
    e, c = (p * q).initial_term()
    assert e == tuple(a + b for a, b in zip(ep, eq))
    assert c == cp * cq


@given(monos, monos, coeffs, coeffs)
def test_column_degree_adds(a, b, ca, cb):
    p = Polynomial.monomial(S22, a, ca or 1)
    q = Polynomial.monomial(S22, b, cb or 1)
    dp, dq = p.column_degree(), q.column_degree()
    assert (p * q).column_degree() == tuple(x + y for x, y in zip(dp, dq))


@given(polys)
def test_render_parse_round_trip(p):
    assert parse_poly(render_poly(p), S22) == p


@given(polys, polys, polys)
def test_ring_laws(p, q, r):
    assert p + q == q + p
    assert p * q == q * p
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert (p - p).is_zero()
