"""Compactly supported densities: polynomial bumps and their convolutions.

A polynomial bump on the ball B(c, r) is

    phi(x) = scale * pi**pi_power * sum_t p_t(y) * (1 - |y|^2)_+ ** e_t,   y = (x - c) / r.

The family is closed under derivatives and translations.  Moments are exact
(a rational or Gaussian rational times a power of pi) and the Fourier
transform has a closed form in Bessel functions, independent of quadrature.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb, factorial, gamma, pi
from typing import Sequence

import numpy as np
from scipy import special

from .poly import MatShape, Polynomial, parse_poly
from .quadrature import ball_rule
from .scalars import GaussianRational, as_exact, exact_str, parse_scalar

__all__ = [
    "BumpFunction",
    "Convolution",
    "polynomial_bump",
    "ball_moment",
    "lambda_bessel",
    "x_polynomial",
]


def x_polynomial(n: int, text: str) -> Polynomial:
    """Parse a polynomial in x[1..n]."""
    return parse_poly(text, MatShape(n, 1))


def _split_re_im(p: Polynomial) -> tuple[Polynomial, Polynomial]:
    re_t, im_t = {}, {}
    for e, c in p.terms.items():
        if isinstance(c, GaussianRational):
            re_t[e], im_t[e] = c.re, c.im
        else:
            re_t[e] = c
    return Polynomial(p.shape, re_t), Polynomial(p.shape, im_t)


def _eval_points(p: Polynomial, Y: np.ndarray) -> np.ndarray:
    if p.is_rational():
        return p.evaluate_real(Y)
    re_p, im_p = _split_re_im(p)
    return re_p.evaluate_real(Y) + 1j * im_p.evaluate_real(Y)


@lru_cache(maxsize=4096)
def ball_moment(beta: tuple, e: int) -> Fraction:
    """Rational c with  int_{|y|<1} y^beta (1-|y|^2)^e dy = c * pi**(n // 2)."""
    n = len(beta)
    if any(b % 2 for b in beta):
        return Fraction(0)
    half = [b // 2 for b in beta]
    num = Fraction(factorial(e))
    for a in half:
        num *= Fraction(factorial(2 * a), 4**a * factorial(a))
    s = sum(half)
    if n % 2 == 0:
        den = Fraction(factorial(s + n // 2 + e))
    else:
        M = s + (n + 1) // 2 + e
        den = Fraction(factorial(2 * M), 4**M * factorial(M))
    return num / den


def lambda_bessel(nu: float, u: np.ndarray) -> np.ndarray:
    """H_nu(u) = (2/z)^nu J_nu(z) with z = sqrt(u), an entire function of u.

    Uses the power series for |u| < 16 and scipy's Bessel J otherwise.
    """
    u = np.asarray(u, dtype=complex)
    out = np.empty_like(u)
    small = np.abs(u) < 16.0
    if np.any(small):
        us = u[small]
        term = np.full(us.shape, 1.0 / gamma(nu + 1), dtype=complex)
        acc = term.copy()
        for m in range(1, 60):
            term = term * (-us / 4.0) / (m * (nu + m))
            acc += term
        out[small] = acc
    if np.any(~small):
        z = np.sqrt(u[~small])
        out[~small] = (2.0 / z) ** nu * special.jv(nu, z)
    return out


def _to_frac_vec(v) -> tuple:
    return tuple(Fraction(x) if not isinstance(x, Fraction) else x for x in v)


class _Density:
    """Shared interface of compactly supported densities."""

    n: int

    def support_ball(self) -> tuple[np.ndarray, float]:
        raise NotImplementedError

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        c, r = self.support_ball()
        return c - r, c + r

    def quadrature(self, order: int = 16, frequency: float = 0.0):
        c, r = self.support_ball()
        return ball_rule(c, r, order + self.degree_hint() // 2, frequency)

    def degree_hint(self) -> int:
        return 0

    def integral(self):
        return self.moment((0,) * self.n)

    def l1_norm(self, order: int = 24) -> float:
        X, W = self.quadrature(order)
        return float(np.sum(W * np.abs(self(X))))

    def __call__(self, X):
        return self.evaluate(X)


class BumpFunction(_Density):
    """Polynomial bump, see the module docstring."""

    def __init__(self, center, radius, terms, scale=1, pi_power: int = 0, spec: dict | None = None):
        self.center = _to_frac_vec(center)
        self.n = len(self.center)
        self.radius = Fraction(radius)
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        merged: dict = {}
        for p, e in terms:
            if p.shape != MatShape(self.n, 1):
                raise ValueError("bump polynomials must be in n plain variables")
            if e < 0:
                raise ValueError("exponent of the bump factor must be nonnegative")
            merged[e] = merged.get(e, Polynomial.zero(p.shape)) + p
        self.terms = tuple((p, e) for e, p in sorted(merged.items()) if not p.is_zero())
        self.scale = as_exact(scale)
        self.pi_power = int(pi_power)
        self.spec = spec

    # descriptors
    @property
    def smoothness(self) -> int:
        return min((e for _, e in self.terms), default=0)

    def degree_hint(self) -> int:
        return max((p.total_degree() + 2 * e for p, e in self.terms), default=0)

    def support_ball(self):
        return np.array([float(c) for c in self.center]), float(self.radius)

    def is_zero(self) -> bool:
        return not self.terms or self.scale == 0

    def __repr__(self):
        return f"BumpFunction(n={self.n}, center={[str(c) for c in self.center]}, radius={self.radius}, s={self.smoothness})"

    # evaluation
    def evaluate(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        c, r = self.support_ball()
        Y = (X - c) / r
        b = 1.0 - np.sum(Y * Y, axis=1)
        inside = b > 0
        out = np.zeros(X.shape[0], dtype=complex)
        if np.any(inside):
            Yi, bi = Y[inside], b[inside]
            acc = np.zeros(Yi.shape[0], dtype=complex)
            for p, e in self.terms:
                acc += _eval_points(p, Yi) * bi**e
            out[inside] = acc * complex(self.scale) * pi**self.pi_power
        if np.all(out.imag == 0):
            return out.real
        return out

    def value_exact(self, x: Sequence):
        """Exact value at a rational point; needs pi_power == 0."""
        if self.pi_power != 0:
            raise ValueError("exact values need a bump without a pi factor")
        y = [(Fraction(xi) - ci) / self.radius for xi, ci in zip(x, self.center)]
        b = 1 - sum(v * v for v in y)
        if b <= 0:
            return Fraction(0)
        point = [[v] for v in y]
        total = Fraction(0)
        for p, e in self.terms:
            total = total + p.evaluate(point) * b**e
        return as_exact(total * self.scale)

    # algebra on the family
    def scaled(self, c) -> "BumpFunction":
        return BumpFunction(self.center, self.radius, self.terms, self.scale * as_exact(c), self.pi_power)

    def derivative(self, alpha: Sequence[int]) -> "BumpFunction":
        """Exact partial derivative d^alpha (product and chain rule in y = (x-c)/r)."""
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.n:
            raise ValueError("alpha must have length n")
        shape = MatShape(self.n, 1)
        terms = list(self.terms)
        for i, a in enumerate(alpha):
            for _ in range(a):
                new: dict = {}
                yi = Polynomial.variable(shape, i + 1)
                for p, e in terms:
                    dp = p.derivative(i + 1) / self.radius
                    if not dp.is_zero():
                        new[e] = new.get(e, Polynomial.zero(shape)) + dp
                    if e > 0:
                        q = (p * yi).scale(Fraction(-2 * e) / self.radius)
                        new[e - 1] = new.get(e - 1, Polynomial.zero(shape)) + q
                    elif not p.is_zero():
                        raise ValueError("cannot differentiate the indicator of the ball")
                terms = [(p, e) for e, p in new.items() if not p.is_zero()]
        spec = None
        if self.spec is not None:
            spec = dict(self.spec)
            spec["alpha"] = [x + y for x, y in zip(self.spec.get("alpha", [0] * self.n), alpha)]
        return BumpFunction(self.center, self.radius, terms, self.scale, self.pi_power, spec)

    def translate(self, y: Sequence) -> "BumpFunction":
        """x -> phi(x - y): the support moves by +y."""
        c = tuple(a + Fraction(b) for a, b in zip(self.center, y))
        spec = None
        if self.spec is not None:
            spec = dict(self.spec)
            spec["center"] = [str(v) for v in c]
        return BumpFunction(c, self.radius, self.terms, self.scale, self.pi_power, spec)

    def reflect(self) -> "BumpFunction":
        """x -> phi(-x)."""
        shape = MatShape(self.n, 1)
        flip = [Polynomial.variable(shape, i + 1).scale(-1) for i in range(self.n)]
        terms = [(p.substitute(flip), e) for p, e in self.terms]
        return BumpFunction(tuple(-c for c in self.center), self.radius, terms, self.scale, self.pi_power)

    # moments
    def pi_exponent(self) -> int:
        return self.n // 2 + self.pi_power

    def moment_exact(self, gamma_: Sequence[int]):
        """Exact coefficient c with  int x^gamma phi = c * pi**pi_exponent()."""
        shape = MatShape(self.n, 1)
        images = [
            Polynomial(shape, {shape.zero_exponent(): self.center[i]})
            + Polynomial.variable(shape, i + 1).scale(self.radius)
            for i in range(self.n)
        ]
        mono = Polynomial.monomial(shape, tuple(gamma_), 1).substitute(images)
        total = Fraction(0)
        for p, e in self.terms:
            prod = mono * p
            for exp, coef in prod.terms.items():
                m = ball_moment(exp, e)
                if m:
                    total = total + coef * m
        return as_exact(total * self.scale * self.radius**self.n)

    def moment(self, gamma_: Sequence[int]) -> complex:
        return complex(self.moment_exact(gamma_)) * pi**self.pi_exponent()

    # Fourier transform
    def fourier(self, xi) -> np.ndarray:
        """Closed-form  int phi(x) exp(-i<xi, x>) dx  at complex xi of shape (m, n)."""
        xi = np.atleast_2d(np.asarray(xi, dtype=complex))
        r = float(self.radius)
        c = np.array([float(v) for v in self.center])
        zeta = r * xi
        u = np.sum(zeta * zeta, axis=1)
        total = np.zeros(xi.shape[0], dtype=complex)
        shape = MatShape(self.n, 1)
        lam_cache: dict = {}
        for p, e in self.terms:
            for exp, coef in p.terms.items():
                for q, m in _derivative_expansion(self.n, exp):
                    key = (e, m)
                    if key not in lam_cache:
                        nu = e + self.n / 2 + m
                        lam_cache[key] = (
                            pi ** (self.n / 2) * gamma(e + 1) * (-0.25) ** m * lambda_bessel(nu, u)
                        )
                    total += complex(coef) * q.evaluate_numeric(zeta[:, :, None]) * lam_cache[key]
        phase = np.exp(-1j * (xi @ c))
        return complex(self.scale) * pi**self.pi_power * r**self.n * phase * total

    # serialization
    def to_dict(self) -> dict:
        if self.spec is not None:
            return dict(self.spec)
        return {
            "center": [str(v) for v in self.center],
            "radius": str(self.radius),
            "scale": exact_str(self.scale),
            "pi_power": self.pi_power,
            "terms": [{"p": str(p), "e": e} for p, e in self.terms],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BumpFunction":
        if "terms" in d:
            n = len(d["center"])
            terms = [(parse_poly(t["p"], MatShape(n, 1)), int(t["e"])) for t in d["terms"]]
            return cls(
                [Fraction(v) for v in d["center"]],
                Fraction(d["radius"]),
                terms,
                parse_scalar(str(d.get("scale", "1"))),
                int(d.get("pi_power", 0)),
            )
        center = [Fraction(str(v)) for v in d["center"]]
        phi = polynomial_bump(center, Fraction(str(d.get("radius", 1))), int(d.get("s", 6)), d.get("p", "1"))
        alpha = d.get("alpha")
        if alpha and any(alpha):
            phi = phi.derivative(alpha)
        return phi


@lru_cache(maxsize=1024)
def _derivative_expansion(n: int, beta: tuple):
    """(i d/dzeta)^beta G(zeta.zeta) = sum q(zeta) G^(m)(zeta.zeta), as a list of (q, m)."""
    shape = MatShape(n, 1)
    items = {0: Polynomial.one(shape)}
    for i, a in enumerate(beta):
        zi2 = Polynomial.variable(shape, i + 1).scale(2)
        for _ in range(a):
            new: dict = {}
            for m, q in items.items():
                dq = q.derivative(i + 1)
                if not dq.is_zero():
                    new[m] = new.get(m, Polynomial.zero(shape)) + dq
                new[m + 1] = new.get(m + 1, Polynomial.zero(shape)) + q * zi2
            items = {m: q for m, q in new.items() if not q.is_zero()}
    factor = GaussianRational(0, 1) ** sum(beta)
    return tuple((q.scale(factor), m) for m, q in sorted(items.items()))


def polynomial_bump(center, radius, s: int, p="1", scale=1) -> BumpFunction:
    """p(x) * (1 - |x - c|^2 / r^2)_+^s with p given in x (text or Polynomial)."""
    center = _to_frac_vec([Fraction(str(c)) if isinstance(c, (float, str)) else c for c in center])
    n = len(center)
    radius = Fraction(radius)
    if s < 0:
        raise ValueError("smoothness exponent must be nonnegative")
    shape = MatShape(n, 1)
    if isinstance(p, str):
        p_text = p
        p = parse_poly(p, shape)
    else:
        p_text = str(p)
    images = [
        Polynomial(shape, {shape.zero_exponent(): center[i]}) + Polynomial.variable(shape, i + 1).scale(radius)
        for i in range(n)
    ]
    py = p.substitute(images)
    spec = {"center": [str(c) for c in center], "radius": str(radius), "s": s, "p": p_text, "alpha": [0] * n}
    if scale != 1:
        spec = None
    return BumpFunction(center, radius, [(py, s)], scale, 0, spec)


class Convolution(_Density):
    """(a * b)(x) = int a(x - z) b(z) dz for two densities."""

    def __init__(self, a: _Density, b: _Density, inner_order: int = 12):
        if a.n != b.n:
            raise ValueError("dimension mismatch")
        self.a, self.b, self.n = a, b, a.n
        self.inner_order = inner_order

    def support_ball(self):
        ca, ra = self.a.support_ball()
        cb, rb = self.b.support_ball()
        return ca + cb, ra + rb

    def degree_hint(self) -> int:
        return self.a.degree_hint() + self.b.degree_hint()

    @property
    def smoothness(self) -> int:
        return getattr(self.a, "smoothness", 0) + getattr(self.b, "smoothness", 0)

    def evaluate(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Z, Wz = self.b.quadrature(self.inner_order)
        bz = self.b(Z)
        out = []
        for chunk in np.array_split(X, max(1, X.shape[0] // 512 + 1)):
            pts = (chunk[:, None, :] - Z[None, :, :]).reshape(-1, self.n)
            vals = np.asarray(self.a(pts)).reshape(chunk.shape[0], -1)
            out.append(vals @ (Wz * bz))
        res = np.concatenate(out) if out else np.zeros(0)
        return res

    def pi_exponent(self) -> int:
        return self.a.pi_exponent() + self.b.pi_exponent()

    def moment_exact(self, gamma_: Sequence[int]):
        gamma_ = tuple(gamma_)
        total = Fraction(0)
        import itertools

        for delta in itertools.product(*[range(g + 1) for g in gamma_]):
            coef = 1
            for g, d in zip(gamma_, delta):
                coef *= comb(g, d)
            rest = tuple(g - d for g, d in zip(gamma_, delta))
            total = total + coef * self.a.moment_exact(delta) * self.b.moment_exact(rest)
        return as_exact(total)

    def moment(self, gamma_) -> complex:
        return complex(self.moment_exact(gamma_)) * pi**self.pi_exponent()

    def fourier(self, xi) -> np.ndarray:
        return self.a.fourier(xi) * self.b.fourier(xi)

    def derivative(self, alpha) -> "Convolution":
        return Convolution(self.a.derivative(alpha), self.b, self.inner_order)

    def translate(self, y) -> "Convolution":
        return Convolution(self.a.translate(y), self.b, self.inner_order)

    def to_dict(self) -> dict:
        return {"convolution": [self.a.to_dict(), self.b.to_dict()]}
