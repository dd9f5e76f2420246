"""Smooth valuations presented as sums of densities against MAVal operators.

A valuation is stored as terms (phi_j, Psi_j) and evaluated as
mu(f) = sum_j int phi_j dPsi_j(f).  Goodey-Weil evaluation on test tensors
uses the multilinear mixed-Hessian density; an independent slow path goes
through values of mu on convex functions only.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from math import comb, factorial
from typing import Sequence

import numpy as np

from .bump import BumpFunction, Convolution, _Density, _eval_points
from .monge_ampere import (
    MaxAffineFunction,
    MixedMA,
    QuadraticFunction,
    SmoothFunction,
    discrete_ma,
    maval_basis,
    mixed_discriminant,
)
from .poly import MatShape, Polynomial

__all__ = [
    "SmoothValuation",
    "PolynomialSlot",
    "ExponentialSlot",
    "BumpSlot",
    "HandleSlot",
    "as_slot",
    "evaluate",
    "polarize",
    "polarize_fd",
    "gw_eval",
    "gw_eval_inclusion_exclusion",
    "translate",
    "mollify",
    "lattice_pair",
    "gram_ratio_check",
    "ConvexityError",
    "DEFAULT_ORDER",
]

DEFAULT_ORDER = 16
CONVEXITY_TOL = -1e-9


class ConvexityError(ValueError):
    pass


# test-function slots


class PolynomialSlot:
    """Slot x -> p(x) for a polynomial in x[1..n] (complex coefficients allowed)."""

    def __init__(self, p: Polynomial):
        if p.shape.k != 1:
            raise ValueError("slot polynomials live in n plain variables")
        self.p = p
        self.n = p.shape.n
        self._second = {
            (a, b): p.derivative(a + 1).derivative(b + 1) for a in range(self.n) for b in range(a, self.n)
        }

    def value(self, X):
        return _eval_points(self.p, np.atleast_2d(X))

    def hessian(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        H = np.zeros((X.shape[0], self.n, self.n), dtype=complex)
        for (a, b), q in self._second.items():
            if not q.is_zero():
                v = _eval_points(q, X)
                H[:, a, b] = v
                H[:, b, a] = v
        return H

    def scaled(self, c):
        return PolynomialSlot(self.p.scale(c))


class ExponentialSlot:
    """Slot x -> exp(-i<w, x>), or its real or imaginary part, for complex w."""

    def __init__(self, w, part: str = "full", coef: complex = 1.0):
        self.w = np.asarray(w, dtype=complex).ravel()
        self.n = self.w.size
        if part not in ("full", "re", "im"):
            raise ValueError("part must be 'full', 're' or 'im'")
        self.part = part
        self.coef = coef

    def _take(self, z):
        if self.part == "re":
            return self.coef * z.real
        if self.part == "im":
            return self.coef * z.imag
        return self.coef * z

    def value(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return self._take(np.exp(-1j * (X @ self.w)))

    def hessian(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        e = np.exp(-1j * (X @ self.w))
        return self._take(-np.outer(self.w, self.w)[None, :, :] * e[:, None, None])

    def scaled(self, c):
        return ExponentialSlot(self.w, self.part, self.coef * c)


class BumpSlot:
    """Compactly supported smooth slot given by a bump function."""

    def __init__(self, bump: BumpFunction, coef=1.0):
        self.bump = bump
        self.n = bump.n
        self.coef = coef
        self._second = {}
        for a in range(self.n):
            for b in range(a, self.n):
                alpha = [0] * self.n
                alpha[a] += 1
                alpha[b] += 1
                self._second[(a, b)] = bump.derivative(alpha)

    def value(self, X):
        return self.coef * self.bump(np.atleast_2d(X))

    def hessian(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        H = np.zeros((X.shape[0], self.n, self.n))
        for (a, b), d in self._second.items():
            v = np.real(d(X))
            H[:, a, b] = v
            H[:, b, a] = v
        return self.coef * H

    def scaled(self, c):
        return BumpSlot(self.bump, self.coef * c)


class HandleSlot:
    """Wraps a quadratic or smooth convex function handle as a slot."""

    def __init__(self, handle):
        self.handle = handle
        self.n = handle.n

    def value(self, X):
        return self.handle.value(X)

    def hessian(self, X):
        return self.handle.hessian(X)

    def scaled(self, c):
        return HandleSlot(self.handle.scaled(c))


class _SumSlot:
    def __init__(self, parts, weights):
        self.parts = list(parts)
        self.weights = list(weights)
        self.n = self.parts[0].n

    def hessian(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        total = np.zeros((X.shape[0], self.n, self.n), dtype=complex)
        for s, c in zip(self.parts, self.weights):
            if c != 0:
                total = total + c * s.hessian(X)
        return total


def as_slot(obj):
    if isinstance(obj, (PolynomialSlot, ExponentialSlot, BumpSlot, HandleSlot, _SumSlot)):
        return obj
    if isinstance(obj, Polynomial):
        return PolynomialSlot(obj)
    if isinstance(obj, BumpFunction):
        return BumpSlot(obj)
    if isinstance(obj, (QuadraticFunction, SmoothFunction)):
        return HandleSlot(obj)
    raise TypeError(f"cannot use {type(obj).__name__} as a test-function slot")


# valuations


@dataclass(frozen=True)
class SmoothValuation:
    """mu(f) = sum_j int phi_j dPsi_j(f)."""

    shape: MatShape
    terms: tuple  # ((density, MixedMA, basis_index or None), ...)
    support_box: tuple = field(default=None)

    def __post_init__(self):
        if not self.terms:
            raise ValueError("a valuation needs at least one term")
        for phi, psi, _ in self.terms:
            if phi.n != self.shape.n or psi.n != self.shape.n or psi.k != self.shape.k:
                raise ValueError("term dimensions do not match the valuation shape")
        if self.support_box is None:
            los, his = zip(*(phi.bounding_box() for phi, _, _ in self.terms))
            box = (np.min(np.array(los), axis=0), np.max(np.array(his), axis=0))
            object.__setattr__(self, "support_box", (tuple(map(float, box[0])), tuple(map(float, box[1]))))

    @property
    def n(self) -> int:
        return self.shape.n

    @property
    def k(self) -> int:
        return self.shape.k

    @classmethod
    def from_basis(cls, shape: MatShape, densities: Sequence, seed: int = 0) -> "SmoothValuation":
        """Terms phi_j against the j-th MAVal basis element; None skips an element."""
        basis = maval_basis(shape, seed)
        if len(densities) > len(basis):
            raise ValueError("more densities than basis elements")
        terms = tuple((phi, basis[j].psi, j) for j, phi in enumerate(densities) if phi is not None)
        return cls(shape, terms)

    @classmethod
    def hessian_type(cls, n: int, k: int, phi: _Density) -> "SmoothValuation":
        """mu(f) = int phi [D^2 f]_k dx."""
        return cls(MatShape(n, k), ((phi, MixedMA.hessian_type(n, k), None),))

    def scaled(self, c) -> "SmoothValuation":
        return SmoothValuation(self.shape, tuple((phi.scaled(c), psi, j) for phi, psi, j in self.terms), self.support_box)

    def __add__(self, other: "SmoothValuation") -> "SmoothValuation":
        if other.shape != self.shape:
            raise ValueError("cannot add valuations of different shapes")
        lo = tuple(min(a, b) for a, b in zip(self.support_box[0], other.support_box[0]))
        hi = tuple(max(a, b) for a, b in zip(self.support_box[1], other.support_box[1]))
        return SmoothValuation(self.shape, self.terms + other.terms, (lo, hi))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "terms": [
                {"phi": phi.to_dict(), "psi": j if j is not None else psi.to_dict()} for phi, psi, j in self.terms
            ],
            "support_box": [list(self.support_box[0]), list(self.support_box[1])],
        }

    @classmethod
    def from_dict(cls, d: dict, seed: int = 0) -> "SmoothValuation":
        shape = MatShape(d["n"], d["k"])
        basis = None
        terms = []
        for t in d["terms"]:
            phi = BumpFunction.from_dict(t["phi"])
            if isinstance(t["psi"], int):
                basis = basis or maval_basis(shape, seed)
                terms.append((phi, basis[t["psi"]].psi, t["psi"]))
            else:
                terms.append((phi, MixedMA.from_dict(shape.n, shape.k, t["psi"]), None))
        box = d.get("support_box")
        return cls(shape, tuple(terms), None if box is None else (tuple(box[0]), tuple(box[1])))


def _frequency_of(slots) -> float:
    return float(sum(np.linalg.norm(s.w) for s in slots if isinstance(s, ExponentialSlot)))


def gw_eval(mu: SmoothValuation, slots: Sequence, order: int = DEFAULT_ORDER) -> complex:
    """GW(mu)[f_1 x ... x f_k] through the mixed-Hessian density.

    Multilinear in every slot by construction; slots need only expose
    complex Hessians.
    """
    slots = [as_slot(s) for s in slots]
    if len(slots) != mu.k:
        raise ValueError(f"expected {mu.k} slots, got {len(slots)}")
    freq = _frequency_of(slots)
    total = 0j
    for phi, psi, _ in mu.terms:
        X, W = phi.quadrature(order, freq)
        # canonical slot order makes the float result exactly symmetric
        H = sorted((np.asarray(s.hessian(X), dtype=complex) for s in slots), key=lambda a: a.tobytes())
        total += np.sum(W * phi(X) * psi.density(H))
    return complex(total)


def _check_convex(slot, X, tol=CONVEXITY_TOL):
    H = np.real(slot.hessian(X))
    if H.size and np.linalg.eigvalsh(H).min() < tol:
        raise ConvexityError("function is not convex on the support of the valuation")


def _evaluate_discrete(mu: SmoothValuation, f: MaxAffineFunction):
    if mu.k != mu.n:
        raise ValueError("max-affine inputs are only supported in top degree")
    meas = discrete_ma(f)
    total = Fraction(0)
    for phi, psi, _ in mu.terms:
        weight = sum((c for c, _ in psi.terms), Fraction(0))
        exact = isinstance(phi, BumpFunction) and phi.pi_power == 0 and all(
            not isinstance(c, float) for c in [phi.scale]
        )
        for x, w in meas.atoms:
            val = phi.value_exact(x) if exact else complex(phi(np.array([[float(v) for v in x]]))[0]).real
            total = total + weight * w * val
    return total


def evaluate(mu: SmoothValuation, f, order: int = DEFAULT_ORDER, check_convexity: bool = True):
    """mu(f) for a convex handle f; exact atom sums for max-affine f in top degree."""
    if isinstance(f, MaxAffineFunction):
        return _evaluate_discrete(mu, f)
    slot = as_slot(f)
    total = 0.0
    for phi, psi, _ in mu.terms:
        X, W = phi.quadrature(order)
        if check_convexity:
            _check_convex(slot, X)
        H = slot.hessian(X)
        total += np.sum(W * phi(X) * psi.density([H] * mu.k))
    return float(np.real(total))


def polarize(mu: SmoothValuation, fs: Sequence, order: int = DEFAULT_ORDER) -> float:
    """Mixed value mu(f_1, ..., f_k) via the mixed-Hessian density."""
    return float(np.real(gw_eval(mu, fs, order)))


def _linear_coefficient_weights(k: int) -> list[Fraction]:
    """Weights c_m with sum_m c_m p(m) = p'(0)... coefficient of t for deg p <= k on nodes 0..k."""
    # Lagrange basis L_m(t) on nodes 0..k; the linear coefficient of L_m.
    weights = []
    for m in range(k + 1):
        others = [j for j in range(k + 1) if j != m]
        denom = Fraction(1)
        for j in others:
            denom *= m - j
        # coefficient of t in prod_{j != m} (t - j)
        lin = Fraction(0)
        for drop in others:
            term = Fraction(1)
            for j in others:
                if j != drop:
                    term *= -j
            lin += term
        weights.append(lin / denom)
    return weights


def polarize_fd(mu: SmoothValuation, fs: Sequence, order: int = DEFAULT_ORDER) -> float:
    """Finite-difference oracle: 1/k! times the lambda_1...lambda_k coefficient of
    mu(sum lambda_j f_j), interpolated exactly on the grid {0..k}^k."""
    k = mu.k
    slots = [as_slot(f) for f in fs]
    c = _linear_coefficient_weights(k)
    total = 0.0
    for ms in product(range(k + 1), repeat=k):
        w = 1
        for m in ms:
            w *= c[m]
        if w == 0 or all(m == 0 for m in ms):
            continue
        total += float(w) * evaluate(mu, _SumSlot(slots, ms), order)
    return total / factorial(k)


def gw_eval_inclusion_exclusion(mu: SmoothValuation, slots: Sequence, order: int = DEFAULT_ORDER, margin: float = 1.0):
    """Slow oracle for GW(mu) on real slots, using values of mu on convex functions only.

    Each slot is convexified by f_j = c_j |x - x0|^2 / 2 with c_j above the
    sup of the slot Hessian norm on the support box inflated by one, and
    GW[s_1 x ... x s_k] = sum_S (-1)^(k-|S|) mu(h_S, f_(not S)) with
    h_j = f_j + s_j; the subset sum equals the permutation-averaged form with
    weights 1/(j!(k-j)!).  Mixed values come from the finite-difference oracle.
    """
    k, n = mu.k, mu.n
    slots = [as_slot(s) for s in slots]
    lo = np.array(mu.support_box[0]) - 1.0
    hi = np.array(mu.support_box[1]) + 1.0
    x0 = 0.5 * (lo + hi)
    from .quadrature import box_rule

    probe, _ = box_rule(lo, hi, 12)
    corners = np.array(list(product(*zip(lo, hi))))
    nodes = [phi.quadrature(order)[0] for phi, _, _ in mu.terms]
    probe = np.vstack([probe, corners, *nodes])
    fs, hs = [], []
    for s in slots:
        H = s.hessian(probe)
        if np.max(np.abs(np.imag(H))) > 0:
            raise ValueError("inclusion-exclusion oracle needs real slots")
        sup = float(np.max(np.linalg.norm(np.real(H), ord=2, axis=(1, 2)))) if H.size else 0.0
        cj = sup + margin
        quad = QuadraticFunction(np.eye(n) * cj, (-cj * x0).tolist(), 0.0)
        f = HandleSlot(quad)
        h = _SumSlot([f, s], [1, 1])
        fs.append(f)
        hs.append(h)
    total = 0.0
    for size in range(k + 1):
        sign = (-1) ** (k - size)
        for S in combinations(range(k), size):
            args = [hs[j] if j in S else fs[j] for j in range(k)]
            total += sign * polarize_fd(mu, args, order)
    return total


def translate(mu: SmoothValuation, y) -> SmoothValuation:
    """The valuation f -> mu(f(. + y)): every density is shifted by +y."""
    y = [Fraction(str(v)) if isinstance(v, float) else Fraction(v) for v in y]
    terms = tuple((phi.translate(y), psi, j) for phi, psi, j in mu.terms)
    lo = tuple(a + float(v) for a, v in zip(mu.support_box[0], y))
    hi = tuple(a + float(v) for a, v in zip(mu.support_box[1], y))
    return SmoothValuation(mu.shape, terms, (lo, hi))


def mollify(mu: SmoothValuation, rho: BumpFunction, inner_order: int = 12) -> SmoothValuation:
    """f -> int rho(x) mu(f(. - x)) dx.

    By translation equivariance each density becomes phi_j * rho(-.), and
    the support box grows by -supp rho.
    """
    mass = complex(rho.integral())
    if abs(mass - 1) > 1e-9:
        warnings.warn(f"mollifier integrates to {mass}, not 1", stacklevel=2)
    flipped = rho.reflect()
    terms = tuple((Convolution(phi, flipped, inner_order), psi, j) for phi, psi, j in mu.terms)
    rlo, rhi = flipped.bounding_box()
    lo = tuple(a + float(b) for a, b in zip(mu.support_box[0], rlo))
    hi = tuple(a + float(b) for a, b in zip(mu.support_box[1], rhi))
    return SmoothValuation(mu.shape, terms, (lo, hi))


# lattice operations on max-affine functions


def _below(piece, f: MaxAffineFunction) -> bool:
    """Whether the affine piece lies below f everywhere (LP over convex combinations)."""
    from scipy.optimize import linprog

    a, b = piece
    A = np.array([[float(v) for v in p] for p, _ in f.pieces]).T
    B = np.array([float(q) for _, q in f.pieces])
    m = len(f.pieces)
    A_eq = np.vstack([A, np.ones((1, m))])
    b_eq = np.append(np.array([float(v) for v in a]), 1.0)
    res = linprog(-B, A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * m, method="highs")
    return bool(res.status == 0 and -res.fun >= float(b) - 1e-12)


def lattice_pair(f: MaxAffineFunction, h: MaxAffineFunction):
    """(f max h, f min h) as max-affine functions; raises if the minimum is not convex."""
    upper = f.maximum(h)
    candidates = list(dict.fromkeys(p for p in f.pieces + h.pieces if _below(p, f) and _below(p, h)))
    if not candidates:
        raise ValueError("the minimum is not convex")
    lower = MaxAffineFunction(candidates)
    # exact verification at vertices of all three functions and a rational lattice
    pts = {x for x, _ in discrete_ma(f).atoms} | {x for x, _ in discrete_ma(h).atoms}
    pts |= {x for x, _ in discrete_ma(lower).atoms}
    n = f.n
    grid = [Fraction(i, 2) for i in range(-8, 9)]
    pts |= set(product(grid, repeat=n)) if n <= 2 else set()
    for x in pts:
        if lower.value_exact(x) != min(f.value_exact(x), h.value_exact(x)):
            raise ValueError("the minimum is not convex")
    return upper, lower


def gram_ratio_check(mu: SmoothValuation, E_basis, samples: int = 10, **kw) -> dict:
    """See :func:`vconv.fourier.gram_ratio_check`."""
    from .fourier import gram_ratio_check as run

    return run(mu, E_basis, samples, **kw)
