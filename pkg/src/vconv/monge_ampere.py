"""Mixed discriminants, Monge-Ampere type densities, the MAVal basis and the
discrete Monge-Ampere measure of max-affine functions."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations, product
from math import comb, factorial
from typing import Callable, Sequence

import numpy as np

from .linalg import SparseEchelon, det as exact_det, solve as exact_solve
from .minors import build_basis, module_dimension
from .poly import MatShape, Polynomial
from .scalars import GaussianRational, as_exact, is_exact

__all__ = [
    "mixed_discriminant",
    "QuadraticFunction",
    "SmoothFunction",
    "MaxAffineFunction",
    "mixed_ma_quadratics",
    "hessian_density",
    "MixedMA",
    "MAValBasisElement",
    "maval_basis",
    "q_of_psi",
    "DiscreteMeasure",
    "discrete_ma",
    "gradient_image_mass",
    "hull_volume_exact",
]


# mixed discriminants


def _is_exact_matrix(A) -> bool:
    if isinstance(A, np.ndarray):
        return A.dtype == object and all(is_exact(x) for x in A.ravel())
    return all(is_exact(x) for row in A for x in row)


def mixed_discriminant(*mats):
    """Symmetric multilinear polarization of det, normalized by D(A,...,A) = det A.

    Uses inclusion-exclusion over subsets:
    D(A_1..A_n) = 1/n! sum_S (-1)^(n-|S|) det(sum_{i in S} A_i).
    Exact for rational or Gaussian-rational entries.  Float or complex
    numpy inputs of shape (..., n, n) are handled batch-wise.
    """
    n = len(mats)
    if n == 0:
        raise ValueError("need at least one matrix")
    if all(_is_exact_matrix(A) for A in mats):
        rows = [[[as_exact(x) for x in row] for row in A] for A in mats]
        if any(len(A) != n or any(len(r) != n for r in A) for A in rows):
            raise ValueError("mixed discriminant of n matrices needs n x n inputs")
        total = Fraction(0)
        for size in range(1, n + 1):
            sign = -1 if (n - size) % 2 else 1
            for S in combinations(range(n), size):
                M = [[sum((rows[i][a][b] for i in S), Fraction(0)) for b in range(n)] for a in range(n)]
                total = total + sign * exact_det(M)
        return as_exact(total / factorial(n))
    arrs = [np.asarray(A) for A in mats]
    if arrs[0].dtype == object:
        arrs = [np.asarray(A, dtype=complex) for A in arrs]
    arrs = np.broadcast_arrays(*arrs)
    if arrs[0].shape[-2:] != (n, n):
        raise ValueError("mixed discriminant of n matrices needs n x n inputs")
    total = 0
    for size in range(1, n + 1):
        sign = -1.0 if (n - size) % 2 else 1.0
        for S in combinations(range(n), size):
            total = total + sign * np.linalg.det(sum(arrs[i] for i in S))
    return total / factorial(n)


def _mixed_discriminant_columns(mats: Sequence[Sequence[Sequence]]):
    """Column-permutation formula: 1/n! sum_sigma det[A_sigma(1) e_1 | ... | A_sigma(n) e_n]."""
    n = len(mats)
    total = Fraction(0)
    for sigma in permutations(range(n)):
        M = [[mats[sigma[c]][r][c] for c in range(n)] for r in range(n)]
        total = total + exact_det(M)
    return as_exact(total / factorial(n))


# convex function handles


def _exact_matrix(A) -> list:
    return [[as_exact(x) if is_exact(x) else x for x in row] for row in A]


class QuadraticFunction:
    """f(x) = 1/2 x^T A x + <b, x> + c; the Hessian is A."""

    kind = "quadratic"

    def __init__(self, A, b=None, c=0):
        self.A = _exact_matrix(A)
        n = len(self.A)
        self.n = n
        self.b = list(b) if b is not None else [Fraction(0)] * n
        self.c = c
        for i in range(n):
            for j in range(n):
                if self.A[i][j] != self.A[j][i]:
                    raise ValueError("quadratic form must be symmetric")

    def is_convex(self, tol: float = 1e-12) -> bool:
        ev = np.linalg.eigvalsh(np.array(self.A, dtype=float))
        return bool(ev.min() >= -tol)

    def hessian(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        H = np.array(self.A, dtype=float)
        return np.broadcast_to(H, (X.shape[0], self.n, self.n))

    def hessian_exact(self, x=None):
        return self.A

    def value(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        A = np.array(self.A, dtype=float)
        b = np.array([float(v) for v in self.b])
        return 0.5 * np.einsum("mi,ij,mj->m", X, A, X) + X @ b + float(self.c)

    def add_affine(self, a, b0=0) -> "QuadraticFunction":
        return QuadraticFunction(self.A, [x + y for x, y in zip(self.b, a)], self.c + b0)

    def scaled(self, t) -> "QuadraticFunction":
        return QuadraticFunction([[t * x for x in row] for row in self.A], [t * x for x in self.b], t * self.c)

    def translated(self, y) -> "QuadraticFunction":
        """x -> f(x + y)."""
        n = self.n
        Ay = [sum(self.A[i][j] * y[j] for j in range(n)) for i in range(n)]
        b = [self.b[i] + Ay[i] for i in range(n)]
        yAy = sum(y[i] * Ay[i] for i in range(n))
        c = self.c + sum(self.b[i] * y[i] for i in range(n)) + yAy / 2
        return QuadraticFunction(self.A, b, c)

    def to_dict(self) -> dict:
        return {"A": [[str(x) for x in row] for row in self.A], "b": [str(x) for x in self.b], "c": str(self.c)}

    @classmethod
    def from_dict(cls, d: dict) -> "QuadraticFunction":
        A = [[Fraction(str(x)) for x in row] for row in d["A"]]
        b = [Fraction(str(x)) for x in d.get("b", [0] * len(A))]
        return cls(A, b, Fraction(str(d.get("c", 0))))


class SmoothFunction:
    """Smooth handle given by vectorized callables on arrays (m, n).

    ``hessian`` returns (m, n, n); ``value`` is optional.
    """

    kind = "smooth_sampled"

    def __init__(self, n: int, hessian: Callable, value: Callable | None = None):
        self.n = n
        self._hessian = hessian
        self._value = value

    def hessian(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.asarray(self._hessian(X))

    def value(self, X) -> np.ndarray:
        if self._value is None:
            raise ValueError("this handle carries no value function")
        return np.asarray(self._value(np.atleast_2d(np.asarray(X, dtype=float))))

    def add_affine(self, a, b0=0) -> "SmoothFunction":
        a = np.array([float(v) for v in a])
        val = None
        if self._value is not None:
            val = lambda X, f=self._value: f(X) + X @ a + float(b0)
        return SmoothFunction(self.n, self._hessian, val)

    def scaled(self, t) -> "SmoothFunction":
        t = float(t)
        val = None if self._value is None else (lambda X, f=self._value: t * f(X))
        return SmoothFunction(self.n, lambda X, h=self._hessian: t * h(X), val)

    def translated(self, y) -> "SmoothFunction":
        y = np.array([float(v) for v in y])
        val = None if self._value is None else (lambda X, f=self._value: f(X + y))
        return SmoothFunction(self.n, lambda X, h=self._hessian: h(X + y), val)


class MaxAffineFunction:
    """f(x) = max_i <a_i, x> + b_i with exact rational data."""

    kind = "max_affine"

    def __init__(self, pieces: Sequence[tuple]):
        if not pieces:
            raise ValueError("max-affine function needs at least one piece")
        self.pieces = [(tuple(Fraction(v) for v in a), Fraction(b)) for a, b in pieces]
        self.n = len(self.pieces[0][0])

    def value_exact(self, x) -> Fraction:
        return max(sum((ai * xi for ai, xi in zip(a, x)), Fraction(0)) + b for a, b in self.pieces)

    def value(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        A = np.array([[float(v) for v in a] for a, _ in self.pieces])
        B = np.array([float(b) for _, b in self.pieces])
        return np.max(X @ A.T + B, axis=1)

    def add_affine(self, a, b0=0) -> "MaxAffineFunction":
        return MaxAffineFunction([(tuple(x + Fraction(y) for x, y in zip(p, a)), q + Fraction(b0)) for p, q in self.pieces])

    def scaled(self, t) -> "MaxAffineFunction":
        t = Fraction(t)
        if t < 0:
            raise ValueError("only nonnegative scaling keeps convexity")
        return MaxAffineFunction([(tuple(t * x for x in p), t * q) for p, q in self.pieces])

    def translated(self, y) -> "MaxAffineFunction":
        return MaxAffineFunction(
            [(p, q + sum((x * Fraction(v) for x, v in zip(p, y)), Fraction(0))) for p, q in self.pieces]
        )

    def maximum(self, other: "MaxAffineFunction") -> "MaxAffineFunction":
        return MaxAffineFunction(self.pieces + other.pieces)

    def to_dict(self) -> list:
        return [{"a": [str(v) for v in a], "b": str(b)} for a, b in self.pieces]

    @classmethod
    def from_dict(cls, d: list) -> "MaxAffineFunction":
        return cls([([Fraction(str(v)) for v in p["a"]], Fraction(str(p["b"]))) for p in d])


def mixed_ma_quadratics(*qs: QuadraticFunction):
    """Lebesgue density of the mixed Monge-Ampere measure of quadratics: D(A_1..A_n)."""
    if any(not isinstance(q, QuadraticFunction) for q in qs):
        raise TypeError("mixed_ma_quadratics needs quadratic handles")
    return mixed_discriminant(*[q.A for q in qs])


def _identity(n, exact=True):
    one = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def hessian_density(fs: Sequence, x, tail: Sequence | None = None):
    """C(n,k) * D(D^2 f_1(x), ..., D^2 f_k(x), T_{k+1}, ..., T_n), identity tail by default.

    Exact when every handle is quadratic with exact entries and the tail is exact.
    """
    k = len(fs)
    n = fs[0].n
    if tail is None:
        tail = [_identity(n)] * (n - k)
    if len(tail) != n - k:
        raise ValueError("tail must hold n - k matrices")
    for f in fs:
        if not hasattr(f, "hessian"):
            raise TypeError("handle exposes no Hessian")
    if all(isinstance(f, QuadraticFunction) for f in fs) and all(_is_exact_matrix(T) for T in tail):
        if all(_is_exact_matrix(f.A) for f in fs):
            return comb(n, k) * mixed_discriminant(*[f.A for f in fs], *tail)
    X = np.atleast_2d(np.asarray(x, dtype=float))
    Hs = [f.hessian(X) for f in fs]
    Ts = [np.array(T, dtype=float) for T in tail]
    val = comb(n, k) * mixed_discriminant(*Hs, *Ts)
    return val[0] if np.ndim(x) == 1 else val


# MAVal: linear combinations of mixed Monge-Ampere operators


@dataclass(frozen=True)
class MixedMA:
    """Psi = sum_t coef_t * MA(.[k], T_{t,k+1}, ..., T_{t,n}) with density normalization C(n,k).

    The density of Psi on Hessians H_1..H_k is
    C(n,k) * sum_t coef_t * D(H_1, ..., H_k, T_t).
    """

    n: int
    k: int
    terms: tuple  # ((coef, (T_{k+1}, ..., T_n)), ...)

    @classmethod
    def hessian_type(cls, n: int, k: int) -> "MixedMA":
        """Identity tails: density [D^2 f]_k (Hess_k)."""
        return cls(n, k, ((Fraction(1), tuple(tuple(map(tuple, _identity(n))) for _ in range(n - k))),))

    def __add__(self, other: "MixedMA") -> "MixedMA":
        return MixedMA(self.n, self.k, self.terms + other.terms)

    def scaled(self, c) -> "MixedMA":
        return MixedMA(self.n, self.k, tuple((as_exact(c) * a, T) for a, T in self.terms))

    def density(self, hessians: Sequence[np.ndarray]) -> np.ndarray:
        """Numeric density from Hessian arrays (m, n, n), by the subset formula."""
        c = comb(self.n, self.k)
        total = 0
        for coef, tails in self.terms:
            Ts = [np.array(T, dtype=float) for T in tails]
            total = total + complex(coef) * mixed_discriminant(*hessians, *Ts)
        return c * total

    def density_tensor_exact(self) -> dict:
        """K with density(H_1..H_k) = sum K[(a_1,b_1),...,(a_k,b_k)] prod_j H_j[a_j, b_j].

        Computed from unit matrices E_ab with the column-permutation formula:
        E_ab only contributes through column b, so slot j is pinned to
        column b_j and the tails fill the remaining columns.
        """
        n, k = self.n, self.k
        out: dict = {}
        for rows in product(range(n), repeat=k):
            for cols in permutations(range(n), k):
                free = [c for c in range(n) if c not in cols]
                val = Fraction(0)
                for coef, tails in self.terms:
                    acc = Fraction(0)
                    for assign in permutations(range(n - k)):
                        M = [[Fraction(0)] * n for _ in range(n)]
                        for j in range(k):
                            M[rows[j]][cols[j]] = Fraction(1)
                        for slot, c in zip(assign, free):
                            T = tails[slot]
                            for r in range(n):
                                M[r][c] = Fraction(T[r][c])
                        acc += exact_det(M)
                    val += as_exact(coef) * acc
                if val != 0:
                    key = tuple(zip(rows, cols))
                    out[key] = as_exact(val * comb(n, k) / factorial(n))
        return out

    def to_dict(self) -> dict:
        return {
            "terms": [
                {"coef": str(a), "tails": [[[str(x) for x in row] for row in T] for T in tails]}
                for a, tails in self.terms
            ]
        }

    @classmethod
    def from_dict(cls, n: int, k: int, d: dict) -> "MixedMA":
        terms = tuple(
            (
                Fraction(t["coef"]),
                tuple(tuple(tuple(Fraction(x) for x in row) for row in T) for T in t["tails"]),
            )
            for t in d["terms"]
        )
        return cls(n, k, terms)


def q_of_psi(psi: MixedMA) -> Polynomial:
    """Q(Psi) = k! * C(n,k) * D(w_1 w_1^T, ..., w_k w_k^T, tails), exactly.

    Obtained by feeding rank-one Hessians -w_j w_j^T exp(-i<w_j,x>) into the
    density and matching against the factor (-1)^k / k!.
    """
    n, k = psi.n, psi.k
    shape = MatShape(n, k)
    K = psi.density_tensor_exact()
    terms: dict = {}
    for key, val in K.items():
        exp = [0] * shape.nvars
        for j, (a, b) in enumerate(key):
            exp[shape.index(a + 1, j + 1)] += 1
            exp[shape.index(b + 1, j + 1)] += 1
        exp = tuple(exp)
        terms[exp] = terms.get(exp, 0) + val * factorial(k)
    return Polynomial(shape, {e: c for e, c in terms.items() if c != 0})


@dataclass(frozen=True)
class MAValBasisElement:
    index: int
    shape: MatShape
    psi: MixedMA
    q_polynomial: Polynomial

    def to_dict(self) -> dict:
        return {"index": self.index, "q": str(self.q_polynomial), **self.psi.to_dict()}


def _random_tail(n: int, rng: random.Random):
    v = [rng.randint(-2, 2) for _ in range(n)]
    d = [rng.randint(1, 3) for _ in range(n)]
    return tuple(tuple(Fraction((d[i] if i == j else 0) + v[i] * v[j]) for j in range(n)) for i in range(n))


_MAVAL_CACHE: dict = {}


def maval_basis(shape: MatShape, seed: int = 0) -> list[MAValBasisElement]:
    """Basis Psi_j of MAVal_k with Q(Psi_j) equal to the j-th Groebner basis element.

    Random positive definite tails are drawn until their Q-polynomials span
    the space; each target is then solved for exactly.
    """
    key = (shape, seed)
    if key in _MAVAL_CACHE:
        return _MAVAL_CACHE[key]
    n, k = shape.n, shape.k
    gb = build_basis(shape)
    N = module_dimension(n, k)
    rng = random.Random(seed)
    if n == k:
        candidates = [MixedMA(n, k, ((Fraction(1), ()),))]
        qs = [q_of_psi(candidates[0])]
    else:
        candidates, qs = [], []
        ech = SparseEchelon()
        tries = 0
        while ech.rank < N:
            tries += 1
            if tries > 50 * N + 100:
                raise RuntimeError("random tails failed to span MAVal")
            tails = tuple(_random_tail(n, rng) for _ in range(n - k))
            psi = MixedMA(n, k, ((Fraction(1), tails),))
            q = q_of_psi(psi)
            if ech.add(q.terms):
                candidates.append(psi)
                qs.append(q)
    out = []
    for j, el in enumerate(gb.elements):
        coeffs = exact_solve([q.terms for q in qs], el.polynomial.terms)
        if coeffs is None:
            raise AssertionError("Groebner element outside the span of Q(Psi)")
        terms = tuple((c, cand.terms[0][1]) for c, cand in zip(coeffs, candidates) if c != 0)
        psi = MixedMA(n, k, terms)
        # Q is linear in Psi, so recombining the candidate Q's is an exact check
        recombined = Polynomial.zero(shape)
        for c, q in zip(coeffs, qs):
            if c != 0:
                recombined = recombined + q.scale(c)
        if recombined != el.polynomial:
            raise AssertionError("solved combination does not reproduce its target")
        out.append(MAValBasisElement(j, shape, psi, el.polynomial))
    _MAVAL_CACHE[key] = out
    return out


# discrete Monge-Ampere of max-affine functions


@dataclass(frozen=True)
class DiscreteMeasure:
    atoms: tuple  # ((point tuple of Fractions, weight Fraction), ...)

    def total_mass(self):
        return sum((w for _, w in self.atoms), Fraction(0))

    def mass_in_box(self, lo, hi):
        return sum(
            (w for x, w in self.atoms if all(a <= v <= b for v, a, b in zip(x, lo, hi))),
            Fraction(0),
        )


def _solve_exact(A, b):
    n = len(A)
    M = [list(row) + [bi] for row, bi in zip(A, b)]
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return None
        M[c], M[piv] = M[piv], M[c]
        p = M[c][c]
        M[c] = [x / p for x in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return tuple(M[r][n] for r in range(n))


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def hull_volume_exact(points: Sequence[tuple]) -> Fraction:
    """Exact n-volume of the convex hull of rational points (n <= 3)."""
    pts = sorted(set(tuple(Fraction(v) for v in p) for p in points))
    if not pts:
        return Fraction(0)
    n = len(pts[0])
    if n == 1:
        return pts[-1][0] - pts[0][0]
    if n == 2:
        if len(pts) < 3:
            return Fraction(0)
        lower, upper = [], []
        for p in pts:
            while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
                lower.pop()
            lower.append(p)
        for p in reversed(pts):
            while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
                upper.pop()
            upper.append(p)
        hull = lower[:-1] + upper[:-1]
        area = Fraction(0)
        for i in range(len(hull)):
            x1, y1 = hull[i]
            x2, y2 = hull[(i + 1) % len(hull)]
            area += x1 * y2 - x2 * y1
        return abs(area) / 2
    if n == 3:
        from scipy.spatial import ConvexHull, QhullError

        if len(pts) < 4:
            return Fraction(0)
        try:
            hull = ConvexHull(np.array(pts, dtype=float))
        except QhullError:
            return Fraction(0)
        verts = [pts[i] for i in hull.vertices]
        cen = tuple(sum(v[i] for v in verts) / len(verts) for i in range(3))
        vol = Fraction(0)
        for simplex in hull.simplices:
            a, b, c = (pts[i] for i in simplex)
            M = [[a[i] - cen[i], b[i] - cen[i], c[i] - cen[i]] for i in range(3)]
            vol += abs(exact_det(M))
        return vol / 6
    raise ValueError("hull volumes implemented for n <= 3")


def discrete_ma(f: MaxAffineFunction) -> DiscreteMeasure:
    """Monge-Ampere measure of a max-affine function: atoms at vertices, weight = vol(subdifferential)."""
    if not isinstance(f, MaxAffineFunction):
        raise TypeError("discrete_ma needs a max-affine handle")
    n = f.n
    if n > 3:
        raise ValueError("discrete_ma supports n <= 3")
    pieces = f.pieces
    seen = {}
    for S in combinations(range(len(pieces)), n + 1):
        a0, b0 = pieces[S[0]]
        A = [[pieces[i][0][c] - a0[c] for c in range(n)] for i in S[1:]]
        rhs = [b0 - pieces[i][1] for i in S[1:]]
        x = _solve_exact(A, rhs)
        if x is None or x in seen:
            continue
        val = f.value_exact(x)
        here = sum((a * v for a, v in zip(a0, x)), Fraction(0)) + b0
        if here != val:
            continue
        active = [a for a, b in pieces if sum((ai * v for ai, v in zip(a, x)), Fraction(0)) + b == val]
        seen[x] = hull_volume_exact(active)
    atoms = tuple((x, w) for x, w in sorted(seen.items()) if w != 0)
    return DiscreteMeasure(atoms)


def gradient_image_mass(f: MaxAffineFunction, lo, hi) -> float:
    """Independent oracle: vol of the gradient image of the box, via the lower hull of lifted gradients.

    Lower facets of conv{(a_i, -b_i)} correspond to vertices x of f; the
    projected facet volume is the subdifferential volume there.
    """
    from scipy.spatial import ConvexHull, QhullError

    n = f.n
    A = np.array([[float(v) for v in a] for a, _ in f.pieces])
    B = np.array([float(b) for _, b in f.pieces])
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if n == 1:
        # gradient image of [lo, hi] is [f'(lo-), f'(hi+)]
        def one_sided(x, pick):
            vals = A[:, 0] * x + B
            active = A[:, 0][vals >= vals.max() - 1e-9 * (1 + abs(vals.max()))]
            return pick(active)

        return max(one_sided(hi[0], np.max) - one_sided(lo[0], np.min), 0.0)
    lifted = np.hstack([A, -B[:, None]])
    apex = np.append(A.mean(axis=0), (-B).max() + 1.0 + np.ptp(B) + np.ptp(A))
    pts = np.vstack([lifted, apex])
    try:
        hull = ConvexHull(pts)
    except QhullError:
        return 0.0
    mass = 0.0
    for simplex, eq in zip(hull.simplices, hull.equations):
        normal, nh = eq[:n], eq[n]
        if nh >= -1e-12:
            continue
        x = normal / (-nh)
        if np.all(x >= lo - 1e-9) and np.all(x <= hi + 1e-9):
            verts = A[simplex] if np.all(simplex < len(A)) else None
            if verts is None:
                continue
            M = verts[1:] - verts[0]
            mass += abs(np.linalg.det(M)) / factorial(n)
    return mass
