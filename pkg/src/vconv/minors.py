"""k-minors of an n x k matrix, the module generated by their pairwise
products over polynomials in the last column, and division by its
Groebner basis.

Module view: a monomial splits into a *head* (exponents of the first k-1
columns) and a *tail* (exponents of the last column).  Heads index the
free-module generators, tails live in the coefficient ring.  One monomial
divides another in the module sense when the heads agree and the tail
divides componentwise.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, combinations_with_replacement, permutations, product
from math import comb
from typing import Sequence

from .linalg import SparseEchelon, rank as exact_rank
from .poly import MatShape, Polynomial, monomial_str
from .scalars import as_exact

__all__ = [
    "module_dimension",
    "minor",
    "MinorProduct",
    "MinorGroebnerBasis",
    "DivisionCertificate",
    "build_basis",
    "brute_force_rank",
    "divide",
    "membership",
    "side_condition_check",
    "buchberger_check",
    "graded_dimension",
    "codimension",
    "highest_weight_check",
    "restriction_factorization_check",
    "exact_division",
    "diagonal_change",
    "diagonal_part",
    "offdiagonal_part",
]


def _binom(a: int, b: int) -> int:
    return comb(a, b) if 0 <= b <= a else 0


def module_dimension(n: int, k: int) -> int:
    """C(n,k)^2 - C(n,k-1) C(n,n-k-1): dimension of the span of minor products."""
    return _binom(n, k) ** 2 - _binom(n, k - 1) * _binom(n, n - k - 1)


def _perm_sign(p: Sequence[int]) -> int:
    sign, seen = 1, [False] * len(p)
    for i in range(len(p)):
        if not seen[i]:
            j, length = i, 0
            while not seen[j]:
                seen[j] = True
                j = p[j]
                length += 1
            if length % 2 == 0:
                sign = -sign
    return sign


def minor(shape: MatShape, rows: Sequence[int]) -> Polynomial:
    """Determinant of the k x k submatrix on the given (1-based, increasing) rows."""
    rows = tuple(rows)
    k = shape.k
    if len(rows) != k or any(b <= a for a, b in zip(rows, rows[1:])):
        raise ValueError(f"need a strictly increasing {k}-tuple of rows, got {rows}")
    if rows[0] < 1 or rows[-1] > shape.n:
        raise ValueError(f"rows {rows} out of range 1..{shape.n}")
    terms = {}
    for perm in permutations(range(k)):
        exp = [0] * shape.nvars
        for col, r in enumerate(perm):
            exp[shape.index(rows[r], col + 1)] += 1
        terms[tuple(exp)] = Fraction(_perm_sign(perm))
    return Polynomial(shape, terms)


@dataclass(frozen=True)
class MinorProduct:
    I: tuple
    I2: tuple
    polynomial: Polynomial
    initial: tuple
    lead: object

    def to_dict(self) -> dict:
        shape = self.polynomial.shape
        return {
            "I": list(self.I),
            "I2": list(self.I2),
            "initial": monomial_str(shape, self.initial),
            "terms": str(self.polynomial),
        }


def _split(shape: MatShape, exp: tuple) -> tuple[tuple, tuple]:
    cut = shape.n * (shape.k - 1)
    return exp[:cut], exp[cut:]


@dataclass(frozen=True)
class MinorGroebnerBasis:
    shape: MatShape
    elements: tuple

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, j):
        return self.elements[j]

    def polynomials(self) -> list[Polynomial]:
        return [e.polynomial for e in self.elements]

    def to_dict(self) -> dict:
        return {"n": self.shape.n, "k": self.shape.k, "elements": [e.to_dict() for e in self.elements]}


def brute_force_rank(shape: MatShape) -> int:
    """Rank over Q of all products [I][I2] (every ordered pair), the independent dimension oracle."""
    tuples = list(combinations(range(1, shape.n + 1), shape.k))
    mins = {I: minor(shape, I) for I in tuples}
    vecs = [(mins[a] * mins[b]).terms for a in tuples for b in tuples]
    return exact_rank(vecs)


_BASIS_CACHE: dict = {}


def build_basis(shape: MatShape) -> MinorGroebnerBasis:
    """Ordered generating set of products [I][I2], one per initial monomial.

    Several products with I >= I2 can share an initial monomial (they differ
    by Pluecker relations).  For each initial monomial the product with
    I2 <= I entrywise is kept; these are exactly the standard products, and
    there are N_{n,k} of them.
    """
    if shape in _BASIS_CACHE:
        return _BASIS_CACHE[shape]
    tuples = sorted(combinations(range(1, shape.n + 1), shape.k), reverse=True)
    mins = {I: minor(shape, I) for I in tuples}
    chosen = {}
    for a in tuples:
        for b in tuples:
            if not a >= b:
                continue
            if not all(x >= y for x, y in zip(a, b)):
                continue
            P = mins[a] * mins[b]
            init, lead = P.initial_term()
            if init in chosen:
                raise AssertionError("standard products with equal initial terms")
            chosen[init] = MinorProduct(a, b, P, init, lead)
    elements = tuple(chosen[m] for m in sorted(chosen, reverse=True))
    if len(elements) != module_dimension(shape.n, shape.k):
        raise AssertionError("basis size disagrees with the dimension formula")
    basis = MinorGroebnerBasis(shape, elements)
    _BASIS_CACHE[shape] = basis
    return basis


@dataclass
class DivisionCertificate:
    input: Polynomial
    coefficients: list
    remainder: Polynomial
    basis: MinorGroebnerBasis = field(repr=False)
    order: int | None = None
    sweeps: int = 1

    def recompose(self) -> Polynomial:
        total = self.remainder
        for g, P in zip(self.coefficients, self.basis.polynomials()):
            if not g.is_zero():
                total = total + g * P
        return total

    def to_dict(self) -> dict:
        out = {
            "input": str(self.input),
            "coefficients": [str(g) for g in self.coefficients],
            "remainder": str(self.remainder),
        }
        if self.order is not None:
            out["order"] = self.order
        return out


class _Reducer:
    """Module-sense divisibility lookups for a basis."""

    def __init__(self, basis: MinorGroebnerBasis):
        self.basis = basis
        self.shape = basis.shape
        self.by_head: dict = {}
        self.heads = []
        for j, el in enumerate(basis.elements):
            head, tail = _split(self.shape, el.initial)
            self.by_head.setdefault(head, []).append((j, tail))
            self.heads.append(head)

    def divisor(self, exp: tuple, j_only: int | None = None):
        head, tail = _split(self.shape, exp)
        for j, btail in self.by_head.get(head, ()):
            if j_only is not None and j != j_only:
                continue
            if all(a >= b for a, b in zip(tail, btail)):
                return j, tuple(a - b for a, b in zip(tail, btail))
        return None


def _tail_monomial(shape: MatShape, tail: tuple) -> tuple:
    return (0,) * (shape.n * (shape.k - 1)) + tail


def _as_polynomial(f, basis):
    order = None
    if hasattr(f, "to_polynomial"):
        order = f.order
        f = f.to_polynomial()
    if not isinstance(f, Polynomial):
        raise TypeError("divide expects a Polynomial or TruncatedSeries")
    if f.shape != basis.shape:
        raise ValueError(f"shape mismatch: {f.shape} vs {basis.shape}")
    return f, order


def divide(f, basis: MinorGroebnerBasis) -> DivisionCertificate:
    """Normal-form division by the ordered basis.

    Basis elements are processed in order; each one absorbs every monomial
    it divides (module sense).  Truncated series are divided as their
    polynomial truncation, which is exact up to the truncation order
    because the basis is homogeneous.
    """
    f, order = _as_polynomial(f, basis)
    shape = basis.shape
    red = _Reducer(basis)
    current = dict(f.terms)
    coeffs: list[dict] = [dict() for _ in basis.elements]
    sweeps = 0
    for _ in range(len(basis.elements) + 1):
        changed = False
        for j, el in enumerate(basis.elements):
            while True:
                hits = []
                for exp, c in current.items():
                    r = red.divisor(exp, j_only=j)
                    if r is not None:
                        hits.append((r[1], c))
                if not hits:
                    break
                changed = True
                g = {}
                for tail, c in hits:
                    m = _tail_monomial(shape, tail)
                    g[m] = g.get(m, 0) + c / el.lead
                for m, c in g.items():
                    coeffs[j][m] = coeffs[j].get(m, 0) + c
                    for pe, pc in el.polynomial.terms.items():
                        e = tuple(a + b for a, b in zip(pe, m))
                        v = current.get(e, 0) - c * pc
                        if v == 0:
                            current.pop(e, None)
                        else:
                            current[e] = v
        if not changed:
            break
        sweeps += 1
    gs = [Polynomial(shape, {m: as_exact(c) for m, c in cj.items() if c != 0}) for cj in coeffs]
    rem = Polynomial(shape, {e: as_exact(c) for e, c in current.items()})
    return DivisionCertificate(f, gs, rem, basis, order, max(sweeps, 1))


def membership(f, basis: MinorGroebnerBasis) -> bool:
    return divide(f, basis).remainder.is_zero()


def side_condition_check(basis: MinorGroebnerBasis) -> dict:
    """No multiple of P_j - in(P_j) has a monomial divisible by in(P_j).

    Multiplying by last-column monomials leaves heads unchanged, so this
    holds iff no monomial of P_j - in(P_j) shares the head of in(P_j);
    checking generator supports is exhaustive.  The report also counts the
    stronger cross condition (heads of *other* initial terms), which fails
    for k >= 2 and is reported for information only.
    """
    heads = {}
    for j, el in enumerate(basis.elements):
        heads.setdefault(_split(basis.shape, el.initial)[0], []).append(j)
    violations = []
    cross = []
    checked = 0
    for j, el in enumerate(basis.elements):
        own = _split(basis.shape, el.initial)[0]
        for exp in el.polynomial.terms:
            if exp == el.initial:
                continue
            checked += 1
            head = _split(basis.shape, exp)[0]
            if head == own:
                violations.append((j, monomial_str(basis.shape, exp)))
            elif head in heads:
                cross.append((j, heads[head], monomial_str(basis.shape, exp)))
    return {
        "monomials_checked": checked,
        "violations": violations,
        "holds": not violations,
        "cross_condition_holds": not cross,
        "cross_examples": cross[:5],
    }


def _reduce_fully(poly: dict, basis: MinorGroebnerBasis, red: _Reducer) -> tuple[dict, int]:
    """Leading-term reduction to a remainder; returns (remainder, steps)."""
    shape = basis.shape
    current = dict(poly)
    remainder = {}
    steps = 0
    while current:
        lead = max(current)
        c = current[lead]
        r = red.divisor(lead)
        if r is None:
            remainder[lead] = c
            del current[lead]
            continue
        j, tail = r
        el = basis.elements[j]
        m = _tail_monomial(shape, tail)
        f = c / el.lead
        steps += 1
        for pe, pc in el.polynomial.terms.items():
            e = tuple(a + b for a, b in zip(pe, m))
            v = current.get(e, 0) - f * pc
            if v == 0:
                current.pop(e, None)
            else:
                current[e] = v
    return remainder, steps


def buchberger_check(basis: MinorGroebnerBasis) -> dict:
    """Reduce every S-pair of elements sharing an initial head; all must vanish."""
    shape = basis.shape
    red = _Reducer(basis)
    pairs = 0
    max_steps = 0
    failures = []
    els = basis.elements
    for i, j in combinations(range(len(els)), 2):
        hi, ti = _split(shape, els[i].initial)
        hj, tj = _split(shape, els[j].initial)
        if hi != hj:
            continue
        pairs += 1
        lcm = tuple(max(a, b) for a, b in zip(ti, tj))
        mi = _tail_monomial(shape, tuple(a - b for a, b in zip(lcm, ti)))
        mj = _tail_monomial(shape, tuple(a - b for a, b in zip(lcm, tj)))
        s = els[i].polynomial.mul_monomial(mi, Fraction(1) / els[i].lead) - els[j].polynomial.mul_monomial(
            mj, Fraction(1) / els[j].lead
        )
        rem, steps = _reduce_fully(s.terms, basis, red)
        max_steps = max(max_steps, steps)
        if rem:
            failures.append({"pair": [i, j], "remainder_terms": len(rem)})
    return {
        "n": shape.n,
        "k": shape.k,
        "elements": len(els),
        "pairs": pairs,
        "max_reduction_length": max_steps,
        "all_reduced": not failures,
        "failures": failures,
    }


def _exponents(nvars: int, degree: int):
    for combo in combinations_with_replacement(range(nvars), degree):
        e = [0] * nvars
        for v in combo:
            e[v] += 1
        yield tuple(e)


def graded_dimension(shape: MatShape, m: int) -> int:
    """Dimension of the degree-m slice of the module (exact rank)."""
    k = shape.k
    if m < 2 * k:
        return 0
    basis = build_basis(shape)
    ech = SparseEchelon()
    for tail in _exponents(shape.n, m - 2 * k):
        mono = _tail_monomial(shape, tail)
        for el in basis.elements:
            ech.add(el.polynomial.mul_monomial(mono).terms)
    return ech.rank


def codimension(shape: MatShape, d: int) -> int:
    """Sum of graded dimensions below degree 2k+d."""
    return sum(graded_dimension(shape, m) for m in range(2 * shape.k + d))


def exact_division(f: Polynomial, g: Polynomial) -> tuple[Polynomial, Polynomial]:
    """Multivariate division of f by a single g in the lex order: f = q g + r."""
    if g.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    gl, gc = g.initial_term()
    current = dict(f.terms)
    q, r = {}, {}
    while current:
        lead = max(current)
        c = current.pop(lead)
        if all(a >= b for a, b in zip(lead, gl)):
            m = tuple(a - b for a, b in zip(lead, gl))
            t = c / gc
            q[m] = q.get(m, 0) + t
            for ge, gcoef in g.terms.items():
                if ge == gl:
                    continue
                e = tuple(a + b for a, b in zip(ge, m))
                v = current.get(e, 0) - t * gcoef
                if v == 0:
                    current.pop(e, None)
                else:
                    current[e] = v
        else:
            r[lead] = c
    return Polynomial(f.shape, q), Polynomial(f.shape, r)


def highest_weight_check(shape: MatShape, d: int, seed: int = 0, trials: int = 3) -> dict:
    """Check that Delta_k^2 * w[1,k]^d is fixed by upper unitriangular g and has the expected torus weight.

    The weight is read from the row-degree vector of each monomial, which is
    the symbolic content of substituting w -> diag(h) w.
    """
    n, k = shape.n, shape.k
    rng = random.Random(seed)
    delta = minor(shape, tuple(range(1, k + 1)))
    P = delta * delta * Polynomial.variable(shape, 1, k) ** d
    invariant = True
    for _ in range(trials):
        g = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            g[i][i] = Fraction(1)
            for j in range(i + 1, n):
                g[i][j] = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
        gT = [[g[j][i] for j in range(n)] for i in range(n)]
        if P.transform_rows(gT) != P:
            invariant = False
    weights = set()
    for exp in P.terms:
        weights.add(tuple(sum(exp[(j * n) + i] for j in range(k)) for i in range(n)))
    expected = tuple([d + 2] + [2] * (k - 1) + [0] * (n - k))
    weight = weights.pop() if len(weights) == 1 else None
    return {
        "n": n,
        "k": k,
        "d": d,
        "unitriangular_invariant": invariant,
        "weight": list(weight) if weight else None,
        "expected_weight": list(expected),
        "holds": invariant and weight == expected,
    }


def restriction_factorization_check(p: Polynomial, delta: Polynomial, E_basis: Sequence[Sequence]) -> dict:
    """Does p restricted to E^k equal delta|_E^2 times a polynomial in the last column?"""
    k = p.shape.k
    if len(E_basis) != k:
        raise ValueError("E must be given by k vectors")
    pE = p.restrict(E_basis)
    dE = delta.restrict(E_basis)
    if dE.is_zero():
        return {"status": "resample", "holds": None}
    q, r = exact_division(pE, dE * dE)
    holds = r.is_zero() and q.depends_only_on_column(k)
    return {
        "status": "ok",
        "holds": holds,
        "quotient": str(q) if r.is_zero() else None,
        "remainder_terms": len(r),
        "quotient_last_column_only": q.depends_only_on_column(k) if r.is_zero() else False,
    }


def _forward_matrix(k: int):
    """Columns of T(u) = u M: (u_j + u_k)/k for j < k and u_k/k - sum_{j<k} u_j/k."""
    M = [[Fraction(0)] * k for _ in range(k)]
    for j in range(k - 1):
        M[j][j] = Fraction(1, k)
        M[k - 1][j] = Fraction(1, k)
        M[j][k - 1] = Fraction(-1, k)
    M[k - 1][k - 1] = Fraction(1, k)
    return M


def _inverse_matrix(k: int):
    """u_j = k w_j - sum w for j < k, u_k = sum w."""
    M = [[Fraction(0)] * k for _ in range(k)]
    for j in range(k - 1):
        for l in range(k):
            M[l][j] = Fraction(-1)
        M[j][j] += k
    for l in range(k):
        M[l][k - 1] = Fraction(1)
    return M


def diagonal_change(obj, direction: str):
    """Apply the diagonal coordinate change T or its inverse.

    ``to_diagonal_coords`` maps a point w to T(w) and a polynomial p to p o T;
    ``from_diagonal_coords`` uses the inverse.  Points may be exact nested
    lists or numpy arrays of shape (..., n, k).
    """
    if direction not in ("to_diagonal_coords", "from_diagonal_coords"):
        raise ValueError(f"unknown direction {direction!r}")
    if isinstance(obj, Polynomial):
        k = obj.shape.k
        M = _forward_matrix(k) if direction == "to_diagonal_coords" else _inverse_matrix(k)
        return obj.transform_columns(M)
    import numpy as np

    if isinstance(obj, np.ndarray):
        k = obj.shape[-1]
        M = _forward_matrix(k) if direction == "to_diagonal_coords" else _inverse_matrix(k)
        return obj @ np.array([[float(x) for x in row] for row in M])
    rows = [list(r) for r in obj]
    k = len(rows[0])
    M = _forward_matrix(k) if direction == "to_diagonal_coords" else _inverse_matrix(k)
    return [[sum((row[l] * M[l][j] for l in range(k)), Fraction(0)) for j in range(k)] for row in rows]


def diagonal_part(w):
    """d(w): every column replaced by the column average."""
    import numpy as np

    W = np.asarray(w)
    avg = W.mean(axis=-1, keepdims=True)
    return np.broadcast_to(avg, W.shape).copy()


def offdiagonal_part(w):
    import numpy as np

    W = np.asarray(w)
    return W - diagonal_part(W)
