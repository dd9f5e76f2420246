"""Sparse exact polynomials in the entries of an n x k matrix of variables.

A monomial is stored as a flat exponent tuple in column-major order: entry
``(j-1)*n + (i-1)`` is the exponent of ``w[i,j]``.  Comparing those tuples
lexicographically gives the term order used everywhere in the package,
``w[1,1] > w[2,1] > ... > w[n,1] > w[1,2] > ... > w[n,k]``.

Polynomials in n ordinary variables ``x_1..x_n`` use the shape ``(n, 1)``;
the parser accepts ``x[i]`` as an alias for ``w[i,1]`` in that case.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .scalars import GaussianRational, as_exact, exact_str

__all__ = [
    "MatShape",
    "Polynomial",
    "PolyParseError",
    "parse_poly",
    "render_poly",
    "monomial_str",
]


@dataclass(frozen=True)
class MatShape:
    """Shape of the matrix of variables: ``n`` rows, ``k`` columns."""

    n: int
    k: int

    def __post_init__(self):
        if not (isinstance(self.n, int) and isinstance(self.k, int)):
            raise TypeError("MatShape entries must be integers")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"need 1 <= k <= n, got n={self.n}, k={self.k}")

    @property
    def nvars(self) -> int:
        return self.n * self.k

    def index(self, row: int, col: int) -> int:
        """Flat position of ``w[row,col]`` (1-based indices)."""
        if not (1 <= row <= self.n and 1 <= col <= self.k):
            raise IndexError(f"w[{row},{col}] outside a {self.n}x{self.k} matrix")
        return (col - 1) * self.n + (row - 1)

    def position(self, flat: int) -> tuple[int, int]:
        """Inverse of :meth:`index`, returning 1-based ``(row, col)``."""
        col, row = divmod(flat, self.n)
        return row + 1, col + 1

    def zero_exponent(self) -> tuple:
        return (0,) * self.nvars

    def column_slice(self, col: int) -> slice:
        return slice((col - 1) * self.n, col * self.n)


def _add_exp(a: tuple, b: tuple) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def _scalar(c):
    if isinstance(c, (int, Fraction, GaussianRational)) and not isinstance(c, bool):
        return as_exact(c)
    raise TypeError(f"polynomial coefficients must be exact, got {type(c).__name__}")


class Polynomial:
    """Immutable sparse polynomial with exact coefficients.

    ``terms`` maps flat exponent tuples to nonzero Fractions or
    GaussianRationals.  Iteration is in descending term order.
    """

    __slots__ = ("shape", "terms", "_hash")

    def __init__(self, shape: MatShape, terms: Mapping[tuple, object] | None = None, *, _trusted=False):
        self.shape = shape
        if _trusted:
            self.terms = terms
        else:
            clean = {}
            nv = shape.nvars
            for exp, c in (terms or {}).items():
                exp = tuple(int(e) for e in exp)
                if len(exp) != nv or any(e < 0 for e in exp):
                    raise ValueError(f"bad exponent {exp} for shape {shape}")
                c = _scalar(c)
                if c != 0:
                    clean[exp] = clean.get(exp, 0) + c
                    if clean[exp] == 0:
                        del clean[exp]
                    else:
                        clean[exp] = as_exact(clean[exp])
            self.terms = clean
        self._hash = None

    # constructors
    @classmethod
    def zero(cls, shape: MatShape) -> "Polynomial":
        return cls(shape, {}, _trusted=True)

    @classmethod
    def constant(cls, shape: MatShape, c) -> "Polynomial":
        return cls(shape, {shape.zero_exponent(): c})

    @classmethod
    def one(cls, shape: MatShape) -> "Polynomial":
        return cls.constant(shape, 1)

    @classmethod
    def variable(cls, shape: MatShape, row: int, col: int = 1) -> "Polynomial":
        exp = [0] * shape.nvars
        exp[shape.index(row, col)] = 1
        return cls(shape, {tuple(exp): Fraction(1)}, _trusted=True)

    @classmethod
    def monomial(cls, shape: MatShape, exp: Sequence[int], c=1) -> "Polynomial":
        return cls(shape, {tuple(exp): c})

    # basic queries
    def is_zero(self) -> bool:
        return not self.terms

    def is_rational(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.terms.values())

    def __len__(self):
        return len(self.terms)

    def __iter__(self) -> Iterator[tuple[tuple, object]]:
        for exp in sorted(self.terms, reverse=True):
            yield exp, self.terms[exp]

    def monomials(self) -> list[tuple]:
        return sorted(self.terms, reverse=True)

    def coefficient(self, exp: Sequence[int]):
        return self.terms.get(tuple(exp), Fraction(0))

    def initial_term(self) -> tuple[tuple, object]:
        if not self.terms:
            raise ValueError("the zero polynomial has no initial term")
        exp = max(self.terms)
        return exp, self.terms[exp]

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def column_degree(self) -> tuple | None:
        """Column multidegree if homogeneous in every column, else ``None``."""
        if not self.terms:
            return None
        degs = {self._coldeg(e) for e in self.terms}
        return degs.pop() if len(degs) == 1 else None

    def _coldeg(self, exp: tuple) -> tuple:
        n = self.shape.n
        return tuple(sum(exp[j * n:(j + 1) * n]) for j in range(self.shape.k))

    def homogeneous_part(self, degree: int) -> "Polynomial":
        return Polynomial(self.shape, {e: c for e, c in self.terms.items() if sum(e) == degree}, _trusted=True)

    def truncate(self, order: int) -> "Polynomial":
        return Polynomial(self.shape, {e: c for e, c in self.terms.items() if sum(e) <= order}, _trusted=True)

    def depends_only_on_column(self, col: int) -> bool:
        sl = self.shape.column_slice(col)
        for exp in self.terms:
            rest = exp[:sl.start] + exp[sl.stop:]
            if any(rest):
                return False
        return True

    # arithmetic
    def _check(self, other: "Polynomial"):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch: {self.shape} vs {other.shape}")

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction, GaussianRational)) and not isinstance(other, bool):
            return Polynomial.constant(self.shape, other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        out = dict(self.terms)
        for e, c in o.terms.items():
            v = out.get(e, 0) + c
            if v == 0:
                out.pop(e, None)
            else:
                out[e] = as_exact(v)
        return Polynomial(self.shape, out, _trusted=True)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.shape, {e: -c for e, c in self.terms.items()}, _trusted=True)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def scale(self, c) -> "Polynomial":
        c = _scalar(c)
        if c == 0:
            return Polynomial.zero(self.shape)
        return Polynomial(self.shape, {e: as_exact(v * c) for e, v in self.terms.items()}, _trusted=True)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)) and not isinstance(other, bool):
            return self.scale(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check(other)
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = _add_exp(e1, e2)
                out[e] = out.get(e, 0) + c1 * c2
        return Polynomial(self.shape, {e: as_exact(c) for e, c in out.items() if c != 0}, _trusted=True)

    __rmul__ = __mul__

    def __truediv__(self, c):
        c = _scalar(c)
        if isinstance(c, GaussianRational):
            return self.scale(GaussianRational(1) / c)
        return self.scale(1 / c)

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            return NotImplemented
        result = Polynomial.one(self.shape)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def mul_monomial(self, exp: tuple, c=1) -> "Polynomial":
        c = _scalar(c)
        return Polynomial(
            self.shape, {_add_exp(e, exp): as_exact(v * c) for e, v in self.terms.items()}, _trusted=True
        )

    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.shape == other.shape and self.terms == other.terms
        if isinstance(other, (int, Fraction, GaussianRational)) and not isinstance(other, bool):
            return self == Polynomial.constant(self.shape, other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.shape, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self):
        return f"Polynomial({self.shape.n}x{self.shape.k}: {render_poly(self)})"

    def __str__(self):
        return render_poly(self)

    # calculus and substitution
    def derivative(self, row: int, col: int = 1) -> "Polynomial":
        idx = self.shape.index(row, col)
        out = {}
        for e, c in self.terms.items():
            if e[idx]:
                ne = list(e)
                ne[idx] -= 1
                out[tuple(ne)] = as_exact(c * e[idx])
        return Polynomial(self.shape, out, _trusted=True)

    def substitute(self, images: Sequence["Polynomial"]) -> "Polynomial":
        """Replace the flat variable ``v`` by ``images[v]`` (all of one shape)."""
        if len(images) != self.shape.nvars:
            raise ValueError("need one image per variable")
        if not self.terms:
            return Polynomial.zero(images[0].shape) if images else self
        target = images[0].shape
        if any(img.shape != target for img in images):
            raise ValueError("images must share a shape")
        cache: dict = {}

        def power(v, e):
            key = (v, e)
            if key not in cache:
                cache[key] = images[v] if e == 1 else power(v, e - 1) * images[v]
            return cache[key]

        acc: dict = {}
        for exp, c in self.terms.items():
            term = Polynomial.constant(target, c)
            for v, e in enumerate(exp):
                if e:
                    term = term * power(v, e)
            for te, tc in term.terms.items():
                acc[te] = acc.get(te, 0) + tc
        return Polynomial(target, {e: as_exact(c) for e, c in acc.items() if c != 0}, _trusted=True)

    def linear_change(self, matrix_images: Mapping[tuple[int, int], Mapping[tuple[int, int], object]], target: MatShape):
        """Substitute ``w[i,j] -> sum c * u[a,b]`` given as nested maps."""
        images = []
        for flat in range(self.shape.nvars):
            row, col = self.shape.position(flat)
            lin = matrix_images[(row, col)]
            img = Polynomial.zero(target)
            terms = {}
            for (a, b), c in lin.items():
                c = _scalar(c)
                if c != 0:
                    exp = [0] * target.nvars
                    exp[target.index(a, b)] = 1
                    terms[tuple(exp)] = c
            img = Polynomial(target, terms)
            images.append(img)
        return self.substitute(images)

    def transform_columns(self, M: Sequence[Sequence]) -> "Polynomial":
        """Return ``q(w) = p(w M)`` for a k x k matrix ``M``."""
        k = self.shape.k
        imgs = {}
        for i in range(1, self.shape.n + 1):
            for j in range(1, k + 1):
                imgs[(i, j)] = {(i, l): M[l - 1][j - 1] for l in range(1, k + 1)}
        return self.linear_change(imgs, self.shape)

    def transform_rows(self, A: Sequence[Sequence]) -> "Polynomial":
        """Return ``q(w) = p(A w)`` for an n x n matrix ``A``."""
        n = self.shape.n
        imgs = {}
        for i in range(1, n + 1):
            for j in range(1, self.shape.k + 1):
                imgs[(i, j)] = {(l, j): A[i - 1][l - 1] for l in range(1, n + 1)}
        return self.linear_change(imgs, self.shape)

    def restrict(self, basis: Sequence[Sequence]) -> "Polynomial":
        """Restrict to ``E^k`` for ``E`` spanned by the given vectors.

        Returns ``q(u) = p(B u)`` where ``B`` has the vectors as columns and
        ``u`` is an r x k matrix of coordinates.
        """
        r = len(basis)
        if any(len(v) != self.shape.n for v in basis):
            raise ValueError("basis vectors must have length n")
        target = MatShape(r, self.shape.k) if r >= self.shape.k else None
        if target is None:
            raise ValueError("need at least k basis vectors")
        imgs = {}
        for i in range(1, self.shape.n + 1):
            for j in range(1, self.shape.k + 1):
                imgs[(i, j)] = {(a, j): basis[a - 1][i - 1] for a in range(1, r + 1)}
        return self.linear_change(imgs, target)

    def evaluate(self, point: Sequence[Sequence]):
        """Exact value at an n x k point given as nested sequences."""
        n, k = self.shape.n, self.shape.k
        if len(point) != n or any(len(row) != k for row in point):
            raise ValueError(f"point must be {n}x{k}")
        flat = [_scalar(point[i][j]) for j in range(k) for i in range(n)]
        total = Fraction(0)
        for exp, c in self.terms.items():
            t = c
            for v, e in enumerate(exp):
                if e:
                    t = t * flat[v] ** e
            total = total + t
        return as_exact(total)

    def evaluate_numeric(self, points) -> np.ndarray:
        """Vectorized complex evaluation at points of shape ``(..., n, k)``."""
        W = np.asarray(points, dtype=complex)
        n, k = self.shape.n, self.shape.k
        if W.shape[-2:] != (n, k):
            raise ValueError(f"points must end in shape ({n},{k})")
        lead = W.shape[:-2]
        flat = np.swapaxes(W, -1, -2).reshape(lead + (n * k,))
        out = np.zeros(lead, dtype=complex)
        if not self.terms:
            return out
        maxdeg = [0] * (n * k)
        for exp in self.terms:
            for v, e in enumerate(exp):
                maxdeg[v] = max(maxdeg[v], e)
        pows = []
        for v in range(n * k):
            col = [np.ones(lead, dtype=complex)]
            for _ in range(maxdeg[v]):
                col.append(col[-1] * flat[..., v])
            pows.append(col)
        for exp, c in self.terms.items():
            t = np.full(lead, complex(c), dtype=complex)
            for v, e in enumerate(exp):
                if e:
                    t = t * pows[v][e]
            out += t
        return out

    def evaluate_real(self, X) -> np.ndarray:
        """Vectorized evaluation of a rational polynomial in n variables at real points ``(m, n)``."""
        if self.shape.k != 1:
            raise ValueError("evaluate_real expects a polynomial in n plain variables")
        X = np.asarray(X, dtype=float)
        m = X.shape[0]
        out = np.zeros(m)
        cache = {}
        for exp, c in self.terms.items():
            if isinstance(c, GaussianRational):
                raise TypeError("evaluate_real needs rational coefficients")
            t = np.full(m, float(c))
            for v, e in enumerate(exp):
                if e:
                    key = (v, e)
                    if key not in cache:
                        cache[key] = X[:, v] ** e
                    t = t * cache[key]
            out += t
        return out


def monomial_str(shape: MatShape, exp: tuple) -> str:
    parts = []
    for flat, e in enumerate(exp):
        if e:
            row, col = shape.position(flat)
            v = f"w[{row},{col}]"
            parts.append(v if e == 1 else f"{v}^{e}")
    return "*".join(parts) if parts else "1"


def render_poly(p: Polynomial) -> str:
    """Canonical text form, terms in descending order."""
    if p.is_zero():
        return "0"
    chunks = []
    for exp, c in p:
        mono = monomial_str(p.shape, exp)
        is_const = mono == "1"
        neg = False
        if isinstance(c, Fraction) and c < 0:
            neg, c = True, -c
        elif isinstance(c, GaussianRational) and c.re == 0 and c.im < 0:
            neg, c = True, -c
        cs = exact_str(c)
        if is_const:
            body = cs
        elif cs == "1":
            body = mono
        else:
            body = f"{cs}*{mono}"
        if not chunks:
            chunks.append(("-" if neg else "") + body)
        else:
            chunks.append((" - " if neg else " + ") + body)
    return "".join(chunks)


class PolyParseError(ValueError):
    """Raised on malformed polynomial text; ``position`` is a 0-based offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<var>[wx])\s*\[|(?P<sym>[-+*^()\],i]))"
)


class _Parser:
    def __init__(self, text: str, shape: MatShape):
        self.text = text
        self.shape = shape
        self.pos = 0

    def error(self, msg, pos=None):
        raise PolyParseError(msg, self.pos if pos is None else pos)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            self.error(f"expected {ch!r}")
        self.pos += 1

    def integer(self) -> int:
        self.skip()
        m = re.match(r"\d+", self.text[self.pos:])
        if not m:
            self.error("expected an integer")
        self.pos += m.end()
        return int(m.group())

    def rational(self) -> Fraction:
        num = self.integer()
        if self.peek() == "/":
            self.pos += 1
            start = self.pos
            den = self.integer()
            if den == 0:
                self.error("zero denominator", start)
            return Fraction(num, den)
        return Fraction(num)

    def coeff(self):
        """Optional coefficient; returns None if the term starts with a variable."""
        ch = self.peek()
        if ch.isdigit():
            q = self.rational()
            if self.peek() == "i":
                self.pos += 1
                return GaussianRational(0, q)
            return q
        if ch == "i":
            self.pos += 1
            return GaussianRational(0, 1)
        if ch == "(":
            self.pos += 1
            sign = 1
            if self.peek() in "+-":
                sign = -1 if self.peek() == "-" else 1
                self.pos += 1
            re_part = sign * self.rational()
            op = self.peek()
            if op not in "+-":
                self.error("expected '+' or '-' inside complex coefficient")
            self.pos += 1
            if self.peek() == "i":
                im = Fraction(1)
            else:
                im = self.rational()
            self.expect("i")
            self.expect(")")
            return GaussianRational(re_part, im if op == "+" else -im)
        return None

    def var(self) -> tuple:
        start = self.pos
        name = self.text[self.pos]
        self.pos += 1
        self.expect("[")
        idx_pos = self.pos
        row = self.integer()
        if name == "w":
            self.expect(",")
            col = self.integer()
        else:
            if self.shape.k != 1:
                self.error("x[i] is only available for polynomials in plain variables", start)
            col = 1
        self.expect("]")
        if row == 0 or col == 0:
            self.error("indices are 1-based", idx_pos)
        if row > self.shape.n or col > self.shape.k:
            self.error(f"unknown variable {name}[{row}{',' + str(col) if name == 'w' else ''}]", start)
        exp = 1
        if self.peek() == "^":
            self.pos += 1
            exp = self.integer()
        return self.shape.index(row, col), exp

    def term(self) -> Polynomial:
        c = self.coeff()
        exp = [0] * self.shape.nvars
        need_var = c is None
        if c is None:
            c = Fraction(1)
        first = True
        while True:
            ch = self.peek()
            if need_var and first:
                if ch not in ("w", "x"):
                    self.error("expected a coefficient or variable")
            else:
                if ch != "*":
                    break
                self.pos += 1
                ch = self.peek()
                if ch not in ("w", "x"):
                    self.error("expected a variable after '*'")
            v, e = self.var()
            exp[v] += e
            first = False
        return Polynomial(self.shape, {tuple(exp): c})

    def poly(self) -> Polynomial:
        total = Polynomial.zero(self.shape)
        sign = 1
        if self.peek() in "+-":
            sign = -1 if self.peek() == "-" else 1
            self.pos += 1
        total = total + self.term().scale(sign)
        while True:
            ch = self.peek()
            if ch == "":
                break
            if ch not in "+-":
                self.error(f"unexpected character {ch!r}")
            self.pos += 1
            t = self.term()
            total = total + (t if ch == "+" else -t)
        return total


def parse_poly(text: str, shape: MatShape) -> Polynomial:
    """Parse the textual polynomial grammar (see the README)."""
    if not text.strip():
        raise PolyParseError("empty polynomial", 0)
    return _Parser(text, shape).poly()


def factorial_of_exponent(exp: Iterable[int]) -> int:
    out = 1
    for e in exp:
        out *= factorial(e)
    return out
