"""Exact linear algebra over Q and Q(i) for small dense or sparse systems."""

from __future__ import annotations

from fractions import Fraction
from typing import Hashable, Mapping, Sequence

from .scalars import as_exact

__all__ = ["det", "rank", "solve", "SparseEchelon", "principal_minor_sum"]


def det(M: Sequence[Sequence]):
    """Determinant by fraction-exact Gaussian elimination."""
    n = len(M)
    A = [[as_exact(x) for x in row] for row in M]
    if any(len(row) != n for row in A):
        raise ValueError("det needs a square matrix")
    sign = 1
    result = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            sign = -sign
        p = A[c][c]
        result = result * p
        for r in range(c + 1, n):
            if A[r][c] != 0:
                f = A[r][c] / p
                A[r] = [a - f * b for a, b in zip(A[r], A[c])]
    return as_exact(result * sign)


def principal_minor_sum(M: Sequence[Sequence], k: int):
    """k-th elementary symmetric function of the eigenvalues: sum of principal k-minors."""
    from itertools import combinations

    n = len(M)
    total = Fraction(0)
    for S in combinations(range(n), k):
        total = total + det([[M[i][j] for j in S] for i in S])
    return as_exact(total)


class SparseEchelon:
    """Incremental row echelon form of sparse vectors keyed by hashable columns.

    Pivot columns are chosen as the largest key of each reduced vector, so
    with monomial keys this is reduction by leading terms.
    """

    def __init__(self):
        self.rows: dict[Hashable, dict] = {}

    def reduce(self, vec: Mapping) -> dict:
        v = {c: as_exact(x) for c, x in vec.items() if x != 0}
        while v:
            lead = max(v)
            row = self.rows.get(lead)
            if row is None:
                return v
            f = v[lead] / row[lead]
            for c, x in row.items():
                y = v.get(c, 0) - f * x
                if y == 0:
                    v.pop(c, None)
                else:
                    v[c] = y
        return v

    def add(self, vec: Mapping) -> bool:
        """Insert a vector; return True if it increased the rank."""
        v = self.reduce(vec)
        if not v:
            return False
        self.rows[max(v)] = v
        return True

    @property
    def rank(self) -> int:
        return len(self.rows)


def rank(vectors: Sequence[Mapping]) -> int:
    ech = SparseEchelon()
    for v in vectors:
        ech.add(v)
    return ech.rank


def solve(columns: Sequence[Mapping], target: Mapping):
    """Find exact ``c`` with ``sum_i c_i * columns[i] == target``.

    Vectors are sparse maps.  Returns a list of coefficients or ``None`` when
    the target lies outside the span.  Free variables are set to zero.
    """
    keys = sorted({key for col in columns for key in col} | set(target), key=repr)
    index = {key: r for r, key in enumerate(keys)}
    m, n = len(keys), len(columns)
    A = [[Fraction(0)] * (n + 1) for _ in range(m)]
    for j, col in enumerate(columns):
        for key, x in col.items():
            A[index[key]][j] = as_exact(x)
    for key, x in target.items():
        A[index[key]][n] = as_exact(x)
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        p = A[r][c]
        A[r] = [x / p for x in A[r]]
        for i in range(m):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if A[i][n] != 0:
            return None
    sol = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        sol[c] = as_exact(A[i][n])
    return sol
