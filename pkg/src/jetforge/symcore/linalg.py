"""Exact Gaussian elimination over Q (works for any field, floats included).

Matrices are lists of row lists.  Nothing here mutates its inputs.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from ..errors import SingularLinearPart


def rref(rows: Sequence[Sequence], ncols: int | None = None, tol=None):
    """Reduced row echelon form. Returns ``(R, pivots)`` with zero rows dropped.

    ``tol`` switches to partial pivoting with a magnitude threshold, for
    floating point input.
    """
    m = [list(r) for r in rows]
    if ncols is None:
        ncols = len(m[0]) if m else 0
    pivots = []
    r = 0
    nrows = len(m)
    for c in range(ncols):
        if r == nrows:
            break
        if tol is None:
            p = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        else:
            p = max(range(r, nrows), key=lambda i: abs(m[i][c]))
            if abs(m[p][c]) <= tol:
                p = None
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        piv_row = m[r]
        inv = 1 / piv_row[c] if tol is not None else Fraction(1) / piv_row[c]
        if piv_row[c] != 1:
            piv_row = [v * inv for v in piv_row]
            m[r] = piv_row
        nz = [j for j in range(c, ncols) if piv_row[j] != 0]
        for i in range(nrows):
            if i != r:
                f = m[i][c]
                if f != 0:
                    row = m[i]
                    for j in nz:
                        row[j] = row[j] - f * piv_row[j]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank(rows: Sequence[Sequence], ncols: int | None = None) -> int:
    if not rows:
        return 0
    return len(rref(rows, ncols)[1])


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[list]:
    """Basis of {v : A v = 0}; one vector per free column, that entry set to 1."""
    R, pivots = rref(rows, ncols) if rows else ([], [])
    pivset = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(R, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def row_space(rows: Sequence[Sequence], ncols: int) -> list[list]:
    return rref(rows, ncols)[0] if rows else []


def same_row_space(a: Sequence[Sequence], b: Sequence[Sequence], ncols: int) -> bool:
    return row_space(a, ncols) == row_space(b, ncols)


def solve(A: Sequence[Sequence], b: Sequence):
    """One solution of ``A x = b`` (free variables zero) or None if inconsistent."""
    ncols = len(A[0]) if A else 0
    aug = [list(r) + [bi] for r, bi in zip(A, b)]
    R, pivots = rref(aug, ncols + 1)
    if pivots and pivots[-1] == ncols:
        return None
    x = [Fraction(0)] * ncols
    for row, p in zip(R, pivots):
        x[p] = row[ncols]
    return x


def inverse(M: Sequence[Sequence], tol=None):
    n = len(M)
    aug = [list(r) + [1 if i == j else 0 for j in range(n)] for i, r in enumerate(M)]
    R, pivots = rref(aug, 2 * n, tol=tol)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise SingularLinearPart("matrix is singular")
    return [row[n:] for row in R[:n]]


def matmul(A, B):
    Bt = list(zip(*B))
    return [[sum((a * b for a, b in zip(row, col)), 0) for col in Bt] for row in A]


def det(M) -> Fraction:
    m = [list(map(Fraction, r)) for r in M]
    n = len(m)
    d = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            d = -d
        d *= m[c][c]
        for i in range(c + 1, n):
            f = m[i][c] / m[c][c]
            if f:
                for j in range(c, n):
                    m[i][j] -= f * m[c][j]
    return d
