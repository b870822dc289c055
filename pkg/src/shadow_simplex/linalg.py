"""Exact and floating-point linear algebra primitives.

Exact routines run over `fractions.Fraction` with deterministic
first-nonzero pivoting (row order), so identical inputs always take
identical elimination paths.  Float routines use numpy with partial
pivoting and twice-applied Gram-Schmidt for orthonormal completions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .rational import dot, norm_sq

Mat = list[list[Fraction]]
Vec = list[Fraction]


class LinAlgError(ValueError):
    """Raised for singular systems and malformed inputs."""


@dataclass
class SquareSystem:
    """A square linear system M x = rhs over exact rationals."""

    M: Mat
    rhs: Vec

    def __post_init__(self) -> None:
        n = len(self.M)
        if n == 0 or any(len(r) != n for r in self.M) or len(self.rhs) != n:
            raise LinAlgError("system dimensions do not agree")


@dataclass
class Rotation:
    """Orthogonal matrix Q (float) with Q @ axis_row == e1."""

    Q: np.ndarray
    axis_row: np.ndarray


def solve_square(sys: SquareSystem) -> Vec:
    """Exact solution of a square rational system; raises LinAlgError if singular."""
    return _solve(sys.M, sys.rhs)


def _solve(M: Mat, rhs: Vec) -> Vec:
    n = len(M)
    a = [list(row) + [rhs[i]] for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise LinAlgError("singular matrix")
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[i][n] for i in range(n)]


def solve_square_float(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Float companion of solve_square (numpy partial pivoting)."""
    M = np.asarray(M, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    try:
        x = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise LinAlgError(str(exc)) from None
    return x


def invert(M: Mat) -> Mat:
    """Exact inverse; raises LinAlgError if singular."""
    n = len(M)
    a = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise LinAlgError("singular matrix")
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def inverse_columns(M: Mat) -> list[Vec]:
    """Columns m_1..m_n of M^{-1}; the basis of the 1/max||m_k|| distance formula."""
    inv = invert(M)
    n = len(inv)
    return [[inv[r][c] for r in range(n)] for c in range(n)]


def det_fraction(M: Mat) -> Fraction:
    n = len(M)
    a = [list(row) for row in M]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = 1 / a[col][col]
        for r in range(col + 1, n):
            if a[r][col] != 0:
                f = a[r][col] * inv
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return det


def det_int(M: Sequence[Sequence[int]]) -> int:
    """Fraction-free Bareiss determinant for integer matrices."""
    n = len(M)
    if n == 0:
        return 1
    a = [list(row) for row in M]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            piv = next((r for r in range(k + 1, n) if a[r][k] != 0), None)
            if piv is None:
                return 0
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    return len(independent_rows(rows))


def independent_rows(rows: Sequence[Sequence[Fraction]]) -> list[int]:
    """Greedy (ascending index) maximal independent subset, exact elimination."""
    basis: list[Vec] = []  # reduced echelon directions
    pivots: list[int] = []
    chosen: list[int] = []
    for idx, row in enumerate(rows):
        v = list(row)
        for p, b in zip(pivots, basis):
            if v[p] != 0:
                f = v[p]
                v = [x - f * y for x, y in zip(v, b)]
        lead = next((j for j, x in enumerate(v) if x != 0), None)
        if lead is None:
            continue
        inv = 1 / v[lead]
        basis.append([x * inv for x in v])
        pivots.append(lead)
        chosen.append(idx)
    return chosen


def nullspace_vector(rows: Sequence[Sequence[Fraction]], n: int) -> Vec | None:
    """One exact nonzero vector orthogonal to all rows, or None if full rank."""
    basis: list[Vec] = []
    pivots: list[int] = []
    for row in rows:
        v = list(row)
        for p, b in zip(pivots, basis):
            if v[p] != 0:
                f = v[p]
                v = [x - f * y for x, y in zip(v, b)]
        lead = next((j for j, x in enumerate(v) if x != 0), None)
        if lead is None:
            continue
        inv = 1 / v[lead]
        basis.append([x * inv for x in v])
        pivots.append(lead)
    free = next((j for j in range(n) if j not in pivots), None)
    if free is None:
        return None
    # back-substitute the free coordinate through the echelon basis
    x = [Fraction(0)] * n
    x[free] = Fraction(1)
    for p, b in sorted(zip(pivots, basis), reverse=True):
        x[p] = -sum((b[j] * x[j] for j in range(n) if j != p), Fraction(0))
    return x


def exact_complement_basis(rows: Sequence[Sequence[Fraction]], n: int) -> list[Vec]:
    """Rational basis of the orthogonal complement of span(rows).

    The returned vectors are exactly orthogonal to every input row and to
    each other; norms are 1 from below within ~2**-63.  Gram-Schmidt runs
    fraction-free over primitive integer vectors (scaling deferred to the
    very end) so the exact data stays small and fast.
    """
    return [_near_unit(v) for v in complement_basis_int(rows, n)]


def complement_basis_int(rows: Sequence[Sequence[Fraction]], n: int) -> list[list[int]]:
    """Primitive integer basis of the complement, pairwise exactly orthogonal."""
    ortho = _orthogonalize_int([_prim_int(list(r)) for r in rows])
    span_size = len(ortho)
    out: list[list[int]] = []
    for j in range(n):
        if span_size + len(out) == n:
            break
        e = [int(i == j) for i in range(n)]
        v = _project_int(e, ortho + out)
        if any(v):
            out.append(v)
    return out


def _prim_int(v: Sequence) -> list[int]:
    from .rational import primitive_int_row

    ints, _ = primitive_int_row([x if isinstance(x, Fraction) else Fraction(x) for x in v])
    return ints


def _strip_gcd(v: list[int]) -> list[int]:
    from math import gcd

    g = 0
    for x in v:
        g = gcd(g, x)
    return [x // g for x in v] if g > 1 else v


def _project_int(v: Sequence[int], ortho: Sequence[list[int]]) -> list[int]:
    """Fraction-free projection of an integer vector off orthogonal int dirs."""
    r = list(v)
    for o in ortho:
        d = sum(a * b for a, b in zip(r, o))
        if d:
            N = sum(a * a for a in o)
            r = _strip_gcd([x * N - d * y for x, y in zip(r, o)])
    return r


def _orthogonalize_int(dirs: Sequence[list[int]]) -> list[list[int]]:
    ortho: list[list[int]] = []
    for d in dirs:
        w = _project_int(d, ortho)
        if any(w):
            ortho.append(w)
    return ortho


def _project_out(v: Vec, dirs: Sequence[Vec]) -> Vec:
    """Component of v orthogonal to span(dirs), exact (rational in, rational out)."""
    ortho: list[Vec] = []
    for d in dirs:
        w = list(d)
        for o in ortho:
            c = dot(w, o) / norm_sq(o)
            if c != 0:
                w = [x - c * y for x, y in zip(w, o)]
        if any(x != 0 for x in w):
            ortho.append(w)
    r = list(v)
    for o in ortho:
        c = dot(r, o) / norm_sq(o)
        if c != 0:
            r = [x - c * y for x, y in zip(r, o)]
    return r


def _near_unit(v: Sequence) -> Vec:
    from .rational import unit_scale

    w = [x if isinstance(x, Fraction) else Fraction(x) for x in v]
    t = unit_scale(w)
    return [t * x for x in w]


def facet_basis(a: Sequence[Fraction]) -> list[Vec]:
    """Near-unit rational basis of the hyperplane a^T x = 0 (exactly ⟂ a)."""
    return exact_complement_basis([list(a)], len(a))


def complete_orthonormal(v: np.ndarray) -> Rotation:
    """Rotation with first row v (float): Q v = e1, ||Q^T Q - I||_max <= 1e-10.

    Gram-Schmidt is run twice for numerical robustness.
    """
    v = np.asarray(v, dtype=float)
    n = v.shape[0]
    if n == 0 or not np.isfinite(v).all():
        raise LinAlgError("bad input vector")
    nrm = np.linalg.norm(v)
    if nrm < 1e-14:
        raise LinAlgError("zero vector")
    if abs(nrm - 1.0) > 1e-10:
        raise LinAlgError("input vector is not unit norm")
    rows = [v / nrm]
    for j in range(n):
        if len(rows) == n:
            break
        w = np.zeros(n)
        w[j] = 1.0
        for _ in range(2):
            for r in rows:
                w = w - (w @ r) * r
        if np.linalg.norm(w) > 1e-8:
            rows.append(w / np.linalg.norm(w))
    if len(rows) < n:
        raise LinAlgError("failed to complete basis")
    Q = np.vstack(rows)
    return Rotation(Q=Q, axis_row=v)


def orthonormal_complement_basis(rows: Sequence[np.ndarray], n: int) -> list[np.ndarray]:
    """Float orthonormal basis of the complement of span(rows), count n - rank."""
    out: list[np.ndarray] = []
    mat = [np.asarray(r, dtype=float) for r in rows]
    basis: list[np.ndarray] = []
    for r in mat:
        w = r.copy()
        for _ in range(2):
            for b in basis:
                w = w - (w @ b) * b
        if np.linalg.norm(w) > 1e-10:
            basis.append(w / np.linalg.norm(w))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        w = e
        for _ in range(2):
            for b in basis + out:
                w = w - (w @ b) * b
        if np.linalg.norm(w) > 1e-10:
            out.append(w / np.linalg.norm(w))
    return out
