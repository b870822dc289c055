"""LP data model, text format, normalization and boundedness preprocessing.

All constraint data is exact rational.  Normalization divides out row norms
through rational near-unit scale factors (floor-rounded, so scaled rows never
exceed unit norm); the divided-out norms are kept in ``row_scales`` /
``c0_scale`` so the original data is always recoverable exactly.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from fractions import Fraction
from math import gcd

from . import linalg
from .rational import as_fractions, dot, format_fraction, ratsqrt_ceil, unit_scale


class LPFormatError(ValueError):
    """Malformed LP text: carries a 1-based line number."""

    def __init__(self, line_no: int, message: str) -> None:
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class LPModelError(ValueError):
    """Contract violation on an LP-model operation."""


@dataclass(frozen=True)
class LinearProgram:
    """max c0^T x subject to A x <= b, all entries exact rationals."""

    A: tuple[tuple[Fraction, ...], ...]
    b: tuple[Fraction, ...]
    c0: tuple[Fraction, ...]
    row_scales: tuple[Fraction, ...] = ()
    c0_scale: Fraction = Fraction(1)
    normalized: bool = False
    full_rank: bool = False
    bounded: bool = False
    box_rows: frozenset[int] = frozenset()
    synthetic_rows: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        if self.m < 1 or self.n < 1:
            raise LPModelError("need at least one row and one variable")
        if any(len(r) != self.n for r in self.A) or len(self.b) != self.m:
            raise LPModelError("dimension mismatch")
        if any(all(x == 0 for x in row) for row in self.A):
            raise LPModelError("zero row in constraint matrix")
        if not self.row_scales:
            object.__setattr__(self, "row_scales", tuple(Fraction(1) for _ in range(self.m)))
        if self.box_rows & self.synthetic_rows:
            raise LPModelError("box rows and synthetic rows overlap")
        for i in self.box_rows | self.synthetic_rows:
            if not 0 <= i < self.m:
                raise LPModelError("marker row index out of range")

    @property
    def m(self) -> int:
        return len(self.A)

    @property
    def n(self) -> int:
        return len(self.A[0]) if self.A else 0

    def row(self, i: int) -> list[Fraction]:
        return list(self.A[i])

    def rows(self) -> list[list[Fraction]]:
        return [list(r) for r in self.A]

    def original_row(self, i: int) -> list[Fraction]:
        """Row i in pre-normalization units (norm multiplied back in)."""
        s = self.row_scales[i]
        return [s * x for x in self.A[i]]

    def float_A(self):
        import numpy as np

        return np.array([[float(x) for x in row] for row in self.A], dtype=float)

    def float_b(self):
        import numpy as np

        return np.array([float(x) for x in self.b], dtype=float)

    def float_c0(self):
        import numpy as np

        return np.array([float(x) for x in self.c0], dtype=float)

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for row in self.A for x in row)

    def feasible(self, point) -> bool:
        x = as_fractions(point)
        return all(dot(self.row(i), x) <= self.b[i] for i in range(self.m))

    def tight_rows(self, point) -> list[int]:
        x = as_fractions(point)
        return [i for i in range(self.m) if dot(self.row(i), x) == self.b[i]]


@dataclass(frozen=True)
class BasicSolution:
    """A vertex: its point plus an ordered basis of n tight row indices."""

    point: tuple[Fraction, ...]
    basis: tuple[int, ...]


@dataclass(frozen=True)
class BackMap:
    """How to undo a rank-raising step: which appended rows to forget."""

    original_rows: int
    appended_rows: tuple[int, ...]


@dataclass(frozen=True)
class RankRaised:
    lp: LinearProgram
    back_map: BackMap


@dataclass(frozen=True)
class ObjectiveEscapesSpan:
    """c0 has a component outside span(rows): unbounded whenever feasible."""

    direction: tuple[Fraction, ...]  # A d = 0 and c0^T d > 0, exact


@dataclass(frozen=True)
class UnboundedCertificate:
    point: tuple[Fraction, ...]
    ray: tuple[Fraction, ...]


BOUNDED = "bounded"


def make_lp(A, b, c0, **flags) -> LinearProgram:
    return LinearProgram(
        A=tuple(tuple(as_fractions(row)) for row in A),
        b=tuple(as_fractions(b)),
        c0=tuple(as_fractions(c0)),
        **flags,
    )


# ---------------------------------------------------------------------------
# text format
#
#   # comment lines and blank lines are skipped
#   maximize c1 c2 ... cn                (rationals: p/q or integers)
#   st
#   a1 a2 ... an <= b                    (one constraint per line)
# ---------------------------------------------------------------------------


def parse_lp(text: str) -> LinearProgram:
    lines = [(i + 1, ln.strip()) for i, ln in enumerate(text.splitlines())]
    lines = [(no, ln) for no, ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise LPFormatError(1, "empty input")
    no, head = lines[0]
    parts = head.split()
    if not parts or parts[0].lower() != "maximize":
        raise LPFormatError(no, "expected 'maximize c1 ... cn'")
    if len(parts) == 1:
        raise LPFormatError(no, "empty objective line")
    try:
        c0 = [Fraction(tok) for tok in parts[1:]]
    except (ValueError, ZeroDivisionError):
        raise LPFormatError(no, "bad rational in objective") from None
    n = len(c0)
    if len(lines) < 2 or lines[1][1].lower() != "st":
        raise LPFormatError(lines[1][0] if len(lines) > 1 else no, "expected 'st' line")
    A: list[list[Fraction]] = []
    b: list[Fraction] = []
    for no, ln in lines[2:]:
        toks = ln.split()
        if "<=" not in toks:
            raise LPFormatError(no, "constraint must contain '<='")
        k = toks.index("<=")
        if k != len(toks) - 2:
            raise LPFormatError(no, "expected 'a1 ... an <= b'")
        try:
            row = [Fraction(t) for t in toks[:k]]
            rhs = Fraction(toks[k + 1])
        except (ValueError, ZeroDivisionError):
            raise LPFormatError(no, "bad rational in constraint") from None
        if len(row) != n:
            raise LPFormatError(no, f"expected {n} coefficients, got {len(row)}")
        if all(x == 0 for x in row):
            raise LPFormatError(no, "zero row")
        A.append(row)
        b.append(rhs)
    if not A:
        raise LPFormatError(lines[-1][0], "no constraints")
    return make_lp(A, b, c0)


def serialize_lp(lp: LinearProgram) -> str:
    out = ["maximize " + " ".join(format_fraction(c) for c in lp.c0), "st"]
    for i in range(lp.m):
        out.append(
            " ".join(format_fraction(x) for x in lp.A[i]) + " <= " + format_fraction(lp.b[i])
        )
    return "\n".join(out) + "\n"


def matrix_to_csv(rows) -> str:
    """RFC-4180 CSV with header col0..col{k-1}; fractions in canonical form."""
    rows = [list(r) for r in rows]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow([f"col{j}" for j in range(len(rows[0]))])
    for r in rows:
        w.writerow([format_fraction(x) if isinstance(x, Fraction) else x for x in r])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# normalization
# ---------------------------------------------------------------------------


def normalize(lp: LinearProgram) -> LinearProgram:
    """Scale every row and c0 to (near-)unit norm, exactly and reversibly.

    The feasible set is unchanged (positive row scaling); the float view of
    each scaled row has Euclidean norm within 1e-12 of 1.
    """
    if all(x == 0 for x in lp.c0):
        raise LPModelError("zero objective vector")
    A: list[list[Fraction]] = []
    b: list[Fraction] = []
    scales: list[Fraction] = []
    for i in range(lp.m):
        row = lp.original_row(i)
        t = unit_scale(row)
        A.append([t * x for x in row])
        b.append(t * (lp.row_scales[i] * lp.b[i]))
        scales.append(1 / t)
    c0_orig = [lp.c0_scale * x for x in lp.c0]
    tc = unit_scale(c0_orig)
    c0 = [tc * x for x in c0_orig]
    return replace(
        lp,
        A=tuple(tuple(r) for r in A),
        b=tuple(b),
        c0=tuple(c0),
        row_scales=tuple(scales),
        c0_scale=1 / tc,
        normalized=True,
    )


# ---------------------------------------------------------------------------
# rank raising
# ---------------------------------------------------------------------------


def extend_to_full_rank_delta(lp: LinearProgram) -> LinearProgram:
    """Append ±o_k rows (orthonormal complement of the row span) with rhs 0."""
    rows = lp.rows()
    comp = linalg.exact_complement_basis(rows, lp.n)
    if not comp:
        raise LPModelError("called on full-rank input")
    A = rows
    b = list(lp.b)
    added = []
    for o in comp:
        for sign in (1, -1):
            added.append(len(A))
            A.append([sign * x for x in o])
            b.append(Fraction(0))
    scales = list(lp.row_scales) + [Fraction(1)] * (len(A) - lp.m)
    return replace(
        lp,
        A=tuple(tuple(r) for r in A),
        b=tuple(b),
        row_scales=tuple(scales),
        synthetic_rows=lp.synthetic_rows | frozenset(added),
        full_rank=True,
    )


def extend_to_full_rank_Delta(lp: LinearProgram) -> LinearProgram:
    """Append canonical unit rows e_i outside the row span, rhs 0 (integral A)."""
    rows = lp.rows()
    b = list(lp.b)
    added = []
    r = linalg.rank(rows)
    for j in range(lp.n):
        if r == lp.n:
            break
        e = [Fraction(int(i == j)) for i in range(lp.n)]
        if linalg.rank(rows + [e]) > r:
            added.append(len(rows))
            rows.append(e)
            b.append(Fraction(0))
            r += 1
    if not added:
        raise LPModelError("called on full-rank input")
    scales = list(lp.row_scales) + [Fraction(1)] * len(added)
    return replace(
        lp,
        A=tuple(tuple(r_) for r_ in rows),
        b=tuple(b),
        row_scales=tuple(scales),
        synthetic_rows=lp.synthetic_rows | frozenset(added),
        full_rank=True,
    )


def _objective_escape(lp: LinearProgram):
    """Component of c0 orthogonal to span(rows); None if c0 is in the span."""
    rows = lp.rows()
    d = linalg._project_out(list(lp.c0), rows)
    if any(x != 0 for x in d):
        return d
    return None


def raise_rank_delta(lp: LinearProgram) -> RankRaised | ObjectiveEscapesSpan:
    """Rank-raise preserving the delta-distance value (complement rows, rhs 0)."""
    if linalg.rank(lp.rows()) == lp.n:
        raise LPModelError("called on full-rank input")
    d = _objective_escape(lp)
    if d is not None:
        return ObjectiveEscapesSpan(direction=tuple(d))
    ext = extend_to_full_rank_delta(lp)
    return RankRaised(
        lp=ext,
        back_map=BackMap(original_rows=lp.m, appended_rows=tuple(sorted(ext.synthetic_rows - lp.synthetic_rows))),
    )


def raise_rank_Delta(lp: LinearProgram) -> RankRaised | ObjectiveEscapesSpan:
    """Rank-raise preserving the max subdeterminant (unit rows, rhs 0)."""
    if not lp.is_integral():
        raise LPModelError("matrix must be integral")
    if linalg.rank(lp.rows()) == lp.n:
        raise LPModelError("called on full-rank input")
    d = _objective_escape(lp)
    if d is not None:
        return ObjectiveEscapesSpan(direction=tuple(d))
    ext = extend_to_full_rank_Delta(lp)
    return RankRaised(
        lp=ext,
        back_map=BackMap(original_rows=lp.m, appended_rows=tuple(sorted(ext.synthetic_rows - lp.synthetic_rows))),
    )


# ---------------------------------------------------------------------------
# bounding box
# ---------------------------------------------------------------------------


def encoding_bits(lp: LinearProgram) -> int:
    """Total bit length of all numerators and denominators of (A, b).

    Measured on the pre-normalization data (recovered through row_scales):
    the polyhedron is the same and the radius stays small enough to keep
    exact pivot arithmetic cheap.
    """
    total = 0
    for i in range(lp.m):
        for x in lp.original_row(i) + [lp.row_scales[i] * lp.b[i]]:
            total += max(abs(x.numerator), 1).bit_length() + x.denominator.bit_length()
    return total


def lcm_denominators(lp: LinearProgram) -> int:
    l = 1
    for i in range(lp.m):
        for x in lp.original_row(i):
            l = l * x.denominator // gcd(l, x.denominator)
    return l


def box_radius(lp: LinearProgram) -> Fraction:
    """Rational r >= sqrt(n) * 2^(enc(A,b) - n^2) * lcm(A)^n, a vertex ball bound."""
    n = lp.n
    enc = encoding_bits(lp)
    sqrt_n = ratsqrt_ceil(Fraction(n))
    e = enc - n * n
    pow2 = Fraction(2) ** e
    return sqrt_n * pow2 * Fraction(lcm_denominators(lp)) ** n


def bound_polytope(lp: LinearProgram) -> LinearProgram:
    """Intersect with the parallelepiped -r <= a_i x <= r over n independent rows.

    Only existing row directions are reused, so the delta-distance value is
    unaffected; every vertex of the original polyhedron lies strictly inside.
    """
    rows = lp.rows()
    idx = linalg.independent_rows(rows)
    if len(idx) < lp.n:
        raise LPModelError("rank-deficient input")
    idx = idx[: lp.n]
    r = box_radius(lp)
    A = rows
    b = list(lp.b)
    scales = list(lp.row_scales)
    added = []
    for i in idx:
        for sign in (1, -1):
            added.append(len(A))
            A.append([sign * x for x in rows[i]])
            b.append(r)
            scales.append(lp.row_scales[i])
    return replace(
        lp,
        A=tuple(tuple(row) for row in A),
        b=tuple(b),
        row_scales=tuple(scales),
        box_rows=lp.box_rows | frozenset(added),
        bounded=True,
    )


def strip_box(lp: LinearProgram) -> LinearProgram:
    """Drop box rows (used for recession-cone tests against the real polyhedron)."""
    keep = [i for i in range(lp.m) if i not in lp.box_rows]
    return replace(
        lp,
        A=tuple(lp.A[i] for i in keep),
        b=tuple(lp.b[i] for i in keep),
        row_scales=tuple(lp.row_scales[i] for i in keep),
        box_rows=frozenset(),
        synthetic_rows=frozenset(
            keep.index(i) for i in lp.synthetic_rows if i in keep
        ),
        bounded=False,
    )


def improving_ray(lp: LinearProgram, objective=None) -> list[Fraction] | None:
    """Exact recession-cone direction with positive objective, or None.

    Scans extreme-ray candidates: directions orthogonal to n-1 independent
    rows.  Complete for pointed cones (rank(A) = n).
    """
    from itertools import combinations
    from math import comb

    obj = as_fractions(objective if objective is not None else lp.c0)
    rows = lp.rows()
    m, n = lp.m, lp.n
    if n == 1:
        for d in ([Fraction(1)], [Fraction(-1)]):
            if all(dot(rows[i], d) <= 0 for i in range(m)) and dot(obj, d) > 0:
                return d
        return None
    if comb(m, n - 1) > 10**6:
        raise LPModelError("ray scan combinatorial guard exceeded")
    for S in combinations(range(m), n - 1):
        sub = [rows[i] for i in S]
        if linalg.rank(sub) < n - 1:
            continue
        d = linalg.nullspace_vector(sub, n)
        if d is None:
            continue
        for cand in (d, [-x for x in d]):
            if all(dot(rows[i], cand) <= 0 for i in range(m)) and dot(obj, cand) > 0:
                return cand
    return None


def assert_unbounded_if_box_tight(
    vertex: BasicSolution, lp: LinearProgram
) -> UnboundedCertificate | str:
    """Decide Bounded vs Unbounded at an optimal vertex of the boxed LP.

    If no box row is tight the LP was bounded all along.  Otherwise an exact
    ray test on the un-boxed rows decides: a recession direction improving
    c0 certifies unboundedness; if none exists the box-tight optimum already
    attains the (finite) supremum.
    """
    if not lp.bounded:
        raise LPModelError("lp is not boxed")
    x = as_fractions(vertex.point)
    if not lp.feasible(x):
        raise LPModelError("vertex infeasible for lp")
    tight_box = [i for i in lp.box_rows if dot(lp.row(i), x) == lp.b[i]]
    if not tight_box:
        return BOUNDED
    inner = strip_box(lp)
    ray = improving_ray(inner)
    if ray is None:
        return BOUNDED
    return UnboundedCertificate(point=tuple(x), ray=tuple(ray))


# ---------------------------------------------------------------------------
# vertex utilities
# ---------------------------------------------------------------------------


def tight_basis_at(lp: LinearProgram, point) -> list[int]:
    """Greedy (by row index) independent tight rows at a point."""
    x = as_fractions(point)
    tight = lp.tight_rows(x)
    rel = linalg.independent_rows([lp.row(i) for i in tight])
    return [tight[k] for k in rel]


def move_to_vertex(lp: LinearProgram, point) -> BasicSolution:
    """Crawl from a feasible point to a vertex (requires rank(A) = n).

    Repeatedly fixes one more independent tight row by walking a null-space
    direction of the current tight set until a constraint blocks.
    """
    x = as_fractions(point)
    if not lp.feasible(x):
        raise LPModelError("point infeasible")
    while True:
        basis = tight_basis_at(lp, x)
        if len(basis) == lp.n:
            return BasicSolution(point=tuple(x), basis=tuple(basis))
        d = linalg.nullspace_vector([lp.row(i) for i in basis], lp.n)
        if d is None:
            raise LPModelError("tight rows already full rank")  # unreachable
        prods = [dot(lp.row(i), d) for i in range(lp.m)]
        if all(p <= 0 for p in prods):
            d = [-v for v in d]
            prods = [-p for p in prods]
        if all(p <= 0 for p in prods):
            raise LPModelError("no blocking row: rank(A) < n")
        theta = min(
            (lp.b[i] - dot(lp.row(i), x)) / prods[i]
            for i in range(lp.m)
            if prods[i] > 0
        )
        x = [xi + theta * di for xi, di in zip(x, d)]


def validate_basic_solution(lp: LinearProgram, bs: BasicSolution) -> None:
    x = as_fractions(bs.point)
    if len(bs.basis) != lp.n:
        raise LPModelError("basis must have n rows")
    if not lp.feasible(x):
        raise LPModelError("point violates a constraint")
    for i in bs.basis:
        if dot(lp.row(i), x) != lp.b[i]:
            raise LPModelError(f"basis row {i} not tight")
    if linalg.rank([lp.row(i) for i in bs.basis]) < lp.n:
        raise LPModelError("basis rows dependent")
