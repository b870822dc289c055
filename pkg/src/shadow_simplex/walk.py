"""Shadow vertex walk: tableau pivoting along the lower envelope.

The tableau keeps every decision exact and cheap:

* constraint rows are rescaled once to primitive integers with one shared
  rhs denominator (all pivot decisions are invariant under positive row
  scaling, so this is a pure canonicalization);
* the basis inverse is carried as the integer pair (M, D) with
  M = D * inv(rows_of_basis) and D > 0, updated by an exact integer
  Sherman-Morrison step;
* degeneracy is resolved by a symbolic lexicographic perturbation of b with
  exponents assigned non-basis-rows-first, which makes any starting basis
  lexicographically feasible and every leaving choice unique.

Slope and ratio comparisons are integer cross-multiplications: both draw
modes produce dyadic rational objectives, so the exact branch always
applies.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from fractions import Fraction

from . import linalg
from .model import BasicSolution, LinearProgram
from .rational import as_fractions, common_denominator, primitive_int_row


class WalkError(RuntimeError):
    pass


class UnboundedEdgeError(WalkError):
    """An improving edge had no blocking row: the polytope was not boxed."""


HARD_PIVOT_GUARD = 10**6


@dataclass(frozen=True)
class PathStep:
    pivot_index: int
    entering_row: int
    leaving_row: int
    slope: Fraction
    c_gain: Fraction  # c^T d of the traversed direction, exactly > 0
    w_gain: Fraction
    step_length: Fraction  # 0 on degenerate pivots
    c_value: Fraction  # c^T x after the step
    basis: tuple[int, ...]


@dataclass(frozen=True)
class ShadowPath:
    start_basis: tuple[int, ...]
    start_value: Fraction
    steps: tuple[PathStep, ...]


@dataclass(frozen=True)
class WalkResult:
    finished: bool
    solution: BasicSolution
    path: ShadowPath
    pivots: int


def tight_rows_at(lp: LinearProgram, x0: BasicSolution) -> list[list[Fraction]]:
    """The n independent normalized rows indexed by the basis of x0."""
    rows = [lp.row(i) for i in x0.basis]
    if len(rows) != lp.n or len(linalg.independent_rows(rows)) < lp.n:
        raise WalkError("basis rows are dependent")
    x = as_fractions(x0.point)
    for i in x0.basis:
        if sum(a * v for a, v in zip(lp.row(i), x)) != lp.b[i]:
            raise WalkError(f"basis row {i} is not tight at the point")
    return rows


def _cmp_frac(p1: int, q1: int, p2: int, q2: int) -> int:
    """Compare p1/q1 with p2/q2 exactly; denominators may carry signs."""
    if q1 < 0:
        p1, q1 = -p1, -q1
    if q2 < 0:
        p2, q2 = -p2, -q2
    lhs = p1 * q2
    rhs = p2 * q1
    return (lhs > rhs) - (lhs < rhs)


class Tableau:
    """Walking state: current basis, integer basis inverse, pivot counter.

    Single-owner mutable state; concurrent walks must each build their own.
    """

    def __init__(self, lp: LinearProgram, start: BasicSolution, c, w) -> None:
        self.lp = lp
        m, n = lp.m, lp.n
        self.m, self.n = m, n
        self.pivot_count = 0
        self.ops = 0
        self._price_cache: tuple[int, list[int], list[int], list[int]] | None = None
        self.R: list[list[int]] = []
        beta_frac: list[Fraction] = []
        for i in range(m):
            ints, factor = primitive_int_row(lp.row(i))
            self.R.append(ints)
            beta_frac.append(factor * lp.b[i])
        self.beta, self.s = common_denominator(beta_frac)
        self.c = as_fractions(c)
        self.w = as_fractions(w)
        self.c_num, self.c_den = common_denominator(self.c)
        self.w_num, self.w_den = common_denominator(self.w)

        self.basis = sorted(start.basis)
        if len(self.basis) != n or len(set(self.basis)) != n:
            raise WalkError("basis must hold n distinct rows")
        try:
            inv = linalg.invert([[Fraction(x) for x in self.R[i]] for i in self.basis])
        except linalg.LinAlgError:
            raise WalkError("basis rows are dependent") from None
        D = linalg.det_int([self.R[i] for i in self.basis])
        M = [[inv[t][q] * D for q in range(n)] for t in range(n)]
        if any(e.denominator != 1 for row in M for e in row):
            raise WalkError("inconsistent basis inverse")  # unreachable
        self.M = [[int(e) for e in row] for row in M]
        self.D = D
        if self.D < 0:
            self.D = -self.D
            self.M = [[-e for e in row] for row in self.M]

        x = self.vertex()
        if tuple(x) != tuple(as_fractions(start.point)):
            raise WalkError("basis does not reproduce the start point")
        x_num = self._x_num()
        for i in range(m):
            if self._slack_num(i, x_num) < 0:
                raise WalkError("start point infeasible")

        # lexicographic exponents: non-basis rows first, then basis rows
        in_basis = set(self.basis)
        order = [i for i in range(m) if i not in in_basis] + list(self.basis)
        self.exp_of = [0] * m
        for e, i in enumerate(order, start=1):
            self.exp_of[i] = e

    # -- exact views ------------------------------------------------------

    def _x_num(self) -> list[int]:
        M, beta, basis, n = self.M, self.beta, self.basis, self.n
        self.ops += n * n
        return [sum(M[t][k] * beta[basis[k]] for k in range(n)) for t in range(n)]

    def vertex(self) -> list[Fraction]:
        xn = self._x_num()
        den = self.D * self.s
        return [Fraction(v, den) for v in xn]

    def _slack_num(self, i: int, x_num: list[int]) -> int:
        # slack_i = (beta_i * D - R_i . x_num) / (D * s), numerator only
        self.ops += self.n
        return self.beta[i] * self.D - sum(a * v for a, v in zip(self.R[i], x_num))

    def c_value(self) -> Fraction:
        xn = self._x_num()
        num = sum(cv * xv for cv, xv in zip(self.c_num, xn))
        return Fraction(num, self.c_den * self.D * self.s)

    def w_value(self) -> Fraction:
        xn = self._x_num()
        num = sum(wv * xv for wv, xv in zip(self.w_num, xn))
        return Fraction(num, self.w_den * self.D * self.s)

    def solution(self) -> BasicSolution:
        return BasicSolution(point=tuple(self.vertex()), basis=tuple(sorted(self.basis)))

    # -- pricing ----------------------------------------------------------

    def _price(self) -> tuple[list[int], list[int], list[int]]:
        if self._price_cache is not None and self._price_cache[0] == self.pivot_count:
            return self._price_cache[1], self._price_cache[2], self._price_cache[3]
        n = self.n
        M = self.M
        self.ops += 3 * n * n
        x_num = [sum(M[t][k] * self.beta[self.basis[k]] for k in range(n)) for t in range(n)]
        t_c = [sum(self.c_num[t] * M[t][k] for t in range(n)) for k in range(n)]
        t_w = [sum(self.w_num[t] * M[t][k] for t in range(n)) for k in range(n)]
        self._price_cache = (self.pivot_count, x_num, t_c, t_w)
        return x_num, t_c, t_w

    def at_optimum(self) -> bool:
        _, t_c, _ = self._price()
        # c^T d_k = -t_c[k] / (D c_den): improving edges have t_c[k] < 0
        return all(v >= 0 for v in t_c)

    # -- the pivot --------------------------------------------------------

    def pivot(self) -> PathStep | None:
        """One step along the minimum-slope improving edge; None at the optimum."""
        x_num, t_c, t_w = self._price()
        n, m = self.n, self.m
        improving = [k for k in range(n) if t_c[k] < 0]
        if not improving:
            return None
        # minimum slope y_w/y_c = (t_w[k] c_den) / (t_c[k] w_den)
        best: list[int] = []
        for k in improving:
            if not best:
                best = [k]
                continue
            cmp = _cmp_frac(
                t_w[k] * self.c_den, t_c[k] * self.w_den,
                t_w[best[0]] * self.c_den, t_c[best[0]] * self.w_den,
            )
            if cmp < 0:
                best = [k]
            elif cmp == 0:
                best.append(k)
        # ratio test per slope-tied edge; equal slopes resolved by the
        # smallest entering row index
        chosen = None
        for k in best:
            enter, rd, slack = self._ratio_test(k, x_num)
            if chosen is None or enter < chosen[1]:
                chosen = (k, enter, rd, slack)
        k, enter, rd_enter, slack_enter = chosen
        leave = self.basis[k]
        theta = Fraction(slack_enter, self.s * rd_enter)
        slope = Fraction(t_w[k] * self.c_den, t_c[k] * self.w_den)
        c_gain = Fraction(-t_c[k], self.D * self.c_den)
        w_gain = Fraction(-t_w[k], self.D * self.w_den)

        self._update_basis(k, enter)
        self.pivot_count += 1
        if self.pivot_count > HARD_PIVOT_GUARD:
            raise WalkError("pivot guard exceeded: walk did not terminate")
        return PathStep(
            pivot_index=self.pivot_count,
            entering_row=enter,
            leaving_row=leave,
            slope=slope,
            c_gain=c_gain,
            w_gain=w_gain,
            step_length=theta,
            c_value=self.c_value(),
            basis=tuple(sorted(self.basis)),
        )

    def _ratio_test(self, k: int, x_num: list[int]) -> tuple[int, int, int]:
        """Lexicographic minimum ratio along direction -M[:,k]; returns
        (entering row, R_i.dvec, slack numerator)."""
        n, m = self.n, self.m
        M = self.M
        dvec = [-M[t][k] for t in range(n)]
        in_basis = set(self.basis)
        best_i = -1
        best_rd = 0
        best_slack = 0
        h_cache: dict[int, list[int]] = {}
        self.ops += (m - n) * (n + n)
        for i in range(m):
            if i in in_basis:
                continue
            Ri = self.R[i]
            rd = sum(a * d for a, d in zip(Ri, dvec))
            if rd <= 0:
                continue
            slack = self.beta[i] * self.D - sum(a * v for a, v in zip(Ri, x_num))
            if best_i < 0:
                best_i, best_rd, best_slack = i, rd, slack
                continue
            cmp = _cmp_frac(slack, rd, best_slack, best_rd)
            if cmp > 0:
                continue
            if cmp < 0:
                best_i, best_rd, best_slack = i, rd, slack
                continue
            if self._lex_less(i, rd, best_i, best_rd, h_cache):
                best_i, best_rd, best_slack = i, rd, slack
        if best_i < 0:
            raise UnboundedEdgeError(
                "improving edge with no blocking row (polytope not boxed?)"
            )
        return best_i, best_rd, best_slack

    def _coeff_at(self, i: int, e: int, h_cache: dict[int, list[int]]) -> int:
        """epsilon^e coefficient of row i's perturbed slack numerator."""
        c = 0
        if self.exp_of[i] == e:
            c += self.D
        for pos, j in enumerate(self.basis):
            if self.exp_of[j] == e:
                if i not in h_cache:
                    self.ops += self.n * self.n
                    h_cache[i] = [
                        sum(a * self.M[t][q] for t, a in enumerate(self.R[i]))
                        for q in range(self.n)
                    ]
                c -= h_cache[i][pos]
        return c

    def _lex_less(self, i: int, rd_i: int, l: int, rd_l: int, h_cache) -> bool:
        """Break an exact ratio tie by the symbolic perturbation coefficients."""
        exps = sorted({self.exp_of[i], self.exp_of[l], *(self.exp_of[j] for j in self.basis)})
        for e in exps:
            ci = self._coeff_at(i, e, h_cache)
            cl = self._coeff_at(l, e, h_cache)
            cmp = _cmp_frac(ci, rd_i, cl, rd_l)
            if cmp != 0:
                return cmp < 0
        raise WalkError("lexicographic tie: duplicate perturbation exponents")

    def _update_basis(self, pos: int, enter: int) -> None:
        n = self.n
        M, D = self.M, self.D
        a = self.R[enter]
        self.ops += 2 * n * n
        u = [sum(a[t] * M[t][q] for t in range(n)) for q in range(n)]
        up = u[pos]
        if up == 0:
            raise WalkError("degenerate pivot column")  # unreachable: rd != 0
        newM = [row[:] for row in M]
        for q in range(n):
            if q == pos:
                continue
            uq = u[q]
            for t in range(n):
                num = up * M[t][q] - M[t][pos] * uq
                quo, rem = divmod(num, D)
                if rem:
                    raise WalkError("integer pivot update lost exactness")
                newM[t][q] = quo
        newD = up
        if newD < 0:
            newD = -newD
            newM = [[-e for e in row] for row in newM]
        self.M = newM
        self.D = newD
        self.basis[pos] = enter
        self._price_cache = None


def shadow_pivot(tab: Tableau) -> PathStep | None:
    """Advance one minimum-slope improving edge; None when already optimal."""
    return tab.pivot()


def shadow_walk(
    lp: LinearProgram,
    x0: BasicSolution,
    c,
    w,
    pivot_cap: int | None = None,
) -> WalkResult:
    """Walk from x0 to the c-maximal vertex, or stop at the pivot cap."""
    tab = Tableau(lp, x0, c, w)
    steps: list[PathStep] = []
    start_value = tab.c_value()
    while not tab.at_optimum():
        if pivot_cap is not None and tab.pivot_count >= pivot_cap:
            return WalkResult(
                finished=False,
                solution=tab.solution(),
                path=ShadowPath(tuple(sorted(x0.basis)), start_value, tuple(steps)),
                pivots=tab.pivot_count,
            )
        step = tab.pivot()
        assert step is not None
        steps.append(step)
    return WalkResult(
        finished=True,
        solution=tab.solution(),
        path=ShadowPath(tuple(sorted(x0.basis)), start_value, tuple(steps)),
        pivots=tab.pivot_count,
    )


def validate_shadow_path(path: ShadowPath) -> None:
    """Structural invariants: neighbor bases, improving directions,
    nondecreasing values, strictly increasing slopes."""
    prev_basis = set(path.start_basis)
    prev_value = path.start_value
    prev_slope = None
    for st in path.steps:
        cur = set(st.basis)
        if len(prev_basis - cur) != 1 or len(cur - prev_basis) != 1:
            raise WalkError("consecutive bases do not differ in exactly one row")
        if st.c_gain <= 0:
            raise WalkError("non-improving edge recorded")
        if st.c_value < prev_value:
            raise WalkError("objective value decreased")
        if st.step_length < 0:
            raise WalkError("negative step")
        if prev_slope is not None and st.slope <= prev_slope:
            raise WalkError("slopes not strictly increasing")
        prev_basis = cur
        prev_value = st.c_value
        prev_slope = st.slope


def path_to_csv(path: ShadowPath) -> str:
    buf = io.StringIO()
    wtr = csv.writer(buf, lineterminator="\r\n")
    wtr.writerow(["pivot_index", "entering_row", "leaving_row", "slope", "c_value"])
    for st in path.steps:
        wtr.writerow(
            [st.pivot_index, st.entering_row, st.leaving_row, str(st.slope), str(st.c_value)]
        )
    return buf.getvalue()
