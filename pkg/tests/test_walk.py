import random
from fractions import Fraction

import pytest

from shadow_simplex import model, oracle, randomness, walk
from shadow_simplex.model import BasicSolution
from shadow_simplex.rational import dot
from shadow_simplex.walk import (
    ShadowPath,
    Tableau,
    UnboundedEdgeError,
    WalkError,
    shadow_pivot,
    shadow_walk,
    tight_rows_at,
    validate_shadow_path,
)

F = Fraction


def square(c0=(1, 1)):
    return model.normalize(
        model.make_lp([[1, 0], [-1, 0], [0, 1], [0, -1]], [1, 0, 1, 0], list(c0))
    )


def origin_start():
    return BasicSolution(point=(F(0), F(0)), basis=(1, 3))


class TestTightRows:
    def test_square_origin(self):
        rows = tight_rows_at(square(), origin_start())
        assert rows == [[-1, 0], [0, -1]]

    def test_cube_corner(self):
        lp = model.normalize(
            model.make_lp(
                [[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, 0, 0], [0, -1, 0], [0, 0, -1]],
                [1, 1, 1, 0, 0, 0],
                [1, 1, 1],
            )
        )
        rows = tight_rows_at(lp, BasicSolution(point=(F(1), F(1), F(1)), basis=(0, 1, 2)))
        assert rows == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]

    def test_dependent_basis_rejected(self):
        with pytest.raises(WalkError):
            tight_rows_at(square(), BasicSolution(point=(F(0), F(0)), basis=(1, 1)))


class TestShadowPivot:
    def test_first_pivot_by_slope(self):
        # From the origin with w = (l1, l2): neighbors (1,0) and (0,1).
        # Slopes are l1/c1 and l2/c2; choose c so (1,0) wins clearly.
        lp = square()
        c = [F(9, 10), F(1, 10)]
        w = [F(1, 2), F(1, 2)]  # -(-e1*l) - .. with l = 1/2 each
        tab = Tableau(lp, origin_start(), c, w)
        step = shadow_pivot(tab)
        assert step is not None
        assert tab.vertex() == [1, 0]
        assert step.entering_row == 0 and step.leaving_row == 1

    def test_at_optimum_returns_none(self):
        lp = square()
        tab = Tableau(
            lp, BasicSolution(point=(F(1), F(1)), basis=(0, 2)), [F(1, 2), F(1, 2)], [F(-1), F(-1)]
        )
        assert shadow_pivot(tab) is None

    def test_equal_slope_tie_takes_lowest_entering_row(self):
        # symmetric square, c and w chosen to tie the two improving edges:
        # slopes l/c equal componentwise
        lp = square()
        c = [F(1, 2), F(1, 2)]
        w = [F(1, 3), F(1, 3)]
        tab = Tableau(lp, origin_start(), c, w)
        step = shadow_pivot(tab)
        assert step.entering_row == 0  # rows 0 and 2 tie; lowest index wins

    def test_unbounded_edge_raises(self):
        lp = model.normalize(model.make_lp([[-1, 0], [0, -1]], [0, 0], [1, 1]))
        tab = Tableau(lp, BasicSolution(point=(F(0), F(0)), basis=(0, 1)), [F(1), F(0)], [F(-1), F(-1)])
        with pytest.raises(UnboundedEdgeError):
            shadow_pivot(tab)


class TestShadowWalk:
    def test_square_reaches_argmax(self):
        lp = square()
        c = [F(7, 10), F(7, 10)]
        w = [F(2, 3), F(1, 3)]
        res = shadow_walk(lp, origin_start(), c, w)
        assert res.finished
        assert res.solution.point == (1, 1)
        assert 1 <= res.pivots <= 2
        validate_shadow_path(res.path)

    def test_already_optimal_empty_path(self):
        lp = square()
        res = shadow_walk(lp, BasicSolution(point=(F(1), F(1)), basis=(0, 2)),
                          [F(1, 2), F(1, 2)], [F(-1), F(-1)])
        assert res.finished and res.pivots == 0 and res.path.steps == ()

    def test_cap_zero_contract(self):
        lp = square()
        res = shadow_walk(lp, origin_start(), [F(1, 2), F(1, 2)], [F(1, 3), F(2, 3)],
                          pivot_cap=0)
        assert not res.finished and res.path.steps == ()

    def test_walk_matches_brute_force_on_random_instances(self):
        rng = random.Random(77)
        done = 0
        while done < 40:
            m, n = rng.randint(2, 7), rng.randint(1, 3)
            A = [[F(rng.randint(-3, 3)) for _ in range(n)] for _ in range(m)]
            A = [r for r in A if any(x != 0 for x in r)]
            if len(A) < n:
                continue
            b = [F(rng.randint(0, 5)) for _ in range(len(A))]  # origin feasible
            raw = [F(rng.randint(-3, 3)) for _ in range(n)]
            if all(x == 0 for x in raw):
                continue
            lp0 = model.make_lp(A, b, raw)
            from shadow_simplex import linalg

            if linalg.rank(lp0.rows()) < n:
                continue
            lp = model.bound_polytope(model.normalize(lp0))
            try:
                start = model.move_to_vertex(lp, [F(0)] * n)
            except model.LPModelError:
                continue
            u = tight_rows_at(lp, start)
            lam = randomness.draw_lambda(n, randomness.RngConfig(seed=done), randomness.DrawStream(done))
            w = randomness.cone_objective(u, lam)
            pert = randomness.perturb_objective(
                list(lp.c0),
                randomness.RngConfig(seed=done, phi=F(8 * n)),
                randomness.DrawStream(1000 + done),
            )
            res = shadow_walk(lp, start, list(pert.c), w)
            assert res.finished
            validate_shadow_path(res.path)
            best = max(
                dot(list(pert.c), list(v.point))
                for v in oracle.enumerate_vertices(lp).vertices
            )
            assert dot(list(pert.c), list(res.solution.point)) == best
            done += 1

    def test_degenerate_start_walks_cleanly(self):
        # pyramid apex has 4 tight rows in R^3: start there, minimize -z-ish
        lp0 = model.make_lp(
            [[1, 0, 1], [-1, 0, 1], [0, 1, 1], [0, -1, 1], [0, 0, -1]],
            [1, 1, 1, 1, 0],
            [0, 0, -1],
        )
        lp = model.bound_polytope(model.normalize(lp0))
        apex = BasicSolution(point=(F(0), F(0), F(1)), basis=(0, 1, 2))
        u = tight_rows_at(lp, apex)
        lam = [F(1, 2), F(1, 3), F(1, 4)]
        w = randomness.cone_objective(u, lam)
        pert = randomness.perturb_objective(
            list(lp.c0), randomness.RngConfig(seed=0, phi=F(40)), randomness.DrawStream(5)
        )
        res = shadow_walk(lp, apex, list(pert.c), w)
        assert res.finished
        validate_shadow_path(res.path)
        assert res.solution.point[2] == 0  # reached the base


class TestTableauInternals:
    def test_integer_inverse_invariant_along_walk(self):
        rng = random.Random(5)
        lp = model.bound_polytope(model.normalize(model.make_lp(
            [[1, 2], [-1, 1], [0, -1], [2, -1]], [4, 2, 0, 3], [1, 1]
        )))
        start = model.move_to_vertex(lp, [F(0), F(0)])
        c = [F(3, 5), F(4, 5)]
        w = [F(-1, 2), F(-1, 3)]
        tab = Tableau(lp, start, c, w)
        while True:
            # invariant: R_basis @ M == D * I exactly
            n = tab.n
            for i in range(n):
                for j in range(n):
                    got = sum(tab.R[tab.basis[i]][t] * tab.M[t][j] for t in range(n))
                    assert got == (tab.D if i == j else 0)
            # objective views stay consistent with the exact vertex
            assert tab.c_value() == dot(c, tab.vertex())
            assert tab.w_value() == dot(w, tab.vertex())
            if shadow_pivot(tab) is None:
                break

    def test_pivot_cost_linear_in_mn(self):
        # measured arithmetic-op proxy per pivot stays below C * m * n
        C = 64
        rng = random.Random(9)
        for trial in range(10):
            n = rng.randint(2, 4)
            m = rng.randint(n + 1, 8)
            A = [[F(rng.randint(-3, 3)) for _ in range(n)] for _ in range(m)]
            A = [r for r in A if any(x != 0 for x in r)]
            if len(A) < n:
                continue
            b = [F(rng.randint(0, 4)) for _ in range(len(A))]
            lp0 = model.make_lp(A, b, [1] * n)
            from shadow_simplex import linalg

            if linalg.rank(lp0.rows()) < n:
                continue
            lp = model.bound_polytope(model.normalize(lp0))
            try:
                start = model.move_to_vertex(lp, [F(0)] * n)
            except model.LPModelError:
                continue
            c = [F(rng.randint(1, 5), 7) for _ in range(n)]
            w = [F(-rng.randint(1, 5), 7) for _ in range(n)]
            tab = Tableau(lp, start, c, w)
            tab.ops = 0
            before = 0
            while shadow_pivot(tab) is not None:
                per_pivot = tab.ops - before
                before = tab.ops
                assert per_pivot <= C * lp.m * lp.n


class TestPathPlumbing:
    def test_validate_rejects_bad_paths(self):
        from shadow_simplex.walk import PathStep

        good = PathStep(1, 0, 1, F(1), F(1), F(1), F(1), F(1), (0, 2))
        path = ShadowPath(start_basis=(1, 2), start_value=F(0), steps=(good,))
        validate_shadow_path(path)  # differs by one row: {1,2} -> {0,2}
        bad = ShadowPath(
            start_basis=(0, 2),
            start_value=F(0),
            steps=(PathStep(1, 3, 1, F(1), F(0), F(1), F(1), F(1), (2, 3)),),
        )
        with pytest.raises(WalkError):
            validate_shadow_path(bad)

    def test_csv_trace_columns(self):
        lp = square()
        res = shadow_walk(lp, origin_start(), [F(7, 10), F(7, 10)], [F(2, 3), F(1, 3)])
        text = walk.path_to_csv(res.path)
        header = text.splitlines()[0]
        assert header == "pivot_index,entering_row,leaving_row,slope,c_value"
        assert len(text.splitlines()) == len(res.path.steps) + 1
