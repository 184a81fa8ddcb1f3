import random
from fractions import Fraction

import pytest

from exactnn.verifier import LinearConstraint, find_feasible_point

from oracles import fm_feasible


def satisfies(point, constraints):
    return all(c.holds(point) for c in constraints)


class TestKnownSystems:
    def test_closed_boundary_feasible(self):
        cons = [LinearConstraint((1,), "<=", 1), LinearConstraint((1,), ">=", 1)]
        point = find_feasible_point(1, cons)
        assert point == [1]

    def test_strict_boundary_infeasible(self):
        cons = [LinearConstraint((1,), "<", 1), LinearConstraint((1,), ">=", 1)]
        assert find_feasible_point(1, cons) is None

    def test_open_interval_witness(self):
        cons = [LinearConstraint((1,), ">", 0), LinearConstraint((1,), "<", 1)]
        point = find_feasible_point(1, cons)
        assert point is not None and 0 < point[0] < 1

    def test_equality(self):
        cons = [
            LinearConstraint((1, 1), "==", 5),
            LinearConstraint((1, -1), "==", 1),
        ]
        assert find_feasible_point(2, cons) == [3, 2]

    def test_negative_region(self):
        cons = [LinearConstraint((1,), "<=", -10)]
        point = find_feasible_point(1, cons)
        assert point is not None and point[0] <= -10

    def test_unbounded_direction(self):
        cons = [LinearConstraint((1, 0), ">=", 5)]
        point = find_feasible_point(2, cons)
        assert point is not None and point[0] >= 5

    def test_zero_vars(self):
        assert find_feasible_point(0, [LinearConstraint((), "<=", 1)]) == []
        assert find_feasible_point(0, [LinearConstraint((), "<", 0)]) is None

    def test_rational_coefficients(self):
        cons = [
            LinearConstraint((Fraction(1, 3), Fraction(1, 7)), ">=", Fraction(22, 21)),
            LinearConstraint((1, 0), "<=", 1),
            LinearConstraint((0, 1), "<=", 5),
        ]
        point = find_feasible_point(2, cons)
        assert point is not None and satisfies(point, cons)

    def test_infeasible_triangle(self):
        cons = [
            LinearConstraint((1, 1), "<=", 1),
            LinearConstraint((1, 0), ">=", 1),
            LinearConstraint((0, 1), ">=", 1),
        ]
        assert find_feasible_point(2, cons) is None

    def test_degenerate_equality_chain(self):
        cons = [
            LinearConstraint((1, 0), "==", 2),
            LinearConstraint((0, 1), "==", 2),
            LinearConstraint((1, 1), "<=", 4),
            LinearConstraint((1, 1), ">=", 4),
        ]
        assert find_feasible_point(2, cons) == [2, 2]

    def test_strict_with_equalities(self):
        cons = [
            LinearConstraint((1, 0), "==", 0),
            LinearConstraint((0, 1), ">", 0),
            LinearConstraint((0, 1), "<", Fraction(1, 1000)),
        ]
        point = find_feasible_point(2, cons)
        assert point is not None and satisfies(point, cons)


class TestAgainstFourierMotzkin:
    def test_random_systems_agree(self):
        rng = random.Random(99)
        for trial in range(300):
            num_vars = rng.randint(1, 3)
            rows = rng.randint(1, 6)
            constraints = []
            for _ in range(rows):
                coeffs = tuple(rng.randint(-3, 3) for _ in range(num_vars))
                comparator = rng.choice(["<=", "<", ">=", ">", "=="])
                rhs = Fraction(rng.randint(-6, 6), rng.randint(1, 3))
                constraints.append(LinearConstraint(coeffs, comparator, rhs))
            point = find_feasible_point(num_vars, constraints)
            expected = fm_feasible(num_vars, constraints)
            assert (point is not None) == expected, f"trial {trial}: {constraints}"
            if point is not None:
                assert satisfies(point, constraints), f"trial {trial}: bad witness {point}"
