"""Parser and pretty-printer tests."""

import numpy as np
import pytest

from gtlcirl.formulas import (
    Always,
    And,
    Atomic,
    EdgeProp,
    Eventually,
    ExistsN,
    FormulaError,
    Not,
    Or,
    format_formula,
    horizon,
)
from gtlcirl.parsing import ParseError, parse_formula

from generators import random_formula


class TestAtoms:
    def test_threshold_atom(self):
        assert parse_formula("(G1 >= 1.0)") == Atomic("G1", 1.0)

    def test_less_than_sugar(self):
        assert parse_formula("(V < 0.9)") == Not(Atomic("V", 0.9))

    def test_equals_one_sugar(self):
        assert parse_formula("(X = 1)") == Atomic("X", 1.0)

    def test_equals_zero_sugar(self):
        assert parse_formula("(X = 0)") == Not(Atomic("X", 1.0))

    def test_equals_other_value_rejected(self):
        with pytest.raises(ParseError):
            parse_formula("(X = 0.5)")

    def test_strict_greater_rejected_on_atoms(self):
        with pytest.raises(ParseError):
            parse_formula("(X > 0.5)")

    def test_negative_threshold(self):
        assert parse_formula("(a >= -0.5)") == Atomic("a", -0.5)


class TestOperators:
    def test_eventually_window(self):
        f = parse_formula("F[0,3](ModifyG1 >= 1.0)")
        assert f == Eventually(0, 3, Atomic("ModifyG1", 1.0))
        assert horizon(f) == 3

    def test_always_window(self):
        assert parse_formula("G[2,5](x >= 0.0)") == Always(2, 5, Atomic("x", 0.0))

    def test_conjunction_left_associative(self):
        f = parse_formula("(a >= 1.0) & (b >= 1.0) & (c >= 1.0)")
        assert f == And(And(Atomic("a", 1.0), Atomic("b", 1.0)), Atomic("c", 1.0))

    def test_precedence_and_over_or(self):
        f = parse_formula("(a >= 1.0) & (b >= 1.0) | (c >= 1.0)")
        assert isinstance(f, Or)
        assert isinstance(f.left, And)

    def test_negation(self):
        assert parse_formula("!(a >= 1.0)") == Not(Atomic("a", 1.0))

    def test_exists_with_edge_props(self):
        f = parse_formula("E2{P>0,conn>=1}(a >= 1.0)")
        assert f == ExistsN(
            2,
            (EdgeProp("P", ">", 0.0), EdgeProp("conn", ">=", 1.0)),
            Atomic("a", 1.0),
        )

    def test_grouping_parens(self):
        f = parse_formula("((a >= 1.0) | (b >= 1.0)) & (c >= 1.0)")
        assert isinstance(f, And)
        assert isinstance(f.left, Or)


class TestErrors:
    def test_inverted_bounds(self):
        with pytest.raises(ParseError, match="inverted"):
            parse_formula("F[3,0] x")

    def test_negative_bounds(self):
        with pytest.raises(ParseError, match="negative"):
            parse_formula("F[-1,2](a >= 0.0)")

    def test_unbounded_eventually(self):
        with pytest.raises(ParseError, match="unbounded"):
            parse_formula("F (a >= 0.0)")

    def test_unbounded_until(self):
        with pytest.raises(ParseError, match="unbounded"):
            parse_formula("U (a >= 0.0)")

    def test_unbounded_next(self):
        with pytest.raises(ParseError, match="unbounded"):
            parse_formula("X (a >= 0.0)")

    def test_error_carries_position(self):
        with pytest.raises(ParseError) as err:
            parse_formula("(a >= )")
        assert err.value.line == 1
        assert err.value.column == 7

    def test_trailing_garbage(self):
        with pytest.raises(ParseError, match="trailing"):
            parse_formula("(a >= 1.0) (b >= 1.0)")

    def test_non_integer_bounds(self):
        with pytest.raises(ParseError, match="integers"):
            parse_formula("F[0.5,2](a >= 0.0)")

    def test_zero_count_quantifier(self):
        with pytest.raises(ParseError):
            parse_formula("E0{P>0}(a >= 0.0)")


class TestInvariantConstruction:
    def test_inverted_interval_rejected_at_construction(self):
        with pytest.raises(FormulaError):
            Eventually(3, 0, Atomic("a", 0.0))

    def test_empty_edge_props_rejected(self):
        with pytest.raises(FormulaError):
            ExistsN(1, (), Atomic("a", 0.0))


class TestRoundTrip:
    def test_random_formulas_round_trip(self):
        """parse(print(f)) is structurally equal to f on 300 random trees."""
        rng = np.random.default_rng(11)
        for _ in range(300):
            f = random_formula(rng, depth=3, max_horizon=6)
            assert parse_formula(format_formula(f)) == f

    def test_horizon_rules(self):
        assert horizon(Atomic("a", 0.0)) == 0
        assert horizon(parse_formula("F[6,9](a >= 0.0)")) == 9
        f = And(
            Always(0, 10, Atomic("a", 0.0)),
            Eventually(3, 6, Atomic("b", 0.0)),
        )
        assert horizon(f) == 10
