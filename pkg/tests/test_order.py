import itertools
from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ordstat import (
    CompareContext,
    EmptyTupleError,
    Ordering,
    Rank,
    Rational,
    Score,
    ShapeMismatchError,
    compare,
    format_ord,
    lex_tuple,
    shape,
    to_rational,
)


def rat(x) -> Rational:
    return Rational(Fraction(x))


def pair(a, b):
    return lex_tuple([rat(a), rat(b)])


class TestCompare:
    def test_lex_second_component_breaks_tie(self):
        assert compare(pair(1, "3/10"), pair(1, "7/10")) is Ordering.LT

    def test_lex_first_component_dominates(self):
        assert compare(pair(2, "1/10"), pair(1, "9/10")) is Ordering.GT

    def test_lex_identity(self):
        assert compare(pair(3, "1/2"), pair(3, "1/2")) is Ordering.EQ

    def test_rational_exact(self):
        assert compare(rat("1/3"), rat("333333/1000000")) is Ordering.GT
        assert compare(rat("1/3"), rat("2/6")) is Ordering.EQ

    def test_rank(self):
        assert compare(Rank(5), Rank(7)) is Ordering.LT

    def test_cross_shape_raises(self):
        with pytest.raises(ShapeMismatchError):
            compare(Rank(1), rat(1))

    def test_tuple_arity_mismatch_raises(self):
        with pytest.raises(ShapeMismatchError):
            compare(pair(1, 2), lex_tuple([rat(1)]))

    def test_tuple_component_shape_mismatch_raises(self):
        with pytest.raises(ShapeMismatchError):
            compare(lex_tuple([Rank(1), rat(2)]), lex_tuple([rat(1), rat(2)]))

    def test_antisymmetry_exhaustive(self):
        grid = [Rank(v) for v in range(-2, 3)]
        flip = {Ordering.LT: Ordering.GT, Ordering.GT: Ordering.LT, Ordering.EQ: Ordering.EQ}
        for a, b in itertools.product(grid, repeat=2):
            assert compare(b, a) is flip[compare(a, b)]

    def test_transitivity_exhaustive(self):
        grid = [rat(Fraction(k, 3)) for k in range(-3, 4)]
        no_gt = lambda a, b: compare(a, b) is not Ordering.GT
        for a, b, c in itertools.product(grid, repeat=3):
            if no_gt(a, b) and no_gt(b, c):
                assert no_gt(a, c)


class TestScore:
    def test_equal_values_not_flagged(self):
        ctx = CompareContext()
        assert compare(Score("1.5", 10), Score("1.50", 10), ctx) is Ordering.EQ
        assert not ctx.imprecise

    def test_within_threshold_is_eq_and_flagged(self):
        ctx = CompareContext()
        a = Score(Decimal("1.0000000000"), 10)
        b = Score(Decimal("1.000000001"), 10)  # rel distance 1e-9 < 1e-8
        assert compare(a, b, ctx) is Ordering.EQ
        assert ctx.imprecise and ctx.imprecise_ties == 1

    def test_beyond_threshold_is_strict(self):
        ctx = CompareContext()
        assert compare(Score("1.0", 10), Score("1.001", 10), ctx) is Ordering.LT
        assert not ctx.imprecise

    def test_mixed_precision_uses_coarser_threshold(self):
        ctx = CompareContext()
        a = Score(Decimal("1.0"), 50)
        b = Score(Decimal("1.000001"), 5)  # rel 1e-6 < 10**(2-5)
        assert compare(a, b, ctx) is Ordering.EQ
        assert ctx.imprecise

    def test_zero_vs_tiny_is_strict(self):
        assert compare(Score("0", 10), Score("1E-60", 10)) is Ordering.LT

    def test_float_rejected(self):
        with pytest.raises(TypeError):
            Score(1.5, 10)


class TestLexTuple:
    def test_empty_raises(self):
        with pytest.raises(EmptyTupleError):
            lex_tuple([])

    def test_arity_one_isomorphic_to_component(self):
        grid = [rat(Fraction(k, 2)) for k in range(-2, 3)]
        for a, b in itertools.product(grid, repeat=2):
            assert compare(lex_tuple([a]), lex_tuple([b])) is compare(a, b)

    def test_nesting_flattening_invariance(self):
        # Brute force over all ordered triples from a 3-element grid, checked
        # against the plain-tuple comparison of the underlying fractions.
        grid = [Fraction(0), Fraction(1, 2), Fraction(1)]
        for a, b, c in itertools.product(grid, repeat=3):
            for a2, b2, c2 in itertools.product(grid, repeat=3):
                nested = compare(
                    lex_tuple([lex_tuple([rat(a), rat(b)]), rat(c)]),
                    lex_tuple([lex_tuple([rat(a2), rat(b2)]), rat(c2)]),
                )
                flat = compare(
                    lex_tuple([rat(a), rat(b), rat(c)]),
                    lex_tuple([rat(a2), rat(b2), rat(c2)]),
                )
                assert nested is flat
                expected = Ordering.LT if (a, b, c) < (a2, b2, c2) else (
                    Ordering.GT if (a, b, c) > (a2, b2, c2) else Ordering.EQ
                )
                assert flat is expected

    def test_shape_includes_components(self):
        assert shape(pair(1, 2)) == ("tuple", "rational", "rational")
        assert shape(lex_tuple([Rank(1), Score("0.5")])) == ("tuple", "rank", "score")


@given(st.fractions(), st.fractions())
def test_rational_comparison_matches_fraction_order(a, b):
    got = compare(Rational(a), Rational(b))
    assert got is (Ordering.LT if a < b else Ordering.GT if a > b else Ordering.EQ)


@given(st.lists(st.integers(min_value=-50, max_value=50), min_size=1, max_size=4),
       st.lists(st.integers(min_value=-50, max_value=50), min_size=1, max_size=4))
def test_tuple_comparison_matches_python_tuples(xs, ys):
    if len(xs) != len(ys):
        with pytest.raises(ShapeMismatchError):
            compare(lex_tuple([Rank(v) for v in xs]), lex_tuple([Rank(v) for v in ys]))
        return
    got = compare(lex_tuple([Rank(v) for v in xs]), lex_tuple([Rank(v) for v in ys]))
    t = tuple(xs), tuple(ys)
    assert got is (Ordering.LT if t[0] < t[1] else Ordering.GT if t[0] > t[1] else Ordering.EQ)


class TestConversionsAndFormat:
    def test_to_rational(self):
        assert to_rational(Rank(5)).value == 5
        assert to_rational(Score("1.25")).value == Fraction(5, 4)
        assert to_rational(rat("2/4")).value == Fraction(1, 2)

    def test_tuple_has_no_rational_form(self):
        from ordstat import OrderError

        with pytest.raises(OrderError):
            to_rational(pair(1, 2))

    def test_format_forms(self):
        assert format_ord(rat("2/4")) == "1/2"
        assert format_ord(Rank(7)) == "7"
        assert format_ord(pair(1, "1/3")) == "(1, 1/3)"
        assert format_ord(Score("-1.25", 50)).endswith("~p50")
