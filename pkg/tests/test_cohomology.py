"""Exterior-algebra engine: exact arithmetic, signs, and the character weights."""

import math
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_obstruction import (
    AlgebraContext,
    CohomologyClass,
    ContextMismatchError,
    ValidationError,
    character_coefficient,
    cup,
    format_class,
    generator,
    obstruction_product,
    odd_chern_character,
    parse_class,
    zero,
)

CTX3 = AlgebraContext(3)
CTX6 = AlgebraContext(6)


def test_character_coefficients_against_factorial_table():
    # independent oracle: build (n-1)! by repeated multiplication, no math.factorial
    fact = 1
    table = []
    for n in range(1, 11):
        if n >= 2:
            fact *= n - 1
        table.append(Fraction(1 if n % 2 else -1, fact))
    for n, expected in enumerate(table, start=1):
        assert character_coefficient(n) == expected


def test_character_coefficient_known_values():
    assert character_coefficient(1) == 1
    assert character_coefficient(2) == -1
    assert character_coefficient(3) == Fraction(1, 2)
    assert character_coefficient(4) == Fraction(-1, 6)
    with pytest.raises(ValidationError):
        character_coefficient(0)


def test_generator_degrees():
    for i in range(1, 7):
        g = generator(CTX6, i)
        assert g.degree() == 2 * i - 1
        assert g.is_homogeneous()


def test_generator_square_vanishes():
    for i in range(1, 4):
        g = generator(CTX3, i)
        assert cup(g, g).is_zero()


def test_generator_out_of_range_is_zero():
    assert generator(CTX3, 4).is_zero()
    with pytest.raises(ValidationError):
        generator(CTX3, 0)


def test_full_product_nonzero_up_to_top_degree():
    p = obstruction_product(CTX3, [1, 2, 3])
    assert not p.is_zero()
    assert p.coefficient((1, 2, 3)) == 1
    assert p.degree() == 1 + 3 + 5


def test_product_beyond_rank_vanishes():
    assert obstruction_product(AlgebraContext(2), [1, 2, 3]).is_zero()


def test_obstruction_product_rejects_bad_indices():
    with pytest.raises(ValidationError):
        obstruction_product(CTX3, [])
    with pytest.raises(ValidationError):
        obstruction_product(CTX3, [0, 1])
    with pytest.raises(ValidationError):
        obstruction_product(CTX3, [1, 1])
    with pytest.raises(ValidationError):
        obstruction_product(CTX3, [2, 1])


def test_anticommutation_of_generators():
    a, b = generator(CTX3, 1), generator(CTX3, 2)
    assert cup(a, b) == -cup(b, a)
    assert cup(a, b).coefficient((1, 2)) == 1


def test_graded_commutativity_exhaustive_k6():
    # all basis monomials of length <= 2, all ordered pairs
    monomials = [(i,) for i in range(1, 7)] + list(combinations(range(1, 7), 2))
    classes = {m: CohomologyClass(CTX6, {m: Fraction(1)}) for m in monomials}
    for ma in monomials:
        for mb in monomials:
            da = CTX6.monomial_degree(ma)
            db = CTX6.monomial_degree(mb)
            lhs = cup(classes[ma], classes[mb])
            rhs = cup(classes[mb], classes[ma]).scale(Fraction((-1) ** (da * db)))
            assert lhs == rhs, f"sign mismatch for {ma} x {mb}"


def test_koszul_sign_triple():
    # c2 c1 c3 = -(c1 c2 c3): one transposition of odd generators
    c1, c2, c3 = (generator(CTX3, i) for i in (1, 2, 3))
    assert cup(cup(c2, c1), c3) == -obstruction_product(CTX3, [1, 2, 3])


def test_pigeonhole_vanishing():
    # four factors from three generators must repeat one
    c1, c2, c3 = (generator(CTX3, i) for i in (1, 2, 3))
    prod = cup(cup(cup(c1, c2), c3), c1)
    assert prod.is_zero()


def test_linearity_and_subtraction():
    a = generator(CTX3, 1)
    b = generator(CTX3, 2)
    s = a + b
    assert s - a == b
    assert (s - s).is_zero()
    assert a.scale(Fraction(2, 3)) + a.scale(Fraction(1, 3)) == a
    assert 2 * a == a + a
    assert a * 2 == a + a


def test_mixed_class_not_homogeneous():
    mixed = generator(CTX3, 1) + generator(CTX3, 2)
    assert not mixed.is_homogeneous()
    assert mixed.degree() is None


def test_odd_class_squares_to_zero():
    # graded commutativity over the rationals forces x^2 = 0 in odd degree
    x = generator(CTX3, 2).scale(Fraction(3, 7)) - generator(CTX3, 2).scale(2)
    assert cup(x, x).is_zero()
    mixed_odd = generator(CTX3, 3) + generator(CTX3, 1)
    assert cup(mixed_odd, mixed_odd).is_zero()


def test_context_mismatch_rejected():
    with pytest.raises(ContextMismatchError):
        generator(CTX3, 1) + generator(CTX6, 1)
    with pytest.raises(ContextMismatchError):
        cup(generator(CTX3, 1), generator(CTX6, 1))


def test_odd_chern_character_weights_inputs():
    ctx = AlgebraContext(4)
    inputs = [generator(ctx, n) for n in range(1, 5)]
    ch = odd_chern_character(inputs)
    for n in range(1, 5):
        assert ch.coefficient((n,)) == character_coefficient(n)


def test_odd_chern_character_validation():
    with pytest.raises(ValidationError):
        odd_chern_character([])
    with pytest.raises(ContextMismatchError):
        odd_chern_character([generator(CTX3, 1), generator(CTX6, 2)])


def test_format_canonical_order_and_parse_round_trip():
    ctx = AlgebraContext(3)
    cls = (
        obstruction_product(ctx, [1, 2]).scale(Fraction(-5, 3))
        + generator(ctx, 3).scale(2)
        + generator(ctx, 1)
    )
    text = format_class(cls)
    # ascending degree: c1 (1), then c1^c2 (4), then c3 (5)... degree order c1 < c1^c2 < c3
    assert text == "1 * c1 + -5/3 * c1^c2 + 2 * c3"
    assert parse_class(text, ctx) == cls
    assert format_class(zero(ctx)) == "0"
    assert parse_class("0", ctx).is_zero()


def test_parse_rejects_garbage():
    with pytest.raises(ValidationError):
        parse_class("c1 + c2", CTX3)
    with pytest.raises(ValidationError):
        parse_class("1 * c1^c1", CTX3)
    with pytest.raises(ValidationError):
        parse_class("1 * c9", CTX3)


small_classes = st.builds(
    lambda terms: CohomologyClass(
        CTX3,
        {m: Fraction(n, d) for m, (n, d) in terms.items()},
    ),
    st.dictionaries(
        st.sampled_from([(1,), (2,), (3,), (1, 2), (1, 3), (2, 3), (1, 2, 3)]),
        st.tuples(st.integers(-9, 9), st.integers(1, 9)),
        max_size=4,
    ),
)


@settings(max_examples=60, deadline=None)
@given(small_classes, small_classes, small_classes)
def test_cup_associative_and_distributive(a, b, c):
    assert cup(cup(a, b), c) == cup(a, cup(b, c))
    assert cup(a, b + c) == cup(a, b) + cup(a, c)


@settings(max_examples=60, deadline=None)
@given(small_classes, small_classes)
def test_cup_graded_commutative_on_homogeneous_parts(a, b):
    # decompose into homogeneous parts and check the sign rule on each pair
    def parts(cls):
        by_deg = {}
        for mono, coeff in cls.terms.items():
            by_deg.setdefault(CTX3.monomial_degree(mono), {})[mono] = coeff
        return {d: CohomologyClass(CTX3, t) for d, t in by_deg.items()}

    for da, pa in parts(a).items():
        for db, pb in parts(b).items():
            assert cup(pa, pb) == cup(pb, pa).scale(Fraction((-1) ** (da * db)))


def test_exact_rational_arithmetic_no_floats():
    # a third of a third, times nine, is exactly one
    g = generator(CTX3, 1)
    assert g.scale(Fraction(1, 3)).scale(Fraction(1, 3)).scale(9) == g
    coeff = obstruction_product(CTX3, [1, 2, 3]).coefficient((1, 2, 3))
    assert isinstance(coeff, Fraction)


def test_top_degree_dimension_one():
    # the only surviving length-3 monomial on k=3 is (1,2,3)
    p = obstruction_product(CTX3, [1, 2, 3])
    assert list(p.terms) == [(1, 2, 3)]
