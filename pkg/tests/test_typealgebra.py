from fractions import Fraction
import itertools
import random

import pytest

from slopeforge.exceptions import DomainMismatch, LengthMismatch, ParseError
from slopeforge.typealgebra import (PolygonFunction, TypeVector, distance_triangle_holds, parse_type, polygon_le,
                                    polygon_le_on, polygon_min, polygon_of, sharp_average, sqrt_triangle_holds,
                                    upper_concave_hull)


def test_type_vector_sorts_and_compares():
    t = TypeVector([0, 2, 1])
    assert t == (2, 1, 0)
    assert repr(t) == '(2, 1, 0)'
    assert t.degree() == 3
    assert t.prefix_sums() == [2, 3, 3]
    assert hash(t) == hash(TypeVector([2, 1, 0]))


def test_dominance():
    assert TypeVector([1, 1]).dominance_le(TypeVector([2, 0]))
    assert not TypeVector([2, 0]).dominance_le(TypeVector([1, 1]))
    assert not TypeVector([1, 0]).dominance_le(TypeVector([1, 1]))
    with pytest.raises(LengthMismatch):
        TypeVector([1, 0]).dominance_le(TypeVector([1]))


def test_type_operations():
    t = TypeVector([2, 1, 0])
    assert t.involution() == (0, -1, -2)
    assert t.ext_power(2) == (3, 2, 1)
    assert t.ext_power(4) == ()
    assert TypeVector([1, 0]).sym_power(2) == (2, 1, 0)
    assert TypeVector([1, 0]).tensor(TypeVector([1, 0])) == (2, 1, 1, 0)
    assert TypeVector([1]).concat(TypeVector([3])) == (3, 1)
    assert TypeVector([1, -1]).norm_sq() == 2
    assert TypeVector([1, 0]) + TypeVector([0, -1]) == (1, -1)
    assert t.scale(Fraction(1, 2)) == (1, Fraction(1, 2), 0)
    with pytest.raises(ValueError):
        t.scale(0)


def test_involution_reverses_dominance():
    rng = random.Random(7)
    for _ in range(50):
        a = TypeVector(rng.randint(-3, 3) for _ in range(3))
        shift = rng.randint(0, 2)
        entries = list(a.entries)
        entries[0] += shift
        entries[-1] -= shift
        b = TypeVector(entries)
        assert a.dominance_le(b)
        assert a.involution().dominance_le(b.involution())


def test_sharp_average():
    assert sharp_average([[1, 0], [0, 1]]) == (Fraction(1, 2), Fraction(1, 2))
    assert sharp_average([TypeVector([1, 0]), TypeVector([0, 1])]) == (1, 0)
    with pytest.raises(LengthMismatch):
        sharp_average([[1, 0], [1]])


def test_sqrt_triangle():
    assert sqrt_triangle_holds(4, 1, 1)
    assert not sqrt_triangle_holds(5, 1, 1)
    assert distance_triangle_holds(TypeVector([2, 0]), TypeVector([1, 0]), TypeVector([1, 0]))


def test_parse_type():
    assert parse_type('(1, -1/2)') == (1, Fraction(-1, 2))
    assert parse_type('()') == ()
    with pytest.raises(ParseError) as info:
        parse_type('(1, x)')
    assert info.value.column == 4
    with pytest.raises(ParseError):
        parse_type('1, 2')


def test_polygon_of_type():
    polygon = polygon_of(TypeVector([1, 0]))
    assert polygon.breakpoints == ((0, 0), (1, 1), (2, 1))
    assert polygon_of(TypeVector([1, 1])).breakpoints == ((0, 0), (2, 2))
    assert polygon.slopes() == [(1, 1), (1, 0)]
    assert polygon.evaluate(Fraction(1, 2)) == Fraction(1, 2)
    with pytest.raises(DomainMismatch):
        polygon.evaluate(3)


def test_polygon_rejects_convex_points():
    with pytest.raises(ValueError):
        PolygonFunction([(0, 0), (1, 0), (2, 1)])


def test_polygon_rescale():
    polygon = polygon_of(TypeVector([1, 0])).rescale(2)
    assert polygon.breakpoints == ((0, 0), (Fraction(1, 2), Fraction(1, 2)), (1, Fraction(1, 2)))
    assert polygon_of(TypeVector([2, 0])).scale_values(Fraction(1, 2)) == polygon_of(TypeVector([1, 0]))


def test_polygon_order_matches_dominance():
    assert polygon_le(polygon_of(TypeVector([1, 1])), polygon_of(TypeVector([2, 0])))
    assert not polygon_le(polygon_of(TypeVector([2, 0])), polygon_of(TypeVector([1, 1])))
    with pytest.raises(DomainMismatch):
        polygon_le(polygon_of(TypeVector([1, 0])), polygon_of(TypeVector([1, 1])))


def test_polygon_le_on_prefix():
    f = polygon_of(TypeVector([2, 0]))
    g = polygon_of(TypeVector([1, 1]))
    assert not polygon_le_on(f, g, 1)
    assert polygon_le_on(f, g, 1, offset=1)
    assert polygon_le_on(g, f, 2)


def test_polygon_min_inserts_crossings():
    f = PolygonFunction([(0, 0), (1, 3), (3, 3)])
    g = PolygonFunction([(0, 0), (2, 4), (3, 3)])
    result = polygon_min(f, g)
    assert result.breakpoints == ((0, 0), (Fraction(3, 2), 3), (3, 3))


def test_upper_concave_hull():
    hull = upper_concave_hull([(0, 0), (1, 1), (2, 0), (1, -1)])
    assert hull.breakpoints == ((0, 0), (1, 1), (2, 0))


def _random_type(rng, length):
    return TypeVector(Fraction(rng.randint(-12, 12), rng.randint(1, 4)) for _ in range(length))


def _binomial(n, k):
    result = 1
    for i in range(k):
        result = result * (n - i) // (i + 1)
    return result


def _sym_power_by_multisets(t, k):
    multisets = set(tuple(sorted(choice)) for choice in itertools.product(range(len(t)), repeat=k))
    return TypeVector(sum((t[i] for i in choice), Fraction(0)) for choice in multisets)


def test_degree_identities_on_random_types():
    rng = random.Random(2024)
    for _ in range(1000):
        t1 = _random_type(rng, rng.randint(1, 5))
        t2 = _random_type(rng, rng.randint(1, 5))
        r1, r2 = len(t1), len(t2)
        assert t1.involution().degree() == -t1.degree()
        assert t1.involution().involution() == t1
        assert t1.tensor(t2).degree() == r2 * t1.degree() + r1 * t2.degree()
        for k in range(1, r1 + 1):
            assert t1.ext_power(k).degree() == _binomial(r1 - 1, k - 1) * t1.degree()
        for k in range(1, 4):
            power = t1.sym_power(k)
            assert power == _sym_power_by_multisets(t1, k)
            assert power.degree() == _binomial(r1 + k - 1, k - 1) * t1.degree()


def test_norm_is_monotone_for_dominance():
    rng = random.Random(77)
    compared = 0
    for _ in range(1000):
        length = rng.randint(1, 5)
        t1 = TypeVector(rng.randint(-4, 4) for _ in range(length))
        # Moving a unit from a lower entry to a higher one climbs the dominance order.
        entries = list(t1)
        i, j = sorted(rng.sample(range(length), 2)) if length > 1 else (0, 0)
        entries[i] += 1
        entries[j] -= 1
        t2 = TypeVector(entries)
        for lower, upper in ((t1, t2), (t2, t1)):
            if lower.dominance_le(upper):
                compared += 1
                assert lower.norm_sq() <= upper.norm_sq()
                assert (lower.norm_sq() == upper.norm_sq()) == (lower == upper)
    assert compared >= 1000
