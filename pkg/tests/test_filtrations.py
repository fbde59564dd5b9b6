from fractions import Fraction

import pytest

from slopeforge import arith
from slopeforge import filtrations
from slopeforge.filtrations import FlagFiltration


@pytest.fixture
def field():
    return arith.RationalField()


@pytest.fixture
def hodge(field):
    # e1 in weight 1, e2 in weight 0.
    return FlagFiltration.from_weights(field, [(1, 0), (0, 1)], [1, 0])


def test_span_and_intersection(field):
    assert filtrations.span(field, [(1, 1), (2, 2)]) == ((1, 1),)
    assert filtrations.span(arith.PrimeField(2), [(1, 1), (1, 1)]) == ((1, 1),)
    line = filtrations.span(field, [(1, 1)])
    axis = filtrations.span(field, [(1, 0)])
    assert filtrations.intersect(field, line, axis) == ()
    plane = filtrations.standard_space(field, 2)
    assert filtrations.intersect(field, plane, line) == line
    assert filtrations.contains(field, plane, line)
    assert not filtrations.contains(field, axis, line)


def test_flag_from_weights(hodge):
    assert hodge.breaks == (1, 0)
    assert [len(step) for step in hodge.steps] == [1, 2]
    assert hodge.graded_dimensions() == [1, 1]
    assert hodge.type_of() == (1, 0)
    assert hodge.degree() == 1
    assert hodge.is_integral()
    assert hodge.step_at(Fraction(1, 2)) == ((1, 0),)
    assert hodge.step_above(1) == ()
    assert hodge.adapted_basis() == [((1, 0), 1), ((0, 1), 0)]


def test_flag_validation(field):
    with pytest.raises(ValueError):
        FlagFiltration(field, 2, [0, 1], [[(1, 0)], [(1, 0), (0, 1)]])
    with pytest.raises(ValueError):
        FlagFiltration(field, 2, [1], [[(1, 0)]])
    with pytest.raises(ValueError):
        FlagFiltration(field, 2, [1, 0], [[(1, 0), (0, 1)], [(1, 0)]])


def test_from_chain_skips_repeated_steps(field):
    flag = FlagFiltration.from_chain(field, 2, [(2, [(1, 0)]), (1, [(1, 0)]), (0, [(1, 0), (0, 1)])])
    assert flag.breaks == (2, 0)
    assert not FlagFiltration.from_weights(field, [(1, 0)], [Fraction(1, 2)]).is_integral()


def test_induce_is_additive(field, hodge):
    sub, quotient = filtrations.induce(hodge, [(1, 1)])
    assert sub.type_of() == (0,)
    assert quotient.type_of() == (1,)
    sub, quotient = filtrations.induce(hodge, [(1, 0)])
    assert sub.type_of() == (1,)
    assert quotient.type_of() == (0,)
    assert sub.degree() + quotient.degree() == hodge.degree()


def test_combine(field, hodge):
    point = FlagFiltration.from_weights(field, [(1,)], [2])
    assert filtrations.combine('sum', [hodge, point]).type_of() == (2, 1, 0)
    assert filtrations.combine('tensor', [hodge, hodge]).type_of() == (2, 1, 1, 0)
    assert filtrations.combine('ext', [hodge], 2).type_of() == (1,)
    assert filtrations.combine('sym', [hodge], 2).type_of() == (2, 1, 0)
    with pytest.raises(ValueError):
        filtrations.combine('sym', [hodge, hodge], 2)


def test_graded_type(field, hodge):
    other = FlagFiltration.from_weights(field, [(0, 1), (1, 0)], [1, 0])
    assert filtrations.graded_type(hodge, hodge) == (1, 0)
    assert filtrations.graded_type(hodge, other) == (1, 0)


def test_opposite(hodge):
    assert filtrations.opposite(hodge).type_of() == (0, -1)
    assert filtrations.opposite(filtrations.opposite(hodge)) == hodge
