from fractions import Fraction
import random

import pytest

from slopeforge import arith
from slopeforge import lattices
from slopeforge.exceptions import (DomainMismatch, NoAdaptedBasis, NonIntegralFiltration, NotFullRank,
                                   PrecisionExhausted, RingMismatch)
from slopeforge.filtrations import FlagFiltration
from slopeforge.lattices import DvrLattice


@pytest.fixture
def context():
    return arith.PAdicContext(2)


@pytest.fixture
def standard(context):
    return DvrLattice.standard(context, 2)


@pytest.fixture
def spread(context):
    # diag(1/2, 2)
    return DvrLattice(context, [[1, 0], [0, 4]], 1)


@pytest.fixture
def hodge():
    return FlagFiltration.from_weights(arith.RationalField(), [(1, 0), (0, 1)], [1, 0])


def _random_lattice(rng, context):
    while True:
        rows = [[rng.randint(-4, 4) for _ in range(2)] for _ in range(2)]
        if rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0] != 0:
            return DvrLattice.from_rationals(context, rows)


def test_relative_position(standard, spread):
    assert lattices.pos(standard, spread) == (1, -1)
    assert lattices.nu(standard, spread) == 0
    assert lattices.dist_sq(standard, spread) == 2
    assert lattices.pos(spread, standard) == lattices.pos(standard, spread).involution()


def test_from_rationals_clears_denominators(context, standard):
    lattice = DvrLattice.from_rationals(context, [[1, 0], [0, Fraction(1, 2)]])
    assert lattice.shift == 1
    assert lattices.pos(standard, lattice) == (1, 0)
    assert lattice.to_rationals() == [[1, 0], [0, Fraction(1, 2)]]
    assert lattice.determinant_valuation() == -1


def test_lattice_equal_ignores_unimodular_change(context, standard):
    assert lattices.lattice_equal(standard, DvrLattice(context, [[1, 1], [0, 1]]))
    assert not lattices.lattice_equal(standard, standard.scaled(1))
    assert lattices.pos(standard, standard.scaled(1)) == (-1, -1)


def test_triangle_inequalities(context):
    rng = random.Random(11)
    for _ in range(25):
        m1, m2, m3 = (_random_lattice(rng, context) for _ in range(3))
        assert lattices.pos_triangle_holds(m1, m2, m3)
        assert lattices.distance_triangle_holds(m1, m2, m3)
        assert lattices.nu(m1, m3) == lattices.nu(m1, m2) + lattices.nu(m2, m3)


def test_u_adic_position():
    context = arith.UAdicContext(2, 6)
    standard = DvrLattice.standard(context, 2)
    lattice = DvrLattice(context, [['u', '0'], ['0', 'u^3']])
    assert lattices.pos(standard, lattice) == (-1, -3)
    with pytest.raises(PrecisionExhausted):
        lattices.pos(standard, DvrLattice(context, [['u', 'u'], ['u', 'u']]))


def test_mismatched_lattices(context, standard):
    with pytest.raises(RingMismatch):
        lattices.pos(standard, DvrLattice.standard(arith.PAdicContext(3), 2))
    with pytest.raises(DomainMismatch):
        lattices.pos(standard, DvrLattice.standard(context, 3))


def test_pair_filtration_has_relative_type(standard, spread):
    assert lattices.pair_filtration(standard, spread).type_of() == lattices.pos(standard, spread)


def test_add_filtration(context, standard, hodge):
    result = lattices.add_filtration(standard, hodge)
    expected = DvrLattice.from_rationals(context, [[Fraction(1, 2), 0], [0, 1]])
    assert lattices.lattice_equal(result, expected)
    assert lattices.pos(standard, result) == hodge.type_of()


def test_add_filtration_rejects_bad_filtrations(standard):
    field = arith.RationalField()
    with pytest.raises(NonIntegralFiltration):
        lattices.add_filtration(standard, FlagFiltration.from_weights(field, [(1, 0), (0, 1)], [Fraction(1, 2), 0]))
    with pytest.raises(DomainMismatch):
        lattices.add_filtration(standard, FlagFiltration.from_weights(field, [(1,)], [1]))


def test_find_adapted_basis(standard, spread, hodge):
    lattices.find_adapted_basis(standard, spread, hodge)
    skew = FlagFiltration.from_weights(arith.RationalField(), [(1, 1), (0, 1)], [1, 0])
    with pytest.raises(NoAdaptedBasis):
        lattices.find_adapted_basis(standard, spread, skew)


def test_graded_position(standard, spread, hodge):
    assert lattices.graded_pos(standard, spread, hodge) == (1, -1)


def test_sub_and_quotient(standard, spread):
    n1, n2, q1, q2 = lattices.sub_and_quotient(standard, spread, [(1, 0)])
    assert lattices.pos(n1, n2) == (1,)
    assert lattices.pos(q1, q2) == (-1,)


def test_direct_sum_and_tensor(context, standard, spread):
    line = DvrLattice.standard(context, 1)
    half = DvrLattice(context, [[1]], 1)
    assert lattices.pos(standard, lattices.direct_sum(line, half)) == (1, 0)
    assert lattices.pos(lattices.tensor(standard, standard), lattices.tensor(spread, spread)) == (2, 0, 0, -2)


def _random_entry(rng, context):
    if context.exact:
        return rng.randint(-4, 4)
    terms = ['{0}*u^{1}'.format(rng.randint(0, context.p - 1), k) for k in range(3)]
    return ' + '.join(terms)


def _random_lattice_of_rank(rng, context, rank, max_valuation=5):
    while True:
        rows = [[_random_entry(rng, context) for _ in range(rank)] for _ in range(rank)]
        try:
            if context.exact:
                lattice = DvrLattice.from_rationals(context, rows)
            else:
                lattice = DvrLattice(context, rows)
            valuation = lattice.determinant_valuation()
        except (NotFullRank, PrecisionExhausted):
            continue
        if context.exact or valuation <= max_valuation:
            return lattice


@pytest.fixture(params=['p-adic', 'u-adic'])
def any_context(request):
    if request.param == 'p-adic':
        return arith.PAdicContext(2)
    return arith.UAdicContext(2, 24)


def test_triangle_inequalities_up_to_rank_four(any_context):
    rng = random.Random(101)
    for _ in range(250):
        rank = rng.randint(1, 4)
        m1, m2, m3 = (_random_lattice_of_rank(rng, any_context, rank) for _ in range(3))
        assert lattices.pos_triangle_holds(m1, m2, m3)
        assert lattices.distance_triangle_holds(m1, m2, m3)
        assert lattices.pos(m2, m1) == lattices.pos(m1, m2).involution()


def test_add_filtration_has_filtration_type(context):
    rng = random.Random(23)
    field = arith.RationalField()
    for _ in range(200):
        rank = rng.randint(1, 3)
        lattice = _random_lattice_of_rank(rng, context, rank)
        while True:
            vectors = [tuple(rng.randint(-3, 3) for _ in range(rank)) for _ in range(rank)]
            try:
                DvrLattice.from_rationals(context, vectors).determinant_valuation()
            except NotFullRank:
                continue
            break
        filtration = FlagFiltration.from_weights(field, vectors, [rng.randint(-2, 2) for _ in range(rank)])
        assert lattices.pos(lattice, lattices.add_filtration(lattice, filtration)) == filtration.type_of()
