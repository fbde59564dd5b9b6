from fractions import Fraction

import pytest

from slopeforge import arith, filtrations, isocrystal, lattices
from slopeforge.exceptions import (DomainMismatch, NonIntegralFiltration, NotDiagonalizable, NotFullRank,
                                   NotWeaklyAdmissible, SearchBudgetExceeded)


P = 2


@pytest.fixture
def ordinary():
    return isocrystal.Isocrystal(P, [[1, 0], [0, P]])


@pytest.fixture
def companion():
    return isocrystal.Isocrystal(P, [[0, P], [1, 0]])


@pytest.fixture
def identity():
    return isocrystal.Isocrystal(P, [[1, 0], [0, 1]])


@pytest.fixture
def standard():
    return lattices.DvrLattice.standard(arith.PAdicContext(P), 2)


def test_construction_rejects():
    with pytest.raises(ValueError):
        isocrystal.Isocrystal(4, [[1]])
    with pytest.raises(ValueError):
        isocrystal.Isocrystal(P, [[1, 0]])
    with pytest.raises(NotFullRank):
        isocrystal.Isocrystal(P, [[1, 2], [2, 4]])


def test_newton_slopes_from_polygon():
    # x^2 - 6x + 8 = (x - 2)(x - 4)
    assert sorted(isocrystal.newton_slopes(P, [8, -6, 1])) == [1, 2]
    assert isocrystal.newton_slopes(3, [3, 0, 1]) == [Fraction(1, 2), Fraction(1, 2)]


def test_newton_and_kottwitz(ordinary, companion, identity):
    assert isocrystal.newton_type(ordinary) == (1, 0)
    assert isocrystal.kottwitz_point(ordinary) == 1
    assert isocrystal.newton_type(companion) == (Fraction(1, 2), Fraction(1, 2))
    assert isocrystal.kottwitz_point(companion) == 1
    assert isocrystal.newton_type(identity) == (0, 0)
    squared = isocrystal.Isocrystal(P, [[0, P], [1, 0]], s=2)
    assert isocrystal.newton_type(squared) == (Fraction(1, 2), Fraction(1, 2))


def test_newton_graduation(ordinary, companion):
    graduation = isocrystal.newton_graduation(ordinary)
    assert [slope for slope, _ in graduation] == [0, 1]
    assert graduation[0][1] == (1, 0)
    with pytest.raises(NotDiagonalizable):
        isocrystal.newton_graduation(companion)


def test_lattice_hodge_and_mazur(ordinary, companion, standard):
    assert isocrystal.lattice_hodge_type(ordinary, standard) == (0, -1)
    assert isocrystal.lattice_hodge_type(companion, standard) == (0, -1)
    assert isocrystal.mazur_check(ordinary, standard)
    assert isocrystal.mazur_check(companion, standard)
    translated = isocrystal.frobenius_translate(ordinary, standard)
    assert lattices.lattice_equal(translated, isocrystal.witt_lattice(ordinary, [[1, 0], [0, P]]))


def test_window_lattices():
    windows = isocrystal.window_lattices(P, 1, 1)
    assert len(windows) == 3
    line = lattices.DvrLattice.standard(arith.PAdicContext(P), 1)
    assert sorted(lattices.pos(line, w)[0] for w in windows) == [-1, 0, 1]
    with pytest.raises(SearchBudgetExceeded):
        isocrystal.window_lattices(P, 3, 1)
    with pytest.raises(SearchBudgetExceeded):
        isocrystal.window_lattices(P, 2, 3)


@pytest.mark.parametrize('b, mu, expected', [
    ([[1, 0], [0, P]], (0, -1), True),
    ([[1, 0], [0, P]], (1, 0), False),
    ([[1, 0], [0, 1]], (0, 0), True),
    ([[P, 0], [0, P]], (-1, -1), True),
    ([[1, 0], [0, P * P]], (0, -2), True),
    ([[1, 0], [0, P * P]], (-1, -1), False),
    ([[0, P], [1, 0]], (0, -1), True),
])
def test_gashi_criterion_matches_lattice_search(b, mu, expected):
    crystal = isocrystal.Isocrystal(P, b)
    assert isocrystal.gashi_criterion(crystal, mu) == expected
    assert bool(isocrystal.lattice_set(crystal, mu)) == expected


def test_trivial_frobenius_fixes_every_lattice(identity):
    assert not isocrystal.lattice_set(identity, (1, -1))
    with pytest.raises(DomainMismatch):
        isocrystal.lattice_set(identity, (0, 0, 0))


def test_mu_ordinary(ordinary, companion, identity):
    assert isocrystal.is_mu_ordinary(ordinary, (0, -1))
    assert not isocrystal.is_mu_ordinary(companion, (0, -1))
    assert isocrystal.is_mu_ordinary(identity, (0, 0))


def test_phi_cris(ordinary, companion, identity, standard):
    once = isocrystal.phi_cris(ordinary, standard)
    assert lattices.lattice_equal(once, isocrystal.frobenius_translate(ordinary, standard))
    twice = isocrystal.phi_cris(ordinary, once)
    assert lattices.lattice_equal(twice, isocrystal.frobenius_translate(ordinary, standard, 2))
    assert lattices.lattice_equal(isocrystal.phi_cris(identity, standard), standard)
    with pytest.raises(NonIntegralFiltration):
        isocrystal.phi_cris(companion, standard)
    squared = isocrystal.Isocrystal(P, [[0, P], [1, 0]], s=2)
    with pytest.raises(NonIntegralFiltration):
        isocrystal.phi_cris(squared, standard)
    scaled = isocrystal.witt_lattice(squared, [[P, 0], [0, P]])
    assert lattices.lattice_equal(isocrystal.phi_cris(squared, standard, s=2), scaled)


def _filtered(crystal, vector):
    other = (1, 0) if vector[1] else (0, 1)
    return isocrystal.FilteredIsocrystal.from_weights(crystal, [vector, other], [1, 0])


def test_filtered_invariants(ordinary):
    filtered = _filtered(ordinary, (0, 1))
    assert isocrystal.fi_hodge_type(filtered) == (1, 0)
    assert isocrystal.fi_newton_type(filtered) == (1, 0)
    assert isocrystal.fi_deg(filtered) == 0
    with pytest.raises(NonIntegralFiltration):
        isocrystal.FilteredIsocrystal.from_weights(ordinary, [(1, 0), (0, 1)], [Fraction(1, 2), 0])
    with pytest.raises(DomainMismatch):
        isocrystal.FilteredIsocrystal.from_weights(ordinary, [(1,)], [1])


def test_sub_isocrystals(ordinary, identity):
    subspaces, certificate = isocrystal.sub_isocrystals(_filtered(ordinary, (0, 1)))
    assert len(subspaces) == 2
    assert certificate.exhaustive
    subspaces, _ = isocrystal.sub_isocrystals(_filtered(identity, (1, 1)))
    assert all(len(s) == 1 for s in subspaces)
    assert any(s == filtrations.span(identity.field, [(1, 1)]) for s in subspaces)


def test_weak_admissibility(ordinary):
    assert not isocrystal.fi_is_weakly_admissible(_filtered(ordinary, (1, 0)))
    assert isocrystal.fi_is_weakly_admissible(_filtered(ordinary, (1, 1)))
    assert isocrystal.fi_is_weakly_admissible(_filtered(ordinary, (0, 1)))
    unbalanced = isocrystal.FilteredIsocrystal.from_weights(ordinary, [(1, 0), (0, 1)], [0, 0])
    assert not isocrystal.fi_is_weakly_admissible(unbalanced)


def test_fargues_flag_of_weakly_admissible(ordinary):
    flag, fargues_type = isocrystal.fi_fargues(_filtered(ordinary, (0, 1)))
    assert flag.slopes == [0, -1]
    assert flag.ranks == [1, 2]
    assert fargues_type == (0, -1)
    flag, fargues_type = isocrystal.fi_fargues(_filtered(ordinary, (1, 1)))
    assert fargues_type.degree() == -1
    with pytest.raises(NotWeaklyAdmissible):
        isocrystal.fi_fargues(_filtered(ordinary, (1, 0)))
