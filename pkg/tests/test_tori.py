from fractions import Fraction
import random

import pytest

from slopeforge import tori
from slopeforge.exceptions import BaseMismatch, NonTransitiveAction


@pytest.fixture
def pair():
    return tori.GaloisSet(2)


@pytest.fixture
def deltas(pair):
    return [tori.CharacterFunction(pair, [1, 0]), tori.CharacterFunction(pair, [0, 1])]


def test_galois_set_group():
    cyclic = tori.GaloisSet(3)
    group = cyclic.group()
    assert len(group) == 3
    assert group[0] == (0, 1, 2)
    assert cyclic.orbit(0) == [0, 1, 2]
    assert cyclic.is_transitive()
    klein = tori.GaloisSet(4, generators=[[1, 0, 3, 2], [2, 3, 0, 1]])
    assert len(klein.group()) == 4
    split = tori.GaloisSet(4, generators=[[1, 0, 2, 3]])
    assert split.orbit(0) == [0, 1]
    assert not split.is_transitive()


def test_galois_set_rejects():
    with pytest.raises(ValueError):
        tori.GaloisSet(0)
    with pytest.raises(ValueError):
        tori.GaloisSet(3, generators=[[0, 0, 1]])
    with pytest.raises(ValueError):
        tori.GaloisSet(3, base=3)


def test_character_action():
    cyclic = tori.GaloisSet(3)
    f = tori.CharacterFunction(cyclic, [1, 2, 3])
    assert f.act((1, 2, 0)).values == (3, 1, 2)
    assert len(tori.galois_orbit(f)) == 3
    assert tori.galois_orbit(tori.CharacterFunction(cyclic, [5, 5, 5])) == [tori.CharacterFunction(cyclic, [5, 5, 5])]
    assert f.total() == 6
    with pytest.raises(ValueError):
        tori.CharacterFunction(cyclic, [1, 2])


def test_hodge_and_newton_cocharacters(pair):
    assert tori.hodge_cochar(pair).values == (1, 0)
    assert tori.newton_cochar(pair).values == (Fraction(1, 2), Fraction(1, 2))
    assert tori.pairing(tori.hodge_cochar(pair), tori.newton_cochar(pair)) == Fraction(1, 2)
    cyclic = tori.GaloisSet(3, base=1)
    assert tori.newton_cochar(cyclic).total() == 1
    with pytest.raises(NonTransitiveAction):
        tori.newton_cochar(tori.GaloisSet(2, generators=[[0, 1]]))
    with pytest.raises(BaseMismatch):
        tori.pairing(tori.hodge_cochar(pair), tori.hodge_cochar(tori.GaloisSet(3)))


def test_push_to_weights(deltas):
    assert tori.push_to_weights(deltas, 'hodge') == (1, 0)
    assert tori.push_to_weights(deltas, 'newton') == (Fraction(1, 2), Fraction(1, 2))
    assert tori.fargues_type(deltas) == (Fraction(-1, 2), Fraction(-1, 2))
    with pytest.raises(ValueError):
        tori.push_to_weights(deltas, 'crystal')
    with pytest.raises(ValueError):
        tori.push_to_weights([])
    with pytest.raises(BaseMismatch):
        tori.push_to_weights([deltas[0], tori.CharacterFunction(tori.GaloisSet(2, base=1), [0, 1])])


def test_ordinarity(deltas):
    assert tori.is_ordinary_abelian(deltas)
    trivial = tori.GaloisSet(2, generators=[[0, 1]])
    weights = [tori.CharacterFunction(trivial, [1, 0]), tori.CharacterFunction(trivial, [0, 1])]
    assert not tori.is_ordinary_abelian(weights)


def test_cyclic_galois_sets_up_to_four():
    rng = random.Random(4)
    for size in range(1, 5):
        for base in range(size):
            galois_set = tori.GaloisSet(size, base=base)
            newton = tori.newton_cochar(galois_set)
            orbit = tori.galois_orbit(tori.hodge_cochar(galois_set))
            assert len(orbit) == size
            assert newton.values == tuple(sum((f(i) for f in orbit), Fraction(0)) / size for i in range(size))
            assert newton.total() == 1
            for g in galois_set.generators:
                assert newton.act(g) == newton
            deltas = [tori.CharacterFunction(galois_set, [1 if i == j else 0 for i in range(size)])
                      for j in range(size)]
            assert tori.is_ordinary_abelian(deltas)
            assert tori.push_to_weights(deltas, 'hodge').degree() == tori.push_to_weights(deltas, 'newton').degree()
            weights = [tori.CharacterFunction(galois_set, [rng.randint(-3, 3) for _ in range(size)])
                       for _ in range(rng.randint(1, 3))]
            assert tori.push_to_weights(weights, 'hodge').degree() == sum(f(base) for f in weights)
            assert tori.push_to_weights(weights, 'newton').degree() == Fraction(sum(f.total() for f in weights), size)
