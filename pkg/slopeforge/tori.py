
"""
    Copyright (C) 2026 The slopeforge developers

    This program is free software; you can redistribute it and/or modify it under
    the terms of the GNU General Public License, version 2, as published by
    the Free Software Foundation.

    This program is distributed in the hope that it will be useful, but WITHOUT
    ANY WARRANTY; without even the implied warranty of MERCHANTABILITY or
    FITNESS FOR A PARTICULAR PURPOSE.  See the GNU General Public License
    for more details.

    You should have received a copy of the GNU General Public License along
    with this program; if not, write to Free Software Foundation, Inc.,
    51 Franklin Street, Fifth Floor, Boston, MA  02110-1301, USA.
"""


#################################################################################################################
# Cocharacter calculus for induced tori.
#
# Characters are integer-valued functions on a finite Galois set (the embeddings of a field), acted on by
# (sigma.f)(i) = f(sigma^-1(i)). The Hodge cocharacter is evaluation at the base embedding and the Newton
# cocharacter its average over the Galois orbit.
#################################################################################################################


from __future__ import print_function
from fractions import Fraction

from .exceptions import BaseMismatch, NonTransitiveAction
from .typealgebra import TypeVector, sharp_average


class GaloisSet(object):
    """
    The elements 0..size-1 with a group generated by permutations (the cyclic shift by default) and a base
    element.
    """

    def __init__(self, size, generators=None, base=0):
        if size < 1:
            raise ValueError('A Galois set needs at least one element, got {0}'.format(size))
        if generators is None:
            generators = [[(i + 1) % size for i in range(size)]]
        generators = [tuple(int(x) for x in g) for g in generators]
        for g in generators:
            if sorted(g) != list(range(size)):
                raise ValueError('{0} is not a permutation of {1} elements'.format(list(g), size))
        if not 0 <= base < size:
            raise ValueError('Base element {0} is outside 0..{1}'.format(base, size - 1))
        self.size = int(size)
        self.generators = generators
        self.base = int(base)

    def group(self):
        """Every element of the generated group, identity first, in breadth-first order."""
        identity = tuple(range(self.size))
        elements = [identity]
        seen = set(elements)
        for element in elements:
            for g in self.generators:
                product = tuple(g[element[i]] for i in range(self.size))
                if product not in seen:
                    seen.add(product)
                    elements.append(product)
        return elements

    def orbit(self, element):
        return sorted(set(g[element] for g in self.group()))

    def is_transitive(self):
        return len(self.orbit(self.base)) == self.size

    def __eq__(self, other):
        return (isinstance(other, GaloisSet) and
                (self.size, self.generators, self.base) == (other.size, other.generators, other.base))

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self.size, tuple(self.generators), self.base))

    def __repr__(self):
        return 'GaloisSet(size={0}, generators={1}, base={2})'.format(self.size, self.generators, self.base)


def _inverse(permutation):
    inverse = [0] * len(permutation)
    for i, image in enumerate(permutation):
        inverse[image] = i
    return tuple(inverse)


class CharacterFunction(object):
    """A function on a Galois set with rational values (integer for characters)."""

    def __init__(self, base, values):
        values = tuple(Fraction(v) for v in values)
        if len(values) != base.size:
            raise ValueError('Got {0} values on a Galois set of size {1}'.format(len(values), base.size))
        self.base = base
        self.values = values

    def __call__(self, element):
        return self.values[element]

    def act(self, permutation):
        """(sigma.f)(i) = f(sigma^-1(i))."""
        inverse = _inverse(permutation)
        return CharacterFunction(self.base, [self.values[inverse[i]] for i in range(self.base.size)])

    def total(self):
        return sum(self.values, Fraction(0))

    def __eq__(self, other):
        return isinstance(other, CharacterFunction) and (self.base, self.values) == (other.base, other.values)

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self.base, self.values))

    def __repr__(self):
        return 'CharacterFunction({0})'.format(', '.join(str(v) for v in self.values))


def galois_orbit(f):
    """The distinct translates sigma.f, in the order of the group enumeration."""
    orbit = []
    for permutation in f.base.group():
        image = f.act(permutation)
        if image not in orbit:
            orbit.append(image)
    return orbit


def pairing(f, cocharacter):
    """<f, mu> = sum over the Galois set of f.mu."""
    if f.base != cocharacter.base:
        raise BaseMismatch('Character and cocharacter live on different Galois sets')
    return sum((a * b for a, b in zip(f.values, cocharacter.values)), Fraction(0))


def hodge_cochar(galois_set):
    """Evaluation at the base element."""
    return CharacterFunction(galois_set, [1 if i == galois_set.base else 0 for i in range(galois_set.size)])


def newton_cochar(galois_set):
    """The average of the Hodge cocharacter over the group."""
    if not galois_set.is_transitive():
        raise NonTransitiveAction('The action on {0} elements is not transitive'.format(galois_set.size))
    hodge = hodge_cochar(galois_set)
    group = galois_set.group()
    values = [sum((hodge.act(g)(i) for g in group), Fraction(0)) / len(group) for i in range(galois_set.size)]
    return CharacterFunction(galois_set, values)


def _common_base(weights):
    if not weights:
        raise ValueError('At least one weight character is needed')
    base = weights[0].base
    for f in weights[1:]:
        if f.base != base:
            raise BaseMismatch('Weight characters live on different Galois sets')
    return base


def push_to_weights(weights, which='hodge'):
    """
    The type of the representation with weight characters f_1..f_n: (f_i(base)) for 'hodge' and the
    Haar averages of the f_i for 'newton'.
    """
    base = _common_base(weights)
    if which == 'hodge':
        return TypeVector(f(base.base) for f in weights)
    if which == 'newton':
        return TypeVector(f.total() / base.size for f in weights)
    raise ValueError("Expected 'hodge' or 'newton', got '{0}'".format(which))


def is_ordinary_abelian(weights):
    """The Newton type equals the Galois average of the Hodge weight lists (f_i(sigma^-1 base))."""
    base = _common_base(weights)
    orbit = []
    for permutation in base.group():
        point = _inverse(permutation)[base.base]
        orbit.append([f(point) for f in weights])
    return push_to_weights(weights, 'newton') == sharp_average(orbit)


def fargues_type(weights):
    """t_F = t_N involuted."""
    return push_to_weights(weights, 'newton').involution()
