
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
# Rational-indexed filtrations on finite dimensional vector spaces over F_p or Q.
#
# A filtration is stored as its jumps: breaks g_1 > ... > g_s and nested subspaces W_1 < ... < W_s = V with
# F^{>=g_i} V = W_i. Subspaces are tuples of reduced row-echelon rows, so equal subspaces compare equal.
#################################################################################################################


from __future__ import print_function
from fractions import Fraction
import itertools

from . import arith
from .typealgebra import TypeVector


def span(field, vectors, dimension=None):
    """The subspace spanned by 'vectors', as reduced row-echelon rows."""
    vectors = [tuple(v) for v in vectors]
    if not vectors:
        return ()
    rows, _ = arith.row_echelon(field, vectors)
    return tuple(rows)


def subspace_sum(field, first, second):
    return span(field, list(first) + list(second))


def intersect(field, first, second):
    """Intersection of two subspaces of the same ambient space."""
    if not first or not second:
        return ()
    dimension = len(first[0])
    # Solve sum a_i u_i - sum b_j w_j = 0 coordinate by coordinate.
    rows = []
    for k in range(dimension):
        rows.append([u[k] for u in first] + [field.reduce(-w[k]) for w in second])
    solutions = arith.null_space(field, rows, len(first) + len(second))
    vectors = []
    for solution in solutions:
        coefficients = solution[:len(first)]
        vectors.append(tuple(field.reduce(sum(c * u[k] for c, u in zip(coefficients, first)))
                             for k in range(dimension)))
    return span(field, vectors)


def contains(field, big, small):
    return len(subspace_sum(field, big, small)) == len(big)


def reduce_modulo(field, subspace, vector):
    """Reduces a vector modulo a subspace in echelon form (pivot coordinates become zero)."""
    _, pivots = arith.row_echelon(field, subspace) if subspace else ([], [])
    vector = [field.coerce(x) for x in vector]
    for row, pivot in zip(subspace, pivots):
        coefficient = vector[pivot]
        if field.reduce(coefficient) != 0:
            vector = [field.reduce(a - coefficient * b) for a, b in zip(vector, row)]
    return vector, pivots


def standard_space(field, dimension):
    return tuple(tuple(field.one if i == j else field.zero for j in range(dimension)) for i in range(dimension))


class FlagFiltration(object):
    """
    A filtration F^{>=g} on K^dimension by its breaks (strictly decreasing) and steps (strictly increasing).
    """

    def __init__(self, field, dimension, breaks, steps):
        breaks = [Fraction(b) for b in breaks]
        steps = [span(field, step) for step in steps]
        if len(breaks) != len(steps):
            raise ValueError('Got {0} breaks but {1} steps'.format(len(breaks), len(steps)))
        for b0, b1 in zip(breaks, breaks[1:]):
            if b1 >= b0:
                raise ValueError('Breaks must be strictly decreasing, got {0} then {1}'.format(b0, b1))
        previous = ()
        for step in steps:
            if len(step) <= len(previous) or not contains(field, step, previous):
                raise ValueError('Filtration steps must be strictly increasing and nested')
            previous = step
        if dimension > 0 and len(previous) != dimension:
            raise ValueError('The last step must be the whole space of dimension {0}'.format(dimension))
        self.field = field
        self.dimension = dimension
        self.breaks = tuple(breaks)
        self.steps = tuple(steps)

    @classmethod
    def from_chain(cls, field, dimension, chain):
        """
        Builds a filtration from (g, subspace) pairs with g decreasing and subspaces weakly increasing,
        keeping only the values where the subspace actually grows.
        """
        breaks = []
        steps = []
        previous = ()
        for value, subspace in chain:
            subspace = span(field, subspace)
            if len(subspace) > len(previous):
                breaks.append(value)
                steps.append(subspace)
                previous = subspace
        return cls(field, dimension, breaks, steps)

    @classmethod
    def from_weights(cls, field, vectors, weights):
        """
        The split filtration F^{>=g} = span{v : weight(v) >= g} of a weighted basis.
        """
        vectors = [tuple(field.coerce(x) for x in v) for v in vectors]
        dimension = len(vectors)
        values = sorted(set(Fraction(w) for w in weights), reverse=True)
        chain = [(g, [v for v, w in zip(vectors, weights) if Fraction(w) >= g]) for g in values]
        return cls.from_chain(field, dimension, chain)

    @classmethod
    def single_break(cls, field, dimension, value=0):
        """V(g): every vector has weight g."""
        if dimension == 0:
            return cls(field, 0, [], [])
        return cls(field, dimension, [value], [standard_space(field, dimension)])

    def step_at(self, value):
        """F^{>=value}."""
        value = Fraction(value)
        current = ()
        for b, step in zip(self.breaks, self.steps):
            if b >= value:
                current = step
        return current

    def step_above(self, value):
        """F^{>value}."""
        value = Fraction(value)
        current = ()
        for b, step in zip(self.breaks, self.steps):
            if b > value:
                current = step
        return current

    def graded_dimensions(self):
        previous = 0
        dimensions = []
        for step in self.steps:
            dimensions.append(len(step) - previous)
            previous = len(step)
        return dimensions

    def type_of(self):
        entries = []
        for value, multiplicity in zip(self.breaks, self.graded_dimensions()):
            entries.extend([value] * multiplicity)
        return TypeVector(entries)

    def degree(self):
        return self.type_of().degree()

    def is_integral(self):
        return all(b.denominator == 1 for b in self.breaks)

    def adapted_basis(self):
        """(vector, weight) pairs: a basis of V such that every step is spanned by a subset."""
        basis = []
        current = ()
        for value, step in zip(self.breaks, self.steps):
            for row in step:
                if not contains(self.field, current, [row]):
                    basis.append((row, value))
                    current = subspace_sum(self.field, current, [row])
        return basis

    def __eq__(self, other):
        if not isinstance(other, FlagFiltration):
            return NotImplemented
        return (self.field == other.field and self.dimension == other.dimension and
                self.breaks == other.breaks and self.steps == other.steps)

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    def __repr__(self):
        return 'FlagFiltration(breaks={0}, dimensions={1})'.format(
                [str(b) for b in self.breaks], [len(s) for s in self.steps])


def type_of(filtration):
    return filtration.type_of()


def induce(filtration, subspace):
    """
    The filtrations induced on W (in the coordinates of W's echelon basis) and on V/W (in the coordinates
    complementary to W's pivots).
    """
    field = filtration.field
    subspace = span(field, subspace)
    reduced, pivots = arith.row_echelon(field, subspace) if subspace else ([], [])
    dimension = filtration.dimension
    complement = [c for c in range(dimension) if c not in pivots]

    sub_chain = []
    quotient_chain = []
    for value, step in zip(filtration.breaks, filtration.steps):
        common = intersect(field, step, subspace)
        sub_chain.append((value, [tuple(v[p] for p in pivots) for v in common]))
        images = []
        for v in step:
            residue, _ = reduce_modulo(field, subspace, v)
            images.append(tuple(residue[c] for c in complement))
        quotient_chain.append((value, images))
    sub = FlagFiltration.from_chain(field, len(pivots), sub_chain)
    quotient = FlagFiltration.from_chain(field, len(complement), quotient_chain)
    return sub, quotient


def _kronecker(v, w):
    return tuple(a * b for a in v for b in w)


def _symmetric_product(field, vectors, monomials, dimension):
    # Expand v_1 ... v_k in the monomial basis of Sym^k.
    index = dict((m, i) for i, m in enumerate(monomials))
    result = [field.zero] * len(monomials)
    for choice in itertools.product(range(dimension), repeat=len(vectors)):
        coefficient = field.one
        for v, c in zip(vectors, choice):
            coefficient = coefficient * v[c]
        if field.reduce(coefficient) != 0:
            key = tuple(sorted(choice))
            result[index[key]] = field.reduce(result[index[key]] + coefficient)
    return tuple(result)


def _wedge_product(field, vectors, subsets):
    # Coordinates of v_1 ^ ... ^ v_k are the k x k minors.
    coordinates = []
    for subset in subsets:
        matrix = arith.object_matrix([[v[c] for c in subset] for v in vectors])
        coordinates.append(field.reduce(arith.determinant(matrix, field.one, field.zero)))
    return tuple(coordinates)


def combine(operation, operands, k=None):
    """
    Direct sum ('sum'), tensor product ('tensor'), symmetric power ('sym') or exterior power ('ext')
    of filtrations, built from adapted bases.
    """
    field = operands[0].field
    if operation == 'sum':
        total = sum(f.dimension for f in operands)
        vectors = []
        weights = []
        offset = 0
        for f in operands:
            for v, w in f.adapted_basis():
                vectors.append((field.zero,) * offset + v + (field.zero,) * (total - offset - f.dimension))
                weights.append(w)
            offset += f.dimension
        return FlagFiltration.from_weights(field, vectors, weights)
    if operation == 'tensor':
        basis = [((field.one,), Fraction(0))]
        for f in operands:
            basis = [(_kronecker(v, w), a + b) for v, a in basis for w, b in f.adapted_basis()]
        return FlagFiltration.from_weights(field, [v for v, _ in basis], [w for _, w in basis])
    if len(operands) != 1 or k is None or k < 1:
        raise ValueError('Powers take a single filtration and an index k >= 1')
    f = operands[0]
    basis = f.adapted_basis()
    if operation == 'sym':
        monomials = list(itertools.combinations_with_replacement(range(f.dimension), k))
        pairs = [(_symmetric_product(field, [basis[i][0] for i in choice], monomials, f.dimension),
                  sum((basis[i][1] for i in choice), Fraction(0)))
                 for choice in monomials]
    elif operation == 'ext':
        subsets = list(itertools.combinations(range(f.dimension), k))
        if not subsets:
            return FlagFiltration(field, 0, [], [])
        pairs = [(_wedge_product(field, [basis[i][0] for i in choice], subsets),
                  sum((basis[i][1] for i in choice), Fraction(0)))
                 for choice in subsets]
    else:
        raise ValueError('Unknown operation "{0}"'.format(operation))
    return FlagFiltration.from_weights(field, [v for v, _ in pairs], [w for _, w in pairs])


def graded_type(first, second):
    """
    Type of Gr_{first}(second): on each graded piece of the first filtration, the filtration induced by the second.
    """
    field = first.field
    entries = []
    for value in first.breaks:
        lower = first.step_above(value)
        upper = first.step_at(value)
        previous_dimension = len(lower)
        for other in second.breaks:
            piece = subspace_sum(field, intersect(field, second.step_at(other), upper), lower)
            multiplicity = len(piece) - previous_dimension
            entries.extend([other] * multiplicity)
            previous_dimension = len(piece)
    return TypeVector(entries)


def opposite(filtration):
    """
    The split filtration with every weight negated (g -> -g) on the same adapted basis.
    """
    basis = filtration.adapted_basis()
    return FlagFiltration.from_weights(filtration.field, [v for v, _ in basis], [-w for _, w in basis])
