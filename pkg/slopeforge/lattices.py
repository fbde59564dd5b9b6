
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
# Full rank lattices over a discrete valuation ring O inside K^r.
#
# A DvrLattice is pi^{-shift} . B . O^r for an integral basis matrix B. Relative positions come from the Smith
# normal form of adj(B1).B2 (which is det(B1).B1^{-1}.B2), so no inverses of non-constant units are needed.
#################################################################################################################


from __future__ import print_function
from fractions import Fraction
import numpy as np

from . import arith
from . import filtrations
from .exceptions import DomainMismatch, NoAdaptedBasis, NonIntegralFiltration, NotFullRank, PrecisionExhausted, RingMismatch
from .typealgebra import TypeVector, sqrt_triangle_holds


class DvrLattice(object):
    """
    The lattice pi^{-shift} . basis . O^r in K^r.
    """

    def __init__(self, context, basis, shift=0):
        basis = arith.as_context_matrix(basis, context)
        if basis.shape[0] != basis.shape[1]:
            raise ValueError('Lattice basis must be square, got shape {0}'.format(basis.shape))
        self.context = context
        self.basis = basis
        self.shift = int(shift)

    @classmethod
    def standard(cls, context, rank):
        return cls(context, arith.identity_matrix(rank, context.one(), context.zero()))

    @classmethod
    def from_rationals(cls, context, rows):
        """
        A p-adic lattice from a rational basis matrix (columns), clearing p-power denominators into the shift.
        """
        if not isinstance(context, arith.PAdicContext):
            raise DomainMismatch('Rational bases are only accepted in the p-adic context')
        rows = [[Fraction(arith.parse_polynomial(x).coefficient(0)) if isinstance(x, str) else Fraction(x)
                 for x in row] for row in rows]
        valuations = [arith.padic_valuation(x, context.p) for row in rows for x in row if x != 0]
        if not valuations:
            raise NotFullRank('Zero matrix is not a lattice basis')
        shift = -min(valuations)
        scale = Fraction(context.p) ** shift
        return cls(context, [[x * scale for x in row] for row in rows], shift)

    @classmethod
    def from_generators(cls, context, generators, shift=0):
        """The lattice pi^{-shift} times the span of the columns of an r x m generator matrix."""
        return cls(context, arith.column_span_basis(generators, context), shift)

    @property
    def rank(self):
        return self.basis.shape[0]

    def to_rationals(self):
        """Basis with rational entries (p-adic context with constant entries only)."""
        scale = Fraction(1, self.context.p) ** self.shift
        rows = []
        for i in range(self.rank):
            row = []
            for j in range(self.rank):
                entry = self.basis[i, j]
                if not entry.is_constant():
                    raise DomainMismatch('Lattice entry {0} is not a constant'.format(entry))
                row.append(entry.coefficient(0) * scale)
            rows.append(row)
        return rows

    def scaled(self, exponent):
        """pi^exponent . M"""
        return DvrLattice(self.context, self.basis, self.shift - exponent)

    def _one_zero(self):
        return self.context.one(), self.context.zero()

    def determinant_valuation(self):
        """Valuation of the determinant of pi^{-shift}.B (the index relative to the standard lattice)."""
        one, zero = self._one_zero()
        valuation = self.context.valuation(arith.determinant(self.basis, one, zero))
        if valuation is None:
            _raise_singular(self.context)
        return valuation - self.rank * self.shift

    def __repr__(self):
        rows = ['[{0}]'.format(', '.join(str(x) for x in self.basis[i, :])) for i in range(self.rank)]
        return 'DvrLattice({0}, basis=[{1}], shift={2})'.format(self.context, ', '.join(rows), self.shift)


def _raise_singular(context):
    if context.exact:
        raise NotFullRank('Lattice basis is singular')
    raise PrecisionExhausted('Lattice basis determinant reads zero at u-precision {0}'.format(context.precision),
                             {'context': context.name, 'u_precision': context.precision})


def _check_compatible(first, second):
    if first.context != second.context:
        raise RingMismatch('Lattices over {0} and {1}'.format(first.context, second.context))
    if first.rank != second.rank:
        raise DomainMismatch('Lattices of ranks {0} and {1}'.format(first.rank, second.rank))


def _relative_snf(first, second):
    # SNF of adj(B1).B2 together with the valuation of det(B1).
    context = first.context
    one, zero = context.one(), context.zero()
    det = arith.determinant(first.basis, one, zero)
    d = context.valuation(det)
    if d is None:
        _raise_singular(context)
    change = arith.matrix_product(arith.adjugate(first.basis, one, zero), second.basis, zero)
    return arith.snf_dvr(change, context), d


def _exponents(first, second, snf, d):
    # M2 = sum O . pi^{-a_j} f_j for the adapted basis f_j of M1.
    return [-(c + first.shift - second.shift - d) for c in snf.diagonal]


def pos(first, second):
    """
    Relative position Pos(M1, M2) = (a_1 >= ... >= a_r), where M2 = sum O.pi^{-a_i} e_i for a basis e_i of M1.
    """
    _check_compatible(first, second)
    snf, d = _relative_snf(first, second)
    return TypeVector(_exponents(first, second, snf, d))


def nu(first, second):
    return pos(first, second).degree()


def dist_sq(first, second):
    return pos(first, second).norm_sq()


def lattice_equal(first, second):
    return all(a == 0 for a in pos(first, second))


def pos_triangle_holds(m1, m2, m3):
    """Pos(M1, M3) <= Pos(M1, M2) + Pos(M2, M3) in the dominance order."""
    return pos(m1, m3).dominance_le(pos(m1, m2) + pos(m2, m3))


def distance_triangle_holds(m1, m2, m3):
    """d(M1, M3) <= d(M1, M2) + d(M2, M3), decided on squared norms."""
    return sqrt_triangle_holds(dist_sq(m1, m3), dist_sq(m1, m2), dist_sq(m2, m3))


def pair_filtration(first, second):
    """
    F^i(M1, M2) = (pi^i M2 n M1 + pi M1) / pi M1 on the residue space M1/pi M1 (coordinates of M1's basis).

    Its type is Pos(M1, M2).
    """
    _check_compatible(first, second)
    context = first.context
    field = context.residue_field
    if field is None:
        raise DomainMismatch('Pair filtrations need a prime residue field ({0})'.format(context))
    snf, d = _relative_snf(first, second)
    exponents = _exponents(first, second, snf, d)
    reduced_left = [[context.residue(snf.left[i, j]) for j in range(first.rank)] for i in range(first.rank)]
    inverse = arith.inverse_matrix(field, reduced_left)
    columns = [tuple(inverse[i][j] for i in range(first.rank)) for j in range(first.rank)]
    chain = [(value, [c for c, a in zip(columns, exponents) if a >= value])
             for value in sorted(set(exponents), reverse=True)]
    return filtrations.FlagFiltration.from_chain(field, first.rank, chain)


def _subspace_matrix(context, vectors, rank):
    matrix = np.empty((rank, len(vectors)), dtype=object)
    for j, v in enumerate(vectors):
        for i in range(rank):
            matrix[i, j] = context.coerce(v[i])
    return matrix


def intersection_with_subspace(lattice, vectors):
    """
    Generators (columns, scaled like the lattice basis) of M n span(vectors): B . adj(L)[:, :k] where
    L . adj(B) . W . R is the Smith form of the subspace in M's coordinates.
    """
    context = lattice.context
    one, zero = context.one(), context.zero()
    k = len(vectors)
    if k == 0:
        return np.empty((lattice.rank, 0), dtype=object)
    w = _subspace_matrix(context, vectors, lattice.rank)
    x = arith.matrix_product(arith.adjugate(lattice.basis, one, zero), w, zero)
    snf = arith.snf_dvr(x, context)
    saturation = arith.adjugate(snf.left, one, zero)[:, :k]
    return arith.matrix_product(lattice.basis, saturation, zero)


def add_filtration(lattice, filtration):
    """
    M + F = sum over breaks g of pi^{-g} (M n F^{>=g}), for a filtration with integer breaks.
    """
    if not filtration.is_integral():
        raise NonIntegralFiltration('Filtration breaks {0} are not all integers'.format(
                [str(b) for b in filtration.breaks]))
    if filtration.dimension != lattice.rank:
        raise DomainMismatch('Filtration on dimension {0} for a rank {1} lattice'.format(
                filtration.dimension, lattice.rank))
    context = lattice.context
    top = int(max(filtration.breaks))
    columns = []
    for value, step in zip(filtration.breaks, filtration.steps):
        generators = intersection_with_subspace(lattice, step)
        factor = context.uniformizer_power(top - int(value))
        for j in range(generators.shape[1]):
            columns.append([factor * generators[i, j] for i in range(lattice.rank)])
    generator_matrix = arith.object_matrix(list(zip(*columns)))
    return DvrLattice.from_generators(context, generator_matrix, lattice.shift + top)


def _in_span(context, rows, vector):
    # Membership of a K-vector in the K-span of echelon rows with field entries.
    residual = list(vector)
    pivots = []
    for row in rows:
        pivot = next(i for i, x in enumerate(row) if x != 0)
        pivots.append(pivot)
        coefficient = residual[pivot]
        residual = [a - coefficient * context.coerce(b) for a, b in zip(residual, row)]
    return all(context.valuation(x) is None for x in residual)


def find_adapted_basis(first, second, filtration):
    """
    Attempts a basis of M1 adapted simultaneously to M2 and to every step of the filtration.

    The candidate is the Smith-form basis of (M1, M2); raises NoAdaptedBasis if some step is not spanned by a
    subset of it.
    """
    _check_compatible(first, second)
    context = first.context
    one, zero = context.one(), context.zero()
    snf, _ = _relative_snf(first, second)
    basis = arith.matrix_product(first.basis, arith.adjugate(snf.left, one, zero), zero)
    columns = [[basis[i, j] for i in range(first.rank)] for j in range(first.rank)]
    for step in filtration.steps:
        inside = [c for c in columns if _in_span(context, step, c)]
        if len(inside) != len(step):
            raise NoAdaptedBasis('No basis adapted to both lattices and the {0}-dimensional step'.format(len(step)))
    return basis


def graded_lattice(lattice, filtration):
    """
    Gr^g M = (M n F^{>=g}) / (M n F^{>g}) for each break g (decreasing), each in the coordinates of the
    filtration's adapted basis.
    """
    context = lattice.context
    field = filtration.field
    one, zero = context.one(), context.zero()
    adapted = filtration.adapted_basis()
    q = [[v[i] for v, _ in adapted] for i in range(lattice.rank)]
    q_inverse = arith.object_matrix(arith.inverse_matrix(field, q), context.coerce)
    moved = DvrLattice(context, arith.matrix_product(q_inverse, lattice.basis, zero), lattice.shift)
    pieces = []
    low = 0
    for value in filtration.breaks:
        high = low + sum(1 for _, w in adapted if w == value)
        vectors = [tuple(one if i == j else zero for i in range(lattice.rank)) for j in range(high)]
        generators = intersection_with_subspace(moved, vectors)
        block = generators[low:high, :]
        pieces.append((value, DvrLattice.from_generators(context, block, lattice.shift)))
        low = high
    return pieces


def graded_pos(first, second, filtration):
    """Pos(Gr_F M1, Gr_F M2) as the concatenation of the graded relative positions."""
    entries = []
    for (_, g1), (_, g2) in zip(graded_lattice(first, filtration), graded_lattice(second, filtration)):
        entries.extend(pos(g1, g2).entries)
    return TypeVector(entries)


def sub_and_quotient(first, second, subspace):
    """
    The pairs induced on a subspace W and on V/W: returns (N1, N2, Q1, Q2) with N_i = M_i n W and Q_i the image
    of M_i, all expressed in a basis of M1 adapted to W (so N1 and Q1 are standard).
    """
    _check_compatible(first, second)
    context = first.context
    one, zero = context.one(), context.zero()
    rank = first.rank
    k = len(subspace)
    w = _subspace_matrix(context, subspace, rank)
    adj_b1 = arith.adjugate(first.basis, one, zero)
    snf = arith.snf_dvr(arith.matrix_product(adj_b1, w, zero), context)
    p = arith.adjugate(snf.left, one, zero)
    d = (context.valuation(arith.determinant(first.basis, one, zero)) +
         context.valuation(arith.determinant(p, one, zero)))
    y = arith.matrix_product(arith.matrix_product(arith.adjugate(p, one, zero), adj_b1, zero), second.basis, zero)
    shift = second.shift - first.shift + d
    moved = DvrLattice(context, y, shift)
    vectors = [tuple(one if i == j else zero for i in range(rank)) for j in range(k)]
    sub_generators = intersection_with_subspace(moved, vectors)[:k, :]
    n1 = DvrLattice.standard(context, k)
    n2 = DvrLattice.from_generators(context, sub_generators, shift)
    q1 = DvrLattice.standard(context, rank - k)
    q2 = DvrLattice.from_generators(context, y[k:, :], shift)
    return n1, n2, q1, q2


def direct_sum(first, second):
    if first.context != second.context:
        raise RingMismatch('Lattices over {0} and {1}'.format(first.context, second.context))
    context = first.context
    shift = max(first.shift, second.shift)
    size = first.rank + second.rank
    basis = arith.identity_matrix(size, context.zero(), context.zero())
    for lattice, offset in ((first, 0), (second, first.rank)):
        factor = context.uniformizer_power(shift - lattice.shift)
        for i in range(lattice.rank):
            for j in range(lattice.rank):
                basis[offset + i, offset + j] = factor * lattice.basis[i, j]
    return DvrLattice(context, basis, shift)


def tensor(first, second):
    if first.context != second.context:
        raise RingMismatch('Lattices over {0} and {1}'.format(first.context, second.context))
    r, s = first.rank, second.rank
    basis = np.empty((r * s, r * s), dtype=object)
    for i in range(r):
        for j in range(r):
            for k in range(s):
                for l in range(s):
                    basis[i * s + k, j * s + l] = first.basis[i, j] * second.basis[k, l]
    return DvrLattice(first.context, basis, first.shift + second.shift)
