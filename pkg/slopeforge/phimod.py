
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
# p-torsion and p^infinity-torsion Kisin modules.
#
# A module stores an effective Frobenius matrix A and a twist i: the Frobenius sends a coordinate vector x to
# u^{-i}.A.phi(x), where phi raises u to the p-th power. Degrees here are unnormalised.
#
# p-torsion subobjects are found by a digit-by-digit search for phi-stable lines (and, in rank 3, lines of the
# dual module for the hyperplanes). p^infinity-torsion subobjects in rank 2 are the modules
# N(b, c, L) = p^{n-b}M + p^{n-b-c}.L~ for phi-stable lines L modulo p^c, lifted one p-adic level at a time.
# Larger modules are handled when they split into diagonal blocks of rank at most 2, or at level 1.
#################################################################################################################


from __future__ import print_function
from fractions import Fraction
import itertools
import warnings
import numpy as np

from . import arith
from . import hncore
from . import lattices
from .exceptions import (DomainMismatch, PrecisionExhausted, RingMismatch, SearchBudgetExceeded,
                         VerificationFailed)
from .typealgebra import TypeVector


# Largest number of lifts of a single line accepted at one p-adic level.
DEFAULT_LINE_BUDGET = 4096

# Largest ambient rank for which the subobject searches run.
MAX_SEARCH_RANK_P_TORSION = 3
MAX_SEARCH_RANK_TORSION = 2


#
# Integer coefficient-list arithmetic (truncated series with entries reduced modulo 'modulus').
#

def _mul(a, b, modulus, size):
    product = [0] * size
    for i, x in enumerate(a):
        if not x:
            continue
        for j in range(size - i):
            if b[j]:
                product[i + j] += x * b[j]
    return [c % modulus for c in product]


def _add(a, b, modulus):
    return [(x + y) % modulus for x, y in zip(a, b)]


def _sub(a, b, modulus):
    return [(x - y) % modulus for x, y in zip(a, b)]


def _frobenius(a, p, size):
    image = [0] * size
    for k, x in enumerate(a):
        if x and k * p < size:
            image[k * p] = x
    return image


def _apply(matrix, vector, p, modulus, size):
    """A.phi(x) on coefficient lists."""
    images = [_frobenius(x, p, size) for x in vector]
    result = []
    for row in matrix:
        total = [0] * size
        for entry, image in zip(row, images):
            total = _add(total, _mul(entry, image, modulus, size), modulus)
        result.append(total)
    return result


def _valuation(a):
    for k, x in enumerate(a):
        if x:
            return k
    return None


def _coefficient_matrix(matrix):
    rows, cols = matrix.shape
    return [[list(matrix[i, j].coefficients) for j in range(cols)] for i in range(rows)]


def _series_vector(ring, vector):
    return tuple(arith.SeriesElement(ring, coefficients) for coefficients in vector)


def _frobenius_matrix(matrix):
    image = np.empty(matrix.shape, dtype=object)
    for i in range(matrix.shape[0]):
        for j in range(matrix.shape[1]):
            image[i, j] = matrix[i, j].frobenius()
    return image


def _precision_certificate(ring, **extra):
    certificate = {'context': 'u-adic', 'u_precision': ring.u_precision}
    certificate.update(extra)
    return certificate


#
# p-torsion modules over F_p[[u]].
#

class PTorsionPhiModule(object):
    """
    A free F_p[[u]]-module of rank r with Frobenius x -> u^{-twist}.A.phi(x).
    """

    def __init__(self, p, matrix, twist=0, u_precision=arith.DEFAULT_U_PRECISION):
        self.context = arith.UAdicContext(p, u_precision)
        self.ring = self.context.ring
        self.p = self.ring.p
        self.matrix = arith.as_context_matrix(matrix, self.context)
        if self.matrix.shape[0] != self.matrix.shape[1]:
            raise ValueError('Frobenius matrix must be square, got shape {0}'.format(self.matrix.shape))
        self.twist = int(twist)
        self._det_valuation = None

    @property
    def rank(self):
        return self.matrix.shape[0]

    def det_valuation(self):
        if self._det_valuation is None:
            det = arith.determinant(self.matrix, self.context.one(), self.context.zero())
            valuation = det.valuation()
            if valuation is None:
                raise PrecisionExhausted(
                        'Frobenius determinant reads zero at u-precision {0}'.format(self.ring.u_precision),
                        _precision_certificate(self.ring))
            self._det_valuation = valuation
        return self._det_valuation

    def image_lattice(self):
        """phi(phi*M) = u^{-twist}.A.M as a lattice."""
        return lattices.DvrLattice(self.context, self.matrix, self.twist)

    def __repr__(self):
        rows = ['[{0}]'.format(', '.join(str(x) for x in self.matrix[i, :])) for i in range(self.rank)]
        return 'PTorsionPhiModule(p={0}, A=[{1}], twist={2})'.format(self.p, ', '.join(rows), self.twist)


def pt_rank(module):
    return module.rank


def pt_degree(module, normalization=1):
    """
    deg M = nu(M, phi(phi*M)); 'normalization' rescales it (1/e for Kisin reductions).
    """
    standard = lattices.DvrLattice.standard(module.context, module.rank)
    return Fraction(normalization) * lattices.nu(standard, module.image_lattice())


def pt_slope(module):
    return pt_degree(module) / module.rank


def pt_hodge_type(module):
    """t_H(M) = Pos(M, phi(phi*M))."""
    standard = lattices.DvrLattice.standard(module.context, module.rank)
    return lattices.pos(standard, module.image_lattice())


def pt_twist(module, i):
    """M(i): the Frobenius multiplied by u^i."""
    return PTorsionPhiModule(module.p, module.matrix, module.twist - i, module.ring.u_precision)


def pt_dual(module):
    """
    The dual module, Frobenius (A^T)^{-1} on the dual basis, stored as u^{-(m - i)}.(adj(A)^T / unit) where
    det A = u^m.unit.
    """
    one, zero = module.context.one(), module.context.zero()
    m = module.det_valuation()
    unit = arith.determinant(module.matrix, one, zero).divide_by_u(m)
    adjugate = arith.adjugate(module.matrix, one, zero)
    inverse_unit = unit.inverse()
    matrix = np.empty(adjugate.shape, dtype=object)
    for i in range(module.rank):
        for j in range(module.rank):
            matrix[i, j] = adjugate[j, i] * inverse_unit
    return PTorsionPhiModule(module.p, matrix, m - module.twist, module.ring.u_precision)


def pt_tensor(first, second):
    if first.ring != second.ring:
        raise RingMismatch('Modules over {0} and {1}'.format(first.ring, second.ring))
    r, s = first.rank, second.rank
    matrix = np.empty((r * s, r * s), dtype=object)
    for i in range(r):
        for j in range(r):
            for k in range(s):
                for l in range(s):
                    matrix[i * s + k, j * s + l] = first.matrix[i, j] * second.matrix[k, l]
    return PTorsionPhiModule(first.p, matrix, first.twist + second.twist, first.ring.u_precision)


def pt_direct_sum(first, second):
    if first.ring != second.ring:
        raise RingMismatch('Modules over {0} and {1}'.format(first.ring, second.ring))
    context = first.context
    twist = max(first.twist, second.twist)
    size = first.rank + second.rank
    matrix = arith.identity_matrix(size, context.zero(), context.zero())
    for module, offset in ((first, 0), (second, first.rank)):
        factor = context.uniformizer_power(twist - module.twist)
        for i in range(module.rank):
            for j in range(module.rank):
                matrix[offset + i, offset + j] = factor * module.matrix[i, j]
    return PTorsionPhiModule(first.p, matrix, twist, first.ring.u_precision)


class PhiSubmodule(object):
    """
    A saturated phi-stable submodule, given by basis vectors (tuples of series) in the ambient coordinates.
    """

    def __init__(self, basis, degree, accuracy=None):
        self.basis = tuple(tuple(v) for v in basis)
        self.degree = Fraction(degree)
        # Number of leading u-digits of the basis that are reliable.
        self.accuracy = accuracy

    @property
    def rank(self):
        return len(self.basis)

    def key(self):
        return tuple(tuple(tuple(x.coefficients) for x in v) for v in self.basis)

    def __eq__(self, other):
        return isinstance(other, PhiSubmodule) and self.key() == other.key()

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        vectors = ', '.join('({0})'.format(', '.join(str(x) for x in v)) for v in self.basis)
        return 'PhiSubmodule(rank={0}, degree={1}, basis=[{2}])'.format(self.rank, self.degree, vectors)


def _completion(module, basis):
    # Unimodular completion [basis | e_i for the coordinates not pivoted by the residues].
    field = module.context.residue_field
    residues = [[x.residue() for x in v] for v in basis]
    _, pivots = arith.row_echelon(field, residues)
    columns = [list(v) for v in basis]
    for i in range(module.rank):
        if i not in pivots:
            columns.append([module.context.one() if k == i else module.context.zero() for k in range(module.rank)])
    return arith.object_matrix(list(zip(*columns)))


def _block_form(module, basis, tolerance=0):
    """
    C^{-1}.A.phi(C) for the completion C of 'basis': returns (T, S) with T on the sub and S on the quotient.

    The lower-left block must read zero below u^{N - tolerance}.
    """
    context = module.context
    one, zero = context.one(), context.zero()
    k = len(basis)
    change = _completion(module, basis)
    det = arith.determinant(change, one, zero)
    inverse = arith.adjugate(change, one, zero) * det.inverse()
    block = arith.matrix_product(arith.matrix_product(inverse, module.matrix, zero), _frobenius_matrix(change), zero)
    for i in range(k, module.rank):
        for j in range(k):
            valuation = block[i, j].valuation()
            if valuation is not None and valuation < module.ring.u_precision - tolerance:
                raise VerificationFailed('Submodule is not phi-stable: entry ({0}, {1}) reads {2}'.format(
                        i, j, block[i, j]), _precision_certificate(module.ring))
    return block[:k, :k], block[k:, k:]


def _restricted_degree(module, block):
    one, zero = module.context.one(), module.context.zero()
    valuation = arith.determinant(block, one, zero).valuation()
    if valuation is None:
        raise PrecisionExhausted('Restricted Frobenius determinant reads zero at u-precision {0}'.format(
                module.ring.u_precision), _precision_certificate(module.ring))
    return -valuation + block.shape[0] * module.twist


def _tolerance(module, sub):
    if sub.accuracy is None:
        return 0
    return module.ring.u_precision - sub.accuracy


def pt_saturated_submodule(module, generators):
    """
    The phi-stable submodule spanned by generator columns, which must already be saturated (a free quotient).
    """
    context = module.context
    matrix = arith.as_context_matrix(generators, context)
    snf = arith.snf_dvr(matrix, context, require_full_rank=False)
    rank = sum(1 for d in snf.diagonal if d is not None)
    if any(d for d in snf.diagonal[:rank]):
        raise DomainMismatch('The span of the generators is not saturated (invariant factors {0})'.format(
                snf.diagonal[:rank]))
    saturation = arith.adjugate(snf.left, context.one(), context.zero())
    basis = [tuple(saturation[i, j] for i in range(module.rank)) for j in range(rank)]
    block, _ = _block_form(module, basis)
    return PhiSubmodule(basis, _restricted_degree(module, block), module.ring.u_precision)


def pt_submodule(module, sub):
    """The sub as a module in its own basis."""
    block, _ = _block_form(module, sub.basis, _tolerance(module, sub))
    return PTorsionPhiModule(module.p, block, module.twist, module.ring.u_precision)


def pt_quotient(module, sub):
    """M/sub in the basis completing the sub's basis."""
    _, block = _block_form(module, sub.basis, _tolerance(module, sub))
    return PTorsionPhiModule(module.p, block, module.twist, module.ring.u_precision)


def _search_stable_lines(p, size, matrix, search_degree, budget=None):
    """
    Normalised solutions x (x_j = 1 at the first unit coordinate j) of A.phi(x) = lambda.x modulo u^size.

    Digits above 'search_degree' are forced to zero. Digits that influence neither phi(x) nor lambda.x below
    u^size are set to zero, so every returned vector is a distinct line at this precision.
    Returns a list of (x, valuation of lambda).
    """
    rank = len(matrix)
    found = set()
    results = []
    for j in range(rank):
        others = [i for i in range(rank) if i != j]
        x = [[0] * size for _ in range(rank)]
        x[j][0] = 1

        def consistent(k):
            y = _apply(matrix, x, p, p, size)
            lam = y[j]
            for i in others:
                if (y[i][k] - _mul(lam, x[i], p, k + 1)[k]) % p:
                    return False
            return True

        def descend(k):
            if k == size:
                y = _apply(matrix, x, p, p, size)
                s = _valuation(y[j])
                if s is None:
                    raise PrecisionExhausted('Eigenvalue of a stable line reads zero at u-precision {0}'.format(size),
                                             {'context': 'u-adic', 'u_precision': size})
                vector = tuple(tuple(0 if (p * d >= size and d + s >= size) else c
                                     for d, c in enumerate(coordinate)) for coordinate in x)
                if vector not in found:
                    found.add(vector)
                    results.append(([list(c) for c in vector], s))
                    if budget is not None and len(results) > budget:
                        raise SearchBudgetExceeded('More than {0} stable lines'.format(budget),
                                                   {'u_precision': size, 'search_degree': search_degree})
                return
            choices = itertools.product(range(p), repeat=len(others)) if k <= search_degree else [(0,) * len(others)]
            for digits in choices:
                if k == 0 and any(d for i, d in zip(others, digits) if i < j):
                    continue
                for i, d in zip(others, digits):
                    x[i][k] = d
                if consistent(k):
                    descend(k + 1)
            for i in others:
                x[i][k] = 0

        descend(0)
    return results


def _resolve_search_degree(module, search_degree):
    size = module.ring.u_precision
    if search_degree is None or search_degree >= size - 1:
        return size - 1, True
    if search_degree < 0:
        raise ValueError('Search degree must be non-negative, got {0}'.format(search_degree))
    return search_degree, False


def pt_stable_lines(module, search_degree=None):
    """
    Saturated phi-stable lines of a p-torsion module, as (list of PhiSubmodule, hncore.Certificate).
    """
    degree_bound, exhaustive = _resolve_search_degree(module, search_degree)
    size = module.ring.u_precision
    matrix = _coefficient_matrix(module.matrix)
    lines = []
    for vector, s in _search_stable_lines(module.p, size, matrix, degree_bound, DEFAULT_LINE_BUDGET):
        lines.append(PhiSubmodule([_series_vector(module.ring, vector)], -s + module.twist, size - s))
    return lines, hncore.Certificate(exhaustive, search_degree=degree_bound, u_precision=size)


def _stable_hyperplanes(module, search_degree):
    # Hyperplanes ker(w) for the phi-stable lines w of the dual (matrix adj(A)^T up to a unit).
    one, zero = module.context.one(), module.context.zero()
    adjugate = arith.adjugate(module.matrix, one, zero)
    dual = [[list(adjugate[j, i].coefficients) for j in range(module.rank)] for i in range(module.rank)]
    hyperplanes = []
    size = module.ring.u_precision
    for w, s in _search_stable_lines(module.p, size, dual, search_degree, DEFAULT_LINE_BUDGET):
        j = next(i for i, c in enumerate(w) if c[0] % module.p)
        vectors = []
        for i in range(module.rank):
            if i == j:
                continue
            vector = [[0] * module.ring.u_precision for _ in range(module.rank)]
            vector[i][0] = 1
            vector[j] = [(-c) % module.p for c in w[i]]
            vectors.append(_series_vector(module.ring, vector))
        block, _ = _block_form(module, vectors, s)
        hyperplanes.append(PhiSubmodule(vectors, _restricted_degree(module, block), size - s))
    return hyperplanes


class PTorsionCategory(hncore.SlopeCategory):
    """Saturated phi-stable submodules of one p-torsion module."""

    def __init__(self, module, search_degree=None):
        self.module = module
        self.search_degree = search_degree
        self._cache = None

    def whole(self):
        one, zero = self.module.context.one(), self.module.context.zero()
        basis = [tuple(one if i == j else zero for i in range(self.module.rank)) for j in range(self.module.rank)]
        return PhiSubmodule(basis, pt_degree(self.module), self.module.ring.u_precision)

    def rank(self, obj):
        return obj.rank

    def degree(self, obj):
        return obj.degree

    def subobjects(self, obj):
        if self._cache is None:
            rank = self.module.rank
            if rank > MAX_SEARCH_RANK_P_TORSION:
                raise SearchBudgetExceeded('Subobject search supports rank at most {0}, got {1}'.format(
                        MAX_SEARCH_RANK_P_TORSION, rank), {'rank': rank})
            if rank == 1:
                self._cache = ([], hncore.Certificate(True))
            else:
                lines, certificate = pt_stable_lines(self.module, self.search_degree)
                if rank == 3:
                    lines = lines + _stable_hyperplanes(self.module, certificate.params['search_degree'])
                self._cache = (lines, certificate)
        return self._cache

    def contains(self, big, small):
        columns = [list(v) for v in big.basis] + [list(v) for v in small.basis]
        matrix = arith.object_matrix(list(zip(*columns)))
        snf = arith.snf_dvr(matrix, self.module.context, require_full_rank=False)
        accuracy = min(big.accuracy or self.module.ring.u_precision, small.accuracy or self.module.ring.u_precision)
        return sum(1 for d in snf.diagonal if d is not None and d < accuracy) == big.rank

    def quotient(self, obj, sub):
        return pt_quotient(self.module, sub)

    def key(self, obj):
        return obj.key()


def pt_strict_subobjects(module, search_degree=None):
    """Yields (sub, quotient module) for every enumerated saturated phi-stable submodule."""
    category = PTorsionCategory(module, search_degree)
    for sub, quotient in hncore.iter_extensions(category, category.whole()):
        yield sub, quotient


def pt_fargues(module, search_degree=None):
    """
    The Fargues (Harder-Narasimhan) flag of a p-torsion module and its polygon t_{F,1}.
    """
    category = PTorsionCategory(module, search_degree)
    whole = category.whole()
    flag = hncore.hn_flag(category, whole)
    if not flag.certificate.exhaustive:
        warnings.warn('Fargues flag computed from a bounded line search {0}'.format(flag.certificate),
                      RuntimeWarning)
    return flag, hncore.hn_polygon(category, whole)


#
# p^infinity-torsion modules over (Z/p^n)[[u]].
#

class TorsionKisinModule(object):
    """
    The free (Z/p^n)[[u]]-module of rank r with Frobenius x -> u^{-twist}.A.phi(x).
    """

    def __init__(self, p, n, matrix, twist=0, u_precision=arith.DEFAULT_U_PRECISION):
        self.ring = arith.RingSpec.zpn_series(p, n, u_precision).with_level(n)
        self.p = self.ring.p
        self.n = int(n)
        self.modulus = self.p ** self.n
        rows = matrix if not isinstance(matrix, np.ndarray) else [list(matrix[i, :]) for i in range(matrix.shape[0])]
        self.matrix = arith.object_matrix(rows, self._coerce)
        if self.matrix.shape[0] != self.matrix.shape[1]:
            raise ValueError('Frobenius matrix must be square, got shape {0}'.format(self.matrix.shape))
        self.twist = int(twist)

    def _coerce(self, value):
        if isinstance(value, arith.SeriesElement):
            if value.ring.n < self.n:
                raise DomainMismatch('Entry {0} lives at level {1}, below {2}'.format(value, value.ring.n, self.n))
            return arith.SeriesElement(self.ring, value.coefficients, value.precision, value.truncated)
        if isinstance(value, str):
            value = arith.parse_polynomial(value)
        if isinstance(value, arith.RationalPoly):
            return value.reduce(self.ring)
        return arith.SeriesElement.constant(self.ring, value)

    @property
    def ambient_rank(self):
        return self.matrix.shape[0]

    @property
    def u_precision(self):
        return self.ring.u_precision

    def coefficient_matrix(self):
        return _coefficient_matrix(self.matrix)

    def reduce(self, m):
        """M/p^m M."""
        if not 1 <= m <= self.n:
            raise DomainMismatch('Cannot reduce a level {0} module to level {1}'.format(self.n, m))
        return TorsionKisinModule(self.p, m, [[x.change_level(m) for x in row] for row in _rows(self.matrix)],
                                  self.twist, self.u_precision)

    def mod_p(self):
        """The p-torsion module M/pM."""
        context = arith.UAdicContext(self.p, self.u_precision)
        rows = [[arith.SeriesElement(context.ring, x.coefficients) for x in row] for row in _rows(self.matrix)]
        return PTorsionPhiModule(self.p, rows, self.twist, self.u_precision)

    def __repr__(self):
        rows = ['[{0}]'.format(', '.join(str(x) for x in self.matrix[i, :])) for i in range(self.ambient_rank)]
        return 'TorsionKisinModule(p={0}, n={1}, A=[{2}], twist={3})'.format(
                self.p, self.n, ', '.join(rows), self.twist)


def _rows(matrix):
    return [list(matrix[i, :]) for i in range(matrix.shape[0])]


def tk_from_phimodule(module):
    """A p-torsion module as a level-1 torsion Kisin module."""
    return TorsionKisinModule(module.p, 1, [[arith.SeriesElement(module.ring, x.coefficients) for x in row]
                                            for row in _rows(module.matrix)], module.twist, module.ring.u_precision)


def tk_twist(module, i):
    return TorsionKisinModule(module.p, module.n, _rows(module.matrix), module.twist - i, module.u_precision)


def tk_is_effective(module):
    """The actual Frobenius u^{-twist}.A has entries in the ring: every entry of A is divisible by u^twist."""
    if module.twist <= 0:
        return True
    for x in module.matrix.flat:
        valuation = x.valuation()
        if valuation is not None and valuation < module.twist:
            return False
    return True


def _flatten(vectors, rank, size):
    # Z/p^n-coordinates (i, d) of u^k.v for every generator v and shift k < size.
    columns = []
    for vector in vectors:
        for k in range(size):
            column = []
            for i in range(rank):
                column.extend(([0] * k + list(vector[i][:size - k]))[:size])
            columns.append(column)
    if not columns:
        return [[0] for _ in range(rank * size)]
    return [list(row) for row in zip(*columns)]


def _span_length(module, vectors, size=None):
    """log_p of the cardinality of the (Z/p^n)[u]/u^size-span of the vectors."""
    size = module.u_precision if size is None else size
    rows = _flatten(vectors, module.ambient_rank, size)
    return arith.snf_integer_mod(rows, module.p, module.n).image_length


def _standard_vectors(module):
    size = module.u_precision
    vectors = []
    for j in range(module.ambient_rank):
        vector = [[0] * size for _ in range(module.ambient_rank)]
        vector[j][0] = 1
        vectors.append(vector)
    return vectors


def _frobenius_images(module, vectors):
    matrix = module.coefficient_matrix()
    return [_apply(matrix, v, module.p, module.modulus, module.u_precision) for v in vectors]


def tk_mu_iw(module, generators=None):
    """
    length(N/uN) for the u-saturated submodule N generated by 'generators' (the whole module by default),
    computed as the length of N modulo u^N divided by N.
    """
    vectors = _standard_vectors(module) if generators is None else generators
    length = _span_length(module, vectors)
    return Fraction(length, module.u_precision)


def tk_rank(module):
    return module.ambient_rank * module.n


def tk_degree(module):
    """
    deg M = -length(M / <phi(M)>) + twist.rank M, with a Nakayama guard comparing truncations N and N - 1.
    """
    size = module.u_precision
    images = _frobenius_images(module, _standard_vectors(module))
    full = module.ambient_rank * size * module.n
    cokernel = full - _span_length(module, images, size)
    guard = module.ambient_rank * (size - 1) * module.n - _span_length(module, images, size - 1)
    if cokernel != guard:
        raise PrecisionExhausted('Cokernel of the Frobenius is not visible below u^{0}'.format(size),
                                 {'context': 'u-adic', 'u_precision': size, 'n': module.n})
    return Fraction(-cokernel + module.twist * tk_rank(module))


def _flattened_degree(module, generators):
    # deg N = -(length N - length <phi N>) + twist.rank N.
    length = _span_length(module, generators)
    image = _span_length(module, _frobenius_images(module, generators))
    return Fraction(-(length - image)) + module.twist * Fraction(length, module.u_precision)


class TorsionLine(object):
    """
    A phi-stable saturated line modulo p^level: x with x_j = 1, coefficients reduced modulo p^level.

    'line_degree' is the degree of its reduction modulo p (the degree per unit of rank).
    """

    def __init__(self, j, vector, level, line_degree):
        self.j = j
        self.vector = [list(c) for c in vector]
        self.level = level
        self.line_degree = Fraction(line_degree)

    def key(self):
        return (self.level, self.j, tuple(tuple(c) for c in self.vector))

    def __repr__(self):
        return 'TorsionLine(level={0}, j={1}, degree={2}, x={3})'.format(self.level, self.j, self.line_degree,
                                                                       self.vector)


def _agree(first, second, p, level):
    if level <= 0:
        return True
    if first.j != second.j:
        return False
    modulus = p ** level
    return all(a % modulus == b % modulus
               for x, y in zip(first.vector, second.vector) for a, b in zip(x, y))


def _lift_line(module, line, budget):
    """All lifts of a line modulo p^c to lines modulo p^{c + 1}."""
    p, size = module.p, module.u_precision
    c = line.level
    j = line.j
    other = 1 - j
    modulus = p ** (c + 1)
    matrix = [[[x % modulus for x in entry] for entry in row] for row in module.coefficient_matrix()]
    y = _apply(matrix, line.vector, p, modulus, size)
    difference = _sub(y[other], _mul(y[j], line.vector[other], modulus, size), modulus)
    if any(x % (p ** c) for x in difference):
        raise VerificationFailed('Line is not phi-stable modulo p^{0}'.format(c), {'level': c})
    residual = [(x // (p ** c)) % p for x in difference]
    lam = [x % p for x in y[j]]
    g = _sub([x % p for x in matrix[other][other]],
             _mul([x % p for x in matrix[j][other]], [x % p for x in line.vector[other]], p, size), p)
    rows = []
    for d in range(size):
        row = []
        for k in range(size):
            entry = 0
            if d - p * k >= 0:
                entry += g[d - p * k]
            if d - k >= 0:
                entry -= lam[d - k]
            row.append(entry % p)
        rows.append(row)
    field = arith.PrimeField(p)
    solution = arith.solve_linear(field, rows, [(-x) % p for x in residual])
    if solution is None:
        return []
    particular, kernel = solution
    zero_columns = set(k for k in range(size) if all(row[k] == 0 for row in rows))
    kernel = [v for v in kernel if not (sum(1 for x in v if x) == 1 and
                                        next(k for k, x in enumerate(v) if x) in zero_columns)]
    if p ** len(kernel) > budget:
        raise SearchBudgetExceeded('A line modulo p^{0} has {1}^{2} lifts'.format(c, p, len(kernel)),
                                   {'level': c, 'budget': budget})
    lifts = []
    for combination in itertools.product(range(p), repeat=len(kernel)):
        z = list(particular)
        for coefficient, v in zip(combination, kernel):
            z = [(a + coefficient * b) % p for a, b in zip(z, v)]
        vector = [list(coordinate) for coordinate in line.vector]
        vector[other] = [(a + (p ** c) * b) % modulus for a, b in zip(vector[other], z)]
        lifts.append(TorsionLine(j, vector, c + 1, line.line_degree))
    return lifts


class TorsionSubmodule(object):
    """
    N(b, c, L) = p^{n-b}M + p^{n-b-c}.L~ inside a torsion Kisin module of ambient rank r.
    """

    def __init__(self, b, c, line, rank, degree):
        self.b = b
        self.c = c
        self.line = line
        self.rank = rank
        self.degree = Fraction(degree)

    def key(self):
        return (self.b, self.c, self.line.key() if self.line is not None else ())

    def generators(self, module):
        size = module.u_precision
        vectors = []
        if self.b > 0:
            scale = module.p ** (module.n - self.b)
            for vector in _standard_vectors(module):
                vectors.append([[(scale * x) % module.modulus for x in c] for c in vector])
        if self.c > 0:
            scale = module.p ** (module.n - self.b - self.c)
            vectors.append([[(scale * x) % module.modulus for x in c[:size]] for c in self.line.vector])
        return vectors

    def __repr__(self):
        return 'TorsionSubmodule(b={0}, c={1}, rank={2}, degree={3}, line={4})'.format(
                self.b, self.c, self.rank, self.degree, self.line.vector if self.line is not None else None)


class TorsionCategory(hncore.SlopeCategory):
    """Subobjects N(b, c, L) of a torsion Kisin module of ambient rank at most 2."""

    def __init__(self, module, search_degree=None, budget=DEFAULT_LINE_BUDGET):
        if module.ambient_rank > MAX_SEARCH_RANK_TORSION:
            raise SearchBudgetExceeded('Torsion subobject search supports ambient rank at most {0}, got {1}'.format(
                    MAX_SEARCH_RANK_TORSION, module.ambient_rank), {'rank': module.ambient_rank})
        self.module = module
        self.search_degree = search_degree
        self.budget = budget
        self.reduction = module.mod_p()
        self.base_degree = pt_degree(self.reduction)
        self._cache = None
        self.lines = {}
        self.line_certificate = hncore.Certificate(True)

    def whole(self):
        n = self.module.n
        return TorsionSubmodule(n, 0, None, tk_rank(self.module), n * self.base_degree)

    def _lines_at(self, level):
        if level in self.lines:
            return self.lines[level]
        if level == 1:
            lines, certificate = pt_stable_lines(self.reduction, self.search_degree)
            self.line_certificate = certificate
            result = []
            for line in lines:
                vector = [list(x.coefficients) for x in line.basis[0]]
                j = next(i for i, c in enumerate(vector) if c[0] % self.module.p)
                result.append(TorsionLine(j, vector, 1, line.degree))
        else:
            result = []
            for line in self._lines_at(level - 1):
                result.extend(_lift_line(self.module, line, self.budget))
        self.lines[level] = result
        return result

    def rank(self, obj):
        return obj.rank

    def degree(self, obj):
        return obj.degree

    def subobjects(self, obj):
        if self._cache is not None:
            return self._cache
        n = self.module.n
        r = self.module.ambient_rank
        candidates = [TorsionSubmodule(b, 0, None, r * b, b * self.base_degree) for b in range(1, n)]
        if r == 2:
            for c in range(1, n + 1):
                for line in self._lines_at(c):
                    for b in range(0, n - c + 1):
                        candidates.append(TorsionSubmodule(b, c, line, 2 * b + c,
                                                           b * self.base_degree + c * line.line_degree))
        self._cache = (candidates, self.line_certificate)
        return self._cache

    def contains(self, big, small):
        n = self.module.n
        if small.b > big.b:
            return False
        if small.c == 0:
            return True
        m = n - small.b - small.c
        if m >= n - big.b:
            return True
        if big.c == 0 or m < n - big.b - big.c:
            return False
        return _agree(big.line, small.line, self.module.p, small.b + small.c - big.b)

    def key(self, obj):
        return obj.key()

    def exotic_bound_holds(self, flag):
        """
        Subobjects outside the N(b, c, L) family (lines needing u-denominators) have degree at most
        b.deg(M/p) + c.l - (p - 1) for c >= 2; True if no such subobject could change any step of the flag.
        """
        if self.module.ambient_rank < 2 or not self._lines_at(1):
            return True
        n = self.module.n
        best_line = max(line.line_degree for line in self._lines_at(1))
        virtual = [(2 * b + c, b * self.base_degree + c * best_line - (self.module.p - 1))
                   for c in range(2, n + 1) for b in range(0, n - c + 1)]
        current_rank, current_degree = 0, Fraction(0)
        for step, value in zip(flag.steps, flag.slopes):
            for rank, degree in virtual:
                if rank <= current_rank:
                    continue
                relative = (degree - current_degree) / (rank - current_rank)
                if relative > value or (relative == value and rank >= step.rank):
                    return False
            current_rank, current_degree = step.rank, step.degree
        return True


def tk_strict_subobjects(module, search_degree=None):
    """Yields the enumerated strict subobjects N(b, c, L)."""
    category = TorsionCategory(module, search_degree)
    subobjects, _ = category.subobjects(category.whole())
    for sub in sorted(subobjects, key=category.key):
        yield sub


class SplitSubmodule(object):
    """
    A direct sum of subobjects of the diagonal blocks of a split torsion Kisin module; a None part is zero.

    'blocks' lists (indices, block module) in ambient coordinates.
    """

    def __init__(self, blocks, parts):
        self.blocks = blocks
        self.parts = parts
        self.rank = sum(part.rank for part in parts if part is not None)
        self.degree = sum((part.degree for part in parts if part is not None), Fraction(0))

    def key(self):
        return tuple(part.key() if part is not None else () for part in self.parts)

    def generators(self, module):
        size = module.u_precision
        vectors = []
        for (indices, block), part in zip(self.blocks, self.parts):
            if part is None:
                continue
            for local in part.generators(block):
                vector = [[0] * size for _ in range(module.ambient_rank)]
                for i, g in enumerate(indices):
                    vector[g] = list(local[i])
                vectors.append(vector)
        return vectors

    def __repr__(self):
        return 'SplitSubmodule(rank={0}, degree={1}, parts={2})'.format(self.rank, self.degree, self.parts)


def _split_fargues(module, blocks, search_degree, verify):
    # The flag of a direct sum is the sum of the flags of its summands.
    pieces = []
    certificate = hncore.Certificate(True)
    for indices in blocks:
        rows = [[module.matrix[i, j] for j in indices] for i in indices]
        block = TorsionKisinModule(module.p, module.n, rows, module.twist, module.u_precision)
        flag, _ = tk_fargues(block, search_degree, verify)
        certificate = certificate.merge(flag.certificate)
        pieces.append((indices, block, flag))
    layout = [(indices, block) for indices, block, _ in pieces]
    values = sorted(set(value for _, _, flag in pieces for value in flag.slopes), reverse=True)
    steps = []
    for value in values:
        parts = []
        for _, _, flag in pieces:
            chosen = None
            for step, step_value in zip(flag.steps, flag.slopes):
                if step_value >= value:
                    chosen = step
            parts.append(chosen)
        steps.append(SplitSubmodule(layout, parts))
    flag = hncore.HnFlag(steps, values, [step.rank for step in steps], certificate)
    if verify and all(isinstance(part, TorsionSubmodule) for step in steps for part in step.parts
                      if part is not None):
        _verify_steps(module, flag)
    return flag


def _verify_steps(module, flag):
    for step in flag.steps:
        flattened = _flattened_degree(module, step.generators(module))
        if flattened != step.degree:
            raise VerificationFailed('Step {0} has flattened degree {1}, expected {2}'.format(
                    step, flattened, step.degree), flag.certificate.as_dict())


def tk_fargues(module, search_degree=None, verify=True):
    """
    The Fargues flag of a torsion Kisin module and its (unnormalised) polygon.

    Beyond ambient rank 2 the module must either split into diagonal blocks (handled block by block) or have level
    1, where the p-torsion search applies. Every step's degree is re-derived by flattening when 'verify' is set.
    """
    if module.ambient_rank > MAX_SEARCH_RANK_TORSION:
        blocks = arith.diagonal_blocks(module.matrix)
        if len(blocks) > 1:
            flag = _split_fargues(module, blocks, search_degree, verify)
            return flag, _flag_type(flag)
        if module.n == 1 and module.ambient_rank <= MAX_SEARCH_RANK_P_TORSION:
            return pt_fargues(module.mod_p(), search_degree)
    category = TorsionCategory(module, search_degree)
    whole = category.whole()
    flag = hncore.hn_flag(category, whole)
    if not category.exotic_bound_holds(flag):
        flag.certificate = flag.certificate.merge(hncore.Certificate(False, exotic_bound='unresolved'))
    if not flag.certificate.exhaustive:
        warnings.warn('Torsion Fargues flag is not certified exhaustive {0}'.format(flag.certificate),
                      RuntimeWarning)
    if verify:
        _verify_steps(module, flag)
    return flag, _flag_type(flag)


def _flag_type(flag):
    entries = []
    for value, multiplicity in zip(flag.slopes, flag.graded_ranks()):
        entries.extend([value] * multiplicity)
    return TypeVector(entries)


def tk_mu_min(module, search_degree=None):
    """The last (smallest) slope of the Fargues flag."""
    flag, _ = tk_fargues(module, search_degree)
    return flag.slopes[-1]


def tk_min_quotient(module, search_degree=None):
    """
    M^min, the last graded piece of the Fargues flag, as a free torsion Kisin module.
    """
    flag, _ = tk_fargues(module, search_degree)
    if len(flag.steps) == 1:
        return module
    previous = flag.steps[-2]
    return _quotient_module(module, previous)


def _quotient_module(module, sub):
    if not isinstance(sub, TorsionSubmodule):
        raise DomainMismatch('Quotients are only built for subobjects N(b, c, L), got {0}'.format(sub))
    n = module.n
    if sub.c == 0:
        return module.reduce(n - sub.b)
    if sub.b + sub.c == n:
        level = n - sub.b
        line = sub.line
        ring = module.ring
        x = _series_vector(ring, line.vector)
        other = 1 - line.j
        one, zero = arith.SeriesElement.constant(ring, 1), arith.SeriesElement.constant(ring, 0)
        columns = [list(x), [one if i == other else zero for i in range(2)]]
        change = arith.object_matrix(list(zip(*columns)))
        det = arith.determinant(change, one, zero)
        inverse = arith.adjugate(change, one, zero) * det.inverse()
        block = arith.matrix_product(arith.matrix_product(inverse, module.matrix, zero), _frobenius_matrix(change),
                                     zero)
        return TorsionKisinModule(module.p, level, [[block[1, 1].change_level(level)]], module.twist,
                                  module.u_precision)
    raise DomainMismatch('The quotient by {0} is not free'.format(sub))
