
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
# Isocrystals (Q^r, b.sigma) with sigma trivial on rational coefficients, and filtered isocrystals.
#
# Newton slopes are the p-adic Newton polygon slopes of the characteristic polynomial of b^s, divided by s.
# Lattices are p-adic lattices in Q_p^r given by rational bases; the lattice window of bound B holds every
# lattice between p^B.Z_p^r and p^-B.Z_p^r, enumerated by column Hermite forms.
#################################################################################################################


from __future__ import print_function
from fractions import Fraction
import itertools
import sympy

from . import arith
from . import filtrations
from . import hncore
from . import lattices
from .exceptions import DomainMismatch, NonIntegralFiltration, NotDiagonalizable, NotFullRank, \
    NotWeaklyAdmissible, SearchBudgetExceeded
from .typealgebra import TypeVector


# Lattice window p^B.Z_p^r <= L <= p^-B.Z_p^r searched by lattice_set.
DEFAULT_LATTICE_BOUND = 2

MAX_LATTICE_RANK = 2
MAX_LATTICE_BOUND = 2

# Largest dimension with an exhaustive (2) or bounded (3) sub-isocrystal enumeration.
MAX_EXHAUSTIVE_RANK = 2
MAX_SUBOBJECT_RANK = 3


def _to_sympy(value):
    value = Fraction(value)
    return sympy.Rational(value.numerator, value.denominator)


def _from_sympy(value):
    value = sympy.nsimplify(value)
    if not value.is_rational:
        raise ValueError('{0} is not rational'.format(value))
    return Fraction(int(value.p), int(value.q))


def _rational(value):
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


class Isocrystal(object):
    """
    (Q^r, b.sigma) with b invertible and s the order of the residue Frobenius.
    """

    def __init__(self, p, b, s=1):
        if not sympy.isprime(p):
            raise ValueError('p = {0} is not a prime'.format(p))
        rows = [[_rational(x) for x in row] for row in b]
        if not rows or any(len(row) != len(rows) for row in rows):
            raise ValueError('Isocrystal matrix must be square and nonempty')
        if s < 1:
            raise ValueError('Frobenius order s must be at least 1, got {0}'.format(s))
        self.p = int(p)
        self.b = rows
        self.s = int(s)
        self.field = arith.RationalField()
        if self.determinant() == 0:
            raise NotFullRank('Isocrystal matrix {0} is singular'.format(rows))

    @property
    def dimension(self):
        return len(self.b)

    def sympy_matrix(self):
        return sympy.Matrix([[_to_sympy(x) for x in row] for row in self.b])

    def determinant(self):
        return arith.determinant(arith.object_matrix(self.b), Fraction(1), Fraction(0))

    def frobenius_power(self):
        """b.sigma(b)...sigma^{s-1}(b) = b^s."""
        return self.sympy_matrix() ** self.s

    def apply(self, vectors):
        """b applied to column vectors given as rows of coordinates."""
        return [tuple(sum(self.b[i][k] * v[k] for k in range(self.dimension)) for i in range(self.dimension))
                for v in vectors]

    def __repr__(self):
        return 'Isocrystal(p={0}, b={1}, s={2})'.format(self.p, [[str(x) for x in row] for row in self.b], self.s)


#
# Newton data.
#

def _lower_hull(points):
    # Andrew's monotone chain, lower part.
    hull = []
    for point in sorted(points):
        while len(hull) >= 2 and ((hull[-1][1] - hull[-2][1]) * (point[0] - hull[-1][0]) >=
                                  (point[1] - hull[-1][1]) * (hull[-1][0] - hull[-2][0])):
            hull.pop()
        hull.append(point)
    return hull


def newton_slopes(p, coefficients):
    """
    Valuations of the roots of sum c_i x^i (coefficients from c_0 up), read off the lower convex hull of
    the points (i, v_p(c_i)).
    """
    points = [(i, Fraction(arith.padic_valuation(c, p))) for i, c in enumerate(coefficients) if c != 0]
    hull = _lower_hull(points)
    slopes = []
    for (x0, y0), (x1, y1) in zip(hull, hull[1:]):
        slopes.extend([-(y1 - y0) / (x1 - x0)] * (x1 - x0))
    return slopes


def newton_type(isocrystal):
    x = sympy.Symbol('x')
    polynomial = isocrystal.frobenius_power().charpoly(x)
    coefficients = [_from_sympy(c) for c in reversed(polynomial.all_coeffs())]
    slopes = newton_slopes(isocrystal.p, coefficients)
    return TypeVector(s / isocrystal.s for s in slopes)


def kottwitz_point(isocrystal):
    return arith.padic_valuation(isocrystal.determinant(), isocrystal.p)


def _eigenspaces(isocrystal):
    # [(eigenvalue, [basis vectors])] over Q for b^s; irrational eigenvalues are skipped.
    spaces = []
    for value, _, vectors in isocrystal.frobenius_power().eigenvects():
        if not value.is_rational:
            continue
        basis = [tuple(_from_sympy(x) for x in v) for v in vectors]
        spaces.append((_from_sympy(value), basis))
    return sorted(spaces, key=lambda item: item[0])


def newton_graduation(isocrystal):
    """[(slope, eigenvector)] splitting the Newton filtration; needs b^s diagonalizable over Q."""
    spaces = _eigenspaces(isocrystal)
    if sum(len(basis) for _, basis in spaces) != isocrystal.dimension:
        raise NotDiagonalizable('b^{0} is not diagonalizable over Q for {1}'.format(isocrystal.s, isocrystal))
    graduation = []
    for value, basis in spaces:
        slope = Fraction(arith.padic_valuation(value, isocrystal.p), isocrystal.s)
        graduation.extend((slope, v) for v in basis)
    return graduation


def opposed_newton_filtration(isocrystal, s=1):
    """
    The integral filtration s.F_N^i: every Newton slope g becomes the break -s.g.
    """
    for slope in newton_type(isocrystal):
        if (s * slope).denominator != 1:
            raise NonIntegralFiltration('s = {0} times Newton slope {1} is not an integer'.format(s, slope))
    graduation = newton_graduation(isocrystal)
    return filtrations.FlagFiltration.from_weights(isocrystal.field, [v for _, v in graduation],
                                                  [-s * g for g, _ in graduation])


#
# Lattices.
#

def witt_lattice(isocrystal, rows):
    """The lattice spanned by the columns of a rational matrix."""
    return lattices.DvrLattice.from_rationals(arith.PAdicContext(isocrystal.p), rows)


def frobenius_translate(isocrystal, lattice, power=1):
    """(b.sigma)^power applied to a lattice."""
    rows = lattice.to_rationals()
    columns = list(zip(*rows))
    for _ in range(power):
        columns = isocrystal.apply(columns)
    return witt_lattice(isocrystal, [list(row) for row in zip(*columns)])


def lattice_hodge_type(isocrystal, lattice):
    """t_H(y) = Pos(y, b.sigma(y))."""
    return lattices.pos(lattice, frobenius_translate(isocrystal, lattice))


def mazur_check(isocrystal, lattice):
    """t_N(D) involuted lies below t_H(y) in the dominance order."""
    return newton_type(isocrystal).involution().dominance_le(lattice_hodge_type(isocrystal, lattice))


def _hermite_forms(p, rank, exponent):
    # Column Hermite forms of the lattices between p^exponent.Z_p^rank and Z_p^rank.
    if rank == 1:
        for a in range(exponent + 1):
            yield [[p ** a]]
        return
    for a in range(exponent + 1):
        for d in range(exponent + 1):
            for c in range(p ** a):
                # p^exponent.e_2 must lie in the span.
                if c and arith.padic_valuation(c, p) + exponent - d < a:
                    continue
                yield [[p ** a, c], [0, p ** d]]


def window_lattices(p, rank, bound=DEFAULT_LATTICE_BOUND):
    """Every lattice L with p^bound.Z_p^rank <= L <= p^-bound.Z_p^rank, in Hermite-form order."""
    if rank > MAX_LATTICE_RANK or bound > MAX_LATTICE_BOUND or bound < 0:
        raise SearchBudgetExceeded('Lattice windows support rank <= {0} and bound <= {1}, got {2} and {3}'.format(
                MAX_LATTICE_RANK, MAX_LATTICE_BOUND, rank, bound), {'rank': rank, 'bound': bound})
    context = arith.PAdicContext(p)
    scale = Fraction(1, p ** bound)
    result = []
    for form in _hermite_forms(p, rank, 2 * bound):
        result.append(lattices.DvrLattice.from_rationals(context, [[scale * x for x in row] for row in form]))
    return result


def lattice_set(isocrystal, mu, bound=DEFAULT_LATTICE_BOUND):
    """The lattices y of the window with t_H(y) = mu."""
    mu = TypeVector(mu)
    if len(mu) != isocrystal.dimension:
        raise DomainMismatch('Type {0} for an isocrystal of dimension {1}'.format(mu, isocrystal.dimension))
    return [y for y in window_lattices(isocrystal.p, isocrystal.dimension, bound)
            if lattice_hodge_type(isocrystal, y) == mu]


def gashi_criterion(isocrystal, mu):
    """t_N(D) involuted <= mu^# and kappa(D) = -deg(mu), with # the identity for trivial sigma."""
    mu = TypeVector(mu)
    return (newton_type(isocrystal).involution().dominance_le(mu) and
            kottwitz_point(isocrystal) == -mu.degree())


def is_mu_ordinary(isocrystal, mu, bound=DEFAULT_LATTICE_BOUND):
    mu = TypeVector(mu)
    if newton_type(isocrystal).involution() != mu:
        return False
    return bool(lattice_set(isocrystal, mu, bound))


def phi_cris(isocrystal, lattice, s=1):
    """y + s.F_N^i(D)."""
    return lattices.add_filtration(lattice, opposed_newton_filtration(isocrystal, s))


#
# Filtered isocrystals.
#

class FilteredIsocrystal(object):
    """An isocrystal with a Hodge filtration with integer breaks on Q^r."""

    def __init__(self, isocrystal, hodge_flag):
        if hodge_flag.dimension != isocrystal.dimension:
            raise DomainMismatch('Hodge filtration on dimension {0} for an isocrystal of dimension {1}'.format(
                    hodge_flag.dimension, isocrystal.dimension))
        if not hodge_flag.is_integral():
            raise NonIntegralFiltration('Hodge breaks {0} are not integers'.format(
                    [str(b) for b in hodge_flag.breaks]))
        self.isocrystal = isocrystal
        self.hodge_flag = hodge_flag

    @classmethod
    def from_weights(cls, isocrystal, vectors, weights):
        flag = filtrations.FlagFiltration.from_weights(isocrystal.field, vectors, weights)
        return cls(isocrystal, flag)

    @property
    def dimension(self):
        return self.isocrystal.dimension

    def whole(self):
        return filtrations.standard_space(self.isocrystal.field, self.dimension)

    def __repr__(self):
        return 'FilteredIsocrystal({0}, {1})'.format(self.isocrystal, self.hodge_flag)


def fi_hodge_type(filtered):
    return filtered.hodge_flag.type_of()


def fi_newton_type(filtered):
    return newton_type(filtered.isocrystal)


def fi_deg(filtered):
    """deg t_H - deg t_N."""
    return fi_hodge_type(filtered).degree() - kottwitz_point(filtered.isocrystal)


def _restricted_determinant(isocrystal, subspace):
    # det of b on a b-stable subspace given by echelon rows.
    field = isocrystal.field
    k = len(subspace)
    columns = []
    for image in isocrystal.apply(subspace):
        rows = [[subspace[j][m] for j in range(k)] for m in range(isocrystal.dimension)]
        solution = arith.solve_linear(field, rows, list(image))
        if solution is None:
            raise DomainMismatch('Subspace {0} is not stable under b'.format(subspace))
        columns.append(solution[0])
    matrix = arith.object_matrix([list(row) for row in zip(*columns)])
    return arith.determinant(matrix, Fraction(1), Fraction(0))


def _newton_degree(isocrystal, subspace):
    return arith.padic_valuation(_restricted_determinant(isocrystal, subspace), isocrystal.p)


def _induced_hodge_degree(filtered, subspace):
    sub, _ = filtrations.induce(filtered.hodge_flag, subspace)
    return sub.degree()


def sub_isocrystals(filtered):
    """
    Nonzero proper b-stable subspaces (echelon rows) and a Certificate.

    Eigenspaces of dimension >= 2 contribute their coordinate lines and their intersections with the Hodge
    filtration steps, which bound the degree of every line inside them.
    """
    isocrystal = filtered.isocrystal
    field = isocrystal.field
    r = isocrystal.dimension
    if r > MAX_SUBOBJECT_RANK:
        raise SearchBudgetExceeded('Sub-isocrystal search supports dimension at most {0}, got {1}'.format(
                MAX_SUBOBJECT_RANK, r), {'dimension': r})
    if isocrystal.s != 1:
        isocrystal = Isocrystal(isocrystal.p, isocrystal.b, 1)
    spaces = _eigenspaces(isocrystal)
    lines = []
    blocks = []
    for _, basis in spaces:
        space = filtrations.span(field, basis)
        blocks.append(space)
        if len(space) == 1:
            lines.append(space)
            continue
        candidates = [[v] for v in space]
        for step in filtered.hodge_flag.steps:
            common = filtrations.intersect(field, step, space)
            if common:
                candidates.append(common)
                candidates.extend([[v] for v in common])
        for candidate in candidates:
            lines.append(filtrations.span(field, candidate))
    found = set(lines) | set(blocks)
    for first, second in itertools.combinations(lines, 2):
        found.add(filtrations.subspace_sum(field, first, second))
    subspaces = sorted(s for s in found if 0 < len(s) < r)
    certificate = hncore.Certificate(r <= MAX_EXHAUSTIVE_RANK, dimension=r)
    return subspaces, certificate


class _IsocrystalCategory(hncore.SlopeCategory):

    def __init__(self, filtered):
        self.filtered = filtered
        self.field = filtered.isocrystal.field
        self._subobjects = None

    def rank(self, obj):
        return len(obj)

    def wa_degree(self, obj):
        return Fraction(_induced_hodge_degree(self.filtered, obj) - _newton_degree(self.filtered.isocrystal, obj))

    def all_subobjects(self):
        if self._subobjects is None:
            self._subobjects = sub_isocrystals(self.filtered)
        return self._subobjects

    def contains(self, big, small):
        return filtrations.contains(self.field, big, small)

    def key(self, obj):
        return tuple(tuple(str(x) for x in row) for row in obj)


class WeakAdmissibilityCategory(_IsocrystalCategory):
    """deg = t_H - t_N over sub-isocrystals with the induced filtration."""

    def degree(self, obj):
        return self.wa_degree(obj)

    def subobjects(self, obj):
        return self.all_subobjects()


class WaFarguesCategory(_IsocrystalCategory):
    """deg = -t_H over the weakly admissible sub-isocrystals."""

    def degree(self, obj):
        return Fraction(-_induced_hodge_degree(self.filtered, obj))

    def subobjects(self, obj):
        subspaces, certificate = self.all_subobjects()
        admissible = []
        for sub in subspaces:
            if self.wa_degree(sub) != 0:
                continue
            if all(self.wa_degree(inner) <= 0 for inner in subspaces
                   if len(inner) < len(sub) and self.contains(sub, inner)):
                admissible.append(sub)
        return admissible, certificate


def fi_is_weakly_admissible(filtered):
    """deg D = 0 and no sub-isocrystal of positive degree."""
    if fi_deg(filtered) != 0:
        return False
    category = WeakAdmissibilityCategory(filtered)
    return hncore.is_semistable(category, filtered.whole())


def fi_fargues(filtered):
    """The Harder-Narasimhan flag for deg = -t_H on a weakly admissible filtered isocrystal, and its type."""
    if not fi_is_weakly_admissible(filtered):
        raise NotWeaklyAdmissible('{0} is not weakly admissible'.format(filtered))
    category = WaFarguesCategory(filtered)
    whole = filtered.whole()
    return hncore.hn_flag(category, whole), hncore.hn_polygon(category, whole)
