
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
# Free Kisin modules over Z_p[[u]] with Frobenius x -> E^{-twist}.A.phi(x) for an Eisenstein polynomial E.
#
# Frobenius matrices are exact rational polynomials with p-integral coefficients. Everything torsion is delegated
# to the reductions M/p^n M (torsion Kisin modules); their Fargues polygons are rescaled by 1/n and normalised by
# 1/e, and the limit polygon is approximated by the pointwise minimum over n = 1, 2, 4, ... up to a cap.
#
# The theta step (ambient rank at most 2) reads off the ranks of the minimal-slope quotients M^min of M/p^k M
# level by level, and builds from the last step of the Fargues flag an isogenous submodule with explicit basis.
# Larger modules take the step block by block when their Frobenius splits into diagonal blocks. The decomposition
# recurses into theta M and glues the quotient back on by a pushout, then re-checks its output.
#################################################################################################################


from __future__ import print_function
from fractions import Fraction
import math
import warnings

from . import arith
from . import hncore
from . import lattices
from . import phimod
from .exceptions import DomainMismatch, NotFullRank, PrecisionExhausted, SearchBudgetExceeded, \
    StepBudgetExceeded, VerificationFailed
from .typealgebra import PolygonFunction, TypeVector, polygon_le, polygon_le_on, polygon_min, polygon_of


# Largest n used when approximating the limit polygon.
DEFAULT_N_MAX = 4

# Number of p-adic levels inspected by the theta step.
DEFAULT_THETA_LEVELS = 6


class EisensteinPoly(object):
    """
    A monic polynomial E = u^e + ... over Z_p with every lower coefficient divisible by p and E(0) of valuation 1.
    """

    def __init__(self, p, poly):
        if isinstance(poly, str):
            poly = arith.parse_polynomial(poly)
        elif not isinstance(poly, arith.RationalPoly):
            poly = arith.RationalPoly(poly)
        e = poly.degree
        if e < 1 or poly.coefficient(e) != 1:
            raise DomainMismatch('Eisenstein polynomial {0} must be monic of degree at least 1'.format(poly))
        for k in range(e):
            c = poly.coefficient(k)
            if c != 0 and arith.padic_valuation(c, p) < 1:
                raise DomainMismatch('Coefficient of u^{0} in {1} is not divisible by {2}'.format(k, poly, p))
        if arith.padic_valuation(poly.coefficient(0), p) != 1:
            raise DomainMismatch('Constant term of {0} must have {1}-adic valuation 1'.format(poly, p))
        self.p = int(p)
        self.poly = poly
        self.degree = e

    def __eq__(self, other):
        return isinstance(other, EisensteinPoly) and (self.p, self.poly) == (other.p, other.poly)

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash((self.p, self.poly))

    def __repr__(self):
        return 'E = {0}'.format(self.poly)


class KisinModule(object):
    """
    The free Z_p[[u]]-module of rank r with Frobenius x -> E^{-twist}.A.phi(x).

    'exact' is False for modules whose entries were truncated modulo u^N (outputs of the theta step); such
    modules skip the determinant check and only support computations through their reductions.
    """

    def __init__(self, p, eisenstein, matrix, twist=0, u_precision=arith.DEFAULT_U_PRECISION, exact=True):
        if not isinstance(eisenstein, EisensteinPoly):
            eisenstein = EisensteinPoly(p, eisenstein)
        if eisenstein.p != p:
            raise DomainMismatch('Eisenstein polynomial is over p = {0}, module over p = {1}'.format(eisenstein.p, p))
        self.p = int(p)
        self.eisenstein = eisenstein
        self.e = eisenstein.degree
        self.matrix = arith.object_matrix(matrix, _coerce_poly)
        if self.matrix.shape[0] != self.matrix.shape[1]:
            raise ValueError('Frobenius matrix must be square, got shape {0}'.format(self.matrix.shape))
        for entry in self.matrix.flat:
            valuation = entry.p_valuation(self.p)
            if valuation is not None and valuation < 0:
                raise DomainMismatch('Entry {0} is not {1}-integral'.format(entry, self.p))
        self.twist = int(twist)
        self.u_precision = int(u_precision)
        self.exact = bool(exact)
        self.hodge_exponent = None
        if self.exact:
            self.hodge_exponent = _check_determinant(self)

    @property
    def rank(self):
        return self.matrix.shape[0]

    def entry(self, i, j):
        return self.matrix[i, j]

    def rows(self):
        return [list(self.matrix[i, :]) for i in range(self.rank)]

    def __repr__(self):
        rows = ['[{0}]'.format(', '.join(str(x) for x in self.matrix[i, :])) for i in range(self.rank)]
        return 'KisinModule(p={0}, {1}, A=[{2}], twist={3}{4})'.format(
                self.p, self.eisenstein, ', '.join(rows), self.twist, '' if self.exact else ', inexact')


def _coerce_poly(value):
    if isinstance(value, arith.RationalPoly):
        return value
    if isinstance(value, str):
        return arith.parse_polynomial(value)
    return arith.RationalPoly.constant(value)


def _check_determinant(module):
    # det A = unit.E^m with the unit invertible in Z_p[[u]].
    one, zero = arith.RationalPoly.constant(1), arith.RationalPoly()
    det = arith.determinant(module.matrix, one, zero)
    if det.is_zero():
        raise NotFullRank('Frobenius matrix of {0} is singular'.format(module))
    m = det.e_adic_valuation(module.eisenstein.poly)
    cofactor = det
    for _ in range(m):
        cofactor, _ = cofactor.divmod_monic(module.eisenstein.poly)
    constant = cofactor.coefficient(0)
    if constant == 0 or arith.padic_valuation(constant, module.p) != 0:
        raise DomainMismatch('det A = {0} is not a unit times a power of E'.format(det))
    return m


def _truncate(poly, size):
    truncated = poly.truncate(size)
    return truncated, truncated == poly


#
# Basic operations.
#

def k_rank(module):
    return module.rank


def k_twist(module, i):
    """M(i): the Frobenius multiplied by E^i."""
    return KisinModule(module.p, module.eisenstein, module.rows(), module.twist - i, module.u_precision,
                       module.exact)


def k_is_effective(module):
    """The actual Frobenius E^{-twist}.A has entries in Z_p[[u]]."""
    return _untwisted_rows(module) is not None


def _untwisted_rows(module):
    # Rows of E^{-twist}.A, or None when some entry is not divisible by E^twist.
    e_poly = module.eisenstein.poly
    if module.twist <= 0:
        factor = e_poly ** (-module.twist)
        return [[factor * x for x in row] for row in module.rows()]
    rows = []
    for row in module.rows():
        divided = []
        for x in row:
            for _ in range(module.twist):
                x, remainder = x.divmod_monic(e_poly)
                if not remainder.is_zero():
                    return None
            divided.append(x)
        rows.append(divided)
    return rows


def _effective(module):
    # (twisted effective module, shift added to every slope of the original)
    if module.twist <= 0:
        return module, 0
    rows = _untwisted_rows(module)
    if rows is not None:
        return KisinModule(module.p, module.eisenstein, rows, 0, module.u_precision, module.exact), 0
    return k_twist(module, module.twist), module.twist


def k_reduce(module, n):
    """M/p^n M as a torsion Kisin module; the module must be effective."""
    if n < 1:
        raise ValueError('Reduction level must be at least 1, got {0}'.format(n))
    rows = _untwisted_rows(module)
    if rows is None:
        raise DomainMismatch('Only effective modules reduce to torsion Kisin modules (A is not divisible by '
                             'E^{0})'.format(module.twist))
    return phimod.TorsionKisinModule(module.p, n, rows, 0, module.u_precision)


def k_hodge_type(module):
    """t_H(M) = Pos(M, phi(phi*M)) over the E-adic completion."""
    if not module.exact:
        raise DomainMismatch('The Hodge type needs exact Frobenius entries')
    context = arith.EAdicContext(module.eisenstein.poly)
    standard = lattices.DvrLattice.standard(context, module.rank)
    return lattices.pos(standard, lattices.DvrLattice(context, module.matrix, module.twist))


def k_crystal_hodge_type(module):
    """The Hodge type of the crystal M/uM: Pos over Z_p of A(0), shifted by the twist."""
    context = arith.PAdicContext(module.p)
    rows = [[arith.RationalPoly.constant(x.coefficient(0)) for x in row] for row in module.rows()]
    standard = lattices.DvrLattice.standard(context, module.rank)
    return lattices.pos(standard, lattices.DvrLattice(context, rows, module.twist))


def k_degree(module):
    """
    Normalised degree, equal to the degree of the Hodge type; inexact modules use their reduction modulo p.
    """
    if module.exact:
        return Fraction(-module.hodge_exponent + module.twist * module.rank)
    effective, shift = _effective(module)
    reduction = k_reduce(effective, 1).mod_p()
    return phimod.pt_degree(reduction, Fraction(1, module.e)) + shift * module.rank


def k_slope(module):
    return k_degree(module) / module.rank


def k_rescaled_hodge_mod_p(module):
    """t_H(M/pM)/e."""
    effective, shift = _effective(module)
    reduction = k_reduce(effective, 1).mod_p()
    hodge = phimod.pt_hodge_type(reduction).scale(Fraction(1, module.e))
    return hodge + TypeVector([shift] * module.rank)


#
# Fargues polygons.
#

def _shift(polygon, shift):
    if not shift:
        return polygon
    return PolygonFunction([(x, y + shift * x) for x, y in polygon.breakpoints])


def _torsion_flag(module, n, search_degree=None):
    effective, shift = _effective(module)
    torsion = k_reduce(effective, n)
    flag, _ = phimod.tk_fargues(torsion, search_degree)
    return flag, shift


def k_fargues_n(module, n, search_degree=None):
    """
    t_{F,n}(M): the polygon of M/p^n M, normalised by 1/e and rescaled by 1/n (width rank M).
    """
    flag, shift = _torsion_flag(module, n, search_degree)
    polygon = hncore.polygon_of_flag(flag).scale_values(Fraction(1, module.e)).rescale(n)
    return _shift(polygon, shift)


def _levels(n_max):
    if n_max < 1:
        raise ValueError('n_max must be at least 1, got {0}'.format(n_max))
    levels = []
    n = 1
    while n <= n_max:
        levels.append(n)
        n *= 2
    return levels


def k_fargues_limit(module, n_max=DEFAULT_N_MAX, search_degree=None):
    """
    The pointwise minimum of t_{F,n} over n = 1, 2, 4, ... <= n_max, an upper approximation of t_F(M).
    """
    result = None
    for n in _levels(n_max):
        polygon = k_fargues_n(module, n, search_degree)
        result = polygon if result is None else polygon_min(result, polygon)
    return result


def k_fargues_sequence(module, n_max=DEFAULT_N_MAX, search_degree=None):
    """[(n, t_{F,n}(M))] for n = 1, 2, 4, ... <= n_max."""
    return [(n, k_fargues_n(module, n, search_degree)) for n in _levels(n_max)]


def k_is_semistable(module, search_degree=None):
    """M is semistable iff M/pM is."""
    flag, _ = _torsion_flag(module, 1, search_degree)
    return len(flag.steps) == 1


def k_is_hn_type(module, n_max=DEFAULT_N_MAX, search_degree=None):
    """True when t_{F,n}(M) = t_{F,1}(M) for every n = 2, 4, ... <= n_max."""
    first = k_fargues_n(module, 1, search_degree)
    for n in _levels(n_max)[1:]:
        if k_fargues_n(module, n, search_degree) != first:
            return False
    return True


def k_mu_min(module, search_degree=None):
    """mu_min(M) = mu_min(M/pM)/e."""
    flag, shift = _torsion_flag(module, 1, search_degree)
    return flag.slopes[-1] / module.e + shift


def hodge_chain_holds(module, n_max=DEFAULT_N_MAX, search_degree=None):
    """t_F(M) <= t_{F,1}(M) <= t_H(M/pM)/e <= t_H(M) as polygons."""
    limit = k_fargues_limit(module, n_max, search_degree)
    first = k_fargues_n(module, 1, search_degree)
    mod_p = polygon_of(k_rescaled_hodge_mod_p(module))
    hodge = polygon_of(k_hodge_type(module))
    return polygon_le(limit, first) and polygon_le(first, mod_p) and polygon_le(mod_p, hodge)


#
# Isogenies.
#

def _matrix_rows(g):
    return [[_coerce_poly(x) for x in row] for row in g]


def verify_isogeny(target, source, g, size=None):
    """
    True when the columns of g (source basis in target coordinates) intertwine the Frobenii:
    A_target . phi(g) = g . A_source modulo u^size.
    """
    if target.twist != source.twist or target.eisenstein != source.eisenstein:
        raise DomainMismatch('Isogenies are only checked between modules with the same E and twist')
    size = min(target.u_precision, source.u_precision) if size is None else size
    g = arith.object_matrix(_matrix_rows(g))
    zero = arith.RationalPoly()
    frobenius_g = arith.object_matrix([[x.frobenius(target.p) for x in row] for row in _rows(g)])
    left = arith.matrix_product(target.matrix, frobenius_g, zero)
    right = arith.matrix_product(g, source.matrix, zero)
    return all(left[i, j].truncate(size) == right[i, j].truncate(size)
               for i in range(left.shape[0]) for j in range(left.shape[1]))


def _rows(matrix):
    return [list(matrix[i, :]) for i in range(matrix.shape[0])]


def _cokernel(target, g):
    """
    (Q, q, shift) for Q = target/g.source as a p-torsion module of rank q, or (None, 0, shift) when g is invertible.
    """
    effective, shift = _effective(target)
    rows = _matrix_rows(g)
    for row in rows:
        for x in row:
            valuation = x.p_valuation(target.p)
            if valuation is not None and valuation < 0:
                raise DomainMismatch('Isogeny matrix entry {0} is not {1}-integral'.format(x, target.p))
    one, zero = arith.RationalPoly.constant(1), arith.RationalPoly()
    g = arith.object_matrix(rows)
    det = arith.determinant(g, one, zero)
    if det.is_zero():
        raise NotFullRank('The isogeny matrix is singular')
    v = det.p_valuation(target.p)
    if det.coefficient(0) == 0 or arith.padic_valuation(det.coefficient(0), target.p) != v:
        raise DomainMismatch('det g = {0} is not a power of {1} times a unit'.format(det, target.p))
    if v == 0:
        return None, 0, shift
    adjugate = arith.adjugate(g, one, zero)
    if any(not x.is_zero() and x.p_valuation(target.p) < v - 1 for x in adjugate.flat):
        raise DomainMismatch('The cokernel of {0} is not killed by {1}'.format(_rows(g), target.p))
    reduction = k_reduce(effective, 1).mod_p()
    image = arith.object_matrix([[reduction.context.coerce(x) for x in row] for row in rows])
    if all(x.is_zero() for x in image.flat):
        return reduction, reduction.rank, shift
    sub = phimod.pt_saturated_submodule(reduction, image)
    return phimod.pt_quotient(reduction, sub), reduction.rank - sub.rank, shift


def isogeny_constant(source, target, g, search_degree=None):
    """
    C(f) = max over the break points (d, y) of t_{F,1}(Q) of y - mu_min(source).d, where Q = target/g.source is the
    cokernel of the isogeny f given by g (source basis in target coordinates).

    The cokernel must be killed by p and free over F_p[[u]].
    """
    quotient, _, shift = _cokernel(target, g)
    if quotient is None:
        return Fraction(0)
    mu = k_mu_min(source, search_degree)
    flag, _ = phimod.pt_fargues(quotient, search_degree)
    polygon = _shift(hncore.polygon_of_flag(flag).scale_values(Fraction(1, target.e)), shift)
    return max(Fraction(0), max(y - mu * x for x, y in polygon.breakpoints))


def isogeny_envelope_holds(source, target, g, n, constant=None, search_degree=None):
    """t_{F,n}(source)(x) <= t_{F,n}(target)(x) + C/n for x in [0, rank - q/n]."""
    _, q, _ = _cokernel(target, g)
    if constant is None:
        constant = isogeny_constant(source, target, g, search_degree)
    upper = source.rank - Fraction(q, n)
    return polygon_le_on(k_fargues_n(source, n, search_degree), k_fargues_n(target, n, search_degree), upper,
                         Fraction(constant) / n)


#
# Theta step and decomposition up to isogeny.
#

class ThetaStep(object):
    """
    theta M -> M' -> M with M'/theta M either zero or semistable of slope mu_min(M).

    'witness' has the basis of M' in the coordinates of M as its columns; 'stable_rank' is the eventual growth a of
    the minimal-slope quotients per level, 'ranks' the ranks of M^min at each inspected level.
    """

    def __init__(self, theta, mprime, quotient, k0, stable_rank, witness, ranks):
        self.theta = theta
        self.mprime = mprime
        self.quotient = quotient
        self.k0 = k0
        self.stable_rank = stable_rank
        self.witness = witness
        self.ranks = ranks

    def __repr__(self):
        return 'ThetaStep(k0={0}, a={1}, ranks={2})'.format(self.k0, self.stable_rank, self.ranks)


def _identity(size):
    one, zero = arith.RationalPoly.constant(1), arith.RationalPoly()
    return arith.identity_matrix(size, one, zero)


def _derived_module(module, line, c, t):
    """
    The Frobenius of L~ + p^c M in the basis (x~, p^c e_j') and the witness p^t.[x~ | p^c e_j'].
    """
    p, size = module.p, module.u_precision
    j = line.j
    other = 1 - j
    beta = arith.RationalPoly(line.vector[other])
    a00, a01 = module.entry(j, j), module.entry(j, other)
    a10, a11 = module.entry(other, j), module.entry(other, other)
    frobenius_beta = beta.frobenius(p)
    lam = a00 + a01 * frobenius_beta
    w = a10 + a11 * frobenius_beta - beta * lam
    scale = Fraction(p) ** c
    entries = [[lam, a01 * scale], [w * (1 / scale), a11 - beta * a01]]
    exact = module.exact
    rows = []
    for row in entries:
        truncated_row = []
        for x in row:
            truncated, lossless = _truncate(x, size)
            exact = exact and lossless
            truncated_row.append(truncated)
        rows.append(truncated_row)
    lower = rows[1][0]
    if not lower.is_zero() and lower.p_valuation(p) < 0:
        raise VerificationFailed('Line {0} is not phi-stable modulo p^{1}'.format(line, c), {'level': c})

    witness = [[arith.RationalPoly()] * 2 for _ in range(2)]
    witness[j][0] = arith.RationalPoly.constant(Fraction(p) ** t)
    witness[other][0] = beta * (Fraction(p) ** t)
    witness[other][1] = arith.RationalPoly.constant(Fraction(p) ** (t + c))
    return rows, exact, witness


def _rebuild(module, rows, exact):
    return KisinModule(module.p, module.eisenstein, rows, module.twist, module.u_precision, exact)


def _block_module(module, indices):
    rows = [[module.entry(i, j) for j in indices] for i in indices]
    return _rebuild(module, rows, module.exact)


def _checked(module, result):
    if not verify_isogeny(module, result.mprime, result.witness):
        raise VerificationFailed('Theta witness does not intertwine the Frobenii modulo u^{0}'.format(
                module.u_precision), {'k0': result.k0})
    if not result.mprime.exact:
        warnings.warn('Theta step truncated Frobenius entries modulo u^{0}'.format(module.u_precision),
                      RuntimeWarning)
    return result


def k_theta_step(module, levels=DEFAULT_THETA_LEVELS, search_degree=None):
    """
    One theta step. The growth a_k = rank M^min_{k+1} - rank M^min_k is read off levels 1, 2, ... until
    a_k0 = a_{k0+1} = a_{k0+2}; then

      a = rank M: theta M = 0 and M' = M,
      a = 0:      theta M = M' = p^t(L~ + p^c M) from the last Fargues step N(b, c, L) at level k0 (t = k0 - b - c),
      a = 1:      M' = L~ + p^c M from the confirmation level and theta M the line L~ inside it.

    Modules of rank above 2 must split into diagonal blocks; the step is then taken block by block.
    """
    if levels < 4:
        raise ValueError('Theta steps need at least 4 levels, got {0}'.format(levels))
    r = module.rank
    if r > phimod.MAX_SEARCH_RANK_TORSION:
        blocks = arith.diagonal_blocks(module.matrix)
        if len(blocks) == 1:
            raise SearchBudgetExceeded('Theta steps support rank at most {0} unless the module splits, got {1}'.format(
                    phimod.MAX_SEARCH_RANK_TORSION, r), {'rank': r})
        return _split_theta_step(module, blocks, levels, search_degree)
    profile = {}

    def level(k):
        if k not in profile:
            flag, _ = _torsion_flag(module, k, search_degree)
            if len(flag.steps) > 1:
                profile[k] = (r * k - flag.ranks[-2], flag.steps[-2])
            else:
                profile[k] = (r * k, None)
        return profile[k]

    def growth(k):
        return level(k + 1)[0] - level(k)[0]

    k0 = None
    for k in range(1, levels - 2):
        if growth(k) == growth(k + 1) == growth(k + 2):
            k0 = k
            break
    ranks = [profile[k][0] for k in sorted(profile)]
    if k0 is None:
        raise PrecisionExhausted('Minimal quotient ranks {0} did not stabilise within {1} levels'.format(
                ranks, levels), {'levels': levels, 'ranks': ranks})
    stable_rank = growth(k0)

    if stable_rank == r:
        return ThetaStep(None, module, module, k0, stable_rank, _rows(_identity(r)), ranks)

    if stable_rank == 0:
        k = k0
        _, step = level(k)
        if step is None or step.c == 0:
            raise VerificationFailed('Level {0} has no line step to build theta M from'.format(k), {'level': k})
        rows, exact, witness = _derived_module(module, step.line, step.c, k - step.b - step.c)
        theta = _rebuild(module, rows, exact)
        result = ThetaStep(theta, theta, None, k0, stable_rank, witness, ranks)
    else:
        k = k0 + 2
        _, step = level(k)
        if step is None or step.c == 0 or step.b + step.c != k:
            raise VerificationFailed('Level {0} does not end with a free rank-one quotient'.format(k), {'level': k})
        # An exactly stable lift already splits off from M itself.
        rows, exact, witness = _derived_module(module, step.line, 0, 0)
        if not rows[1][0].is_zero():
            rows, exact, witness = _derived_module(module, step.line, step.c, 0)
        line_exact = exact and rows[1][0].is_zero()
        mprime = _rebuild(module, rows, exact)
        theta = _rebuild(module, [[rows[0][0]]], line_exact)
        quotient = _rebuild(module, [[rows[1][1]]], line_exact)
        result = ThetaStep(theta, mprime, quotient, k0, stable_rank, witness, ranks)
    return _checked(module, result)


def _split_theta_step(module, blocks, levels, search_degree):
    # Blocks above mu_min(M) stay inside theta M; the others take their own theta step.
    parts = [_block_module(module, indices) for indices in blocks]
    slopes = [k_mu_min(part, search_degree) for part in parts]
    mu_min = min(slopes)
    pieces = []
    profiles = []
    k0 = 1
    for indices, part, part_slope in zip(blocks, parts, slopes):
        if part_slope > mu_min:
            pieces.append((indices, part, _rows(_identity(part.rank)), part.rank))
            continue
        step = k_theta_step(part, levels, search_degree)
        k0 = max(k0, step.k0)
        profiles.append(step.ranks)
        pieces.append((indices, step.mprime, step.witness, part.rank - step.stable_rank))

    r = module.rank
    # M' coordinates: the theta part of every block, then the quotient parts.
    order = [(b, l) for b, piece in enumerate(pieces) for l in range(piece[3])]
    order += [(b, l) for b, piece in enumerate(pieces) for l in range(piece[3], piece[1].rank)]
    theta_rank = sum(piece[3] for piece in pieces)
    stable_rank = r - theta_rank
    ranks = [sum(column) for column in zip(*profiles)]
    if stable_rank == r:
        return ThetaStep(None, module, module, k0, stable_rank, _rows(_identity(r)), ranks)

    zero = arith.RationalPoly()
    rows = [[pieces[b][1].entry(l, l2) if b == b2 else zero for b2, l2 in order] for b, l in order]
    witness = [[zero] * r for _ in range(r)]
    for column, (b, l) in enumerate(order):
        indices, _, local, _ = pieces[b]
        for i, g in enumerate(indices):
            witness[g][column] = local[i][l]
    exact = all(piece[1].exact for piece in pieces)
    mprime = _rebuild(module, rows, exact)
    if stable_rank == 0:
        return _checked(module, ThetaStep(mprime, mprime, None, k0, 0, witness, ranks))
    split_exact = exact and all(rows[i][j].is_zero() for i in range(theta_rank, r) for j in range(theta_rank))
    theta = _rebuild(module, [row[:theta_rank] for row in rows[:theta_rank]], split_exact)
    quotient = _rebuild(module, [row[theta_rank:] for row in rows[theta_rank:]], split_exact)
    return _checked(module, ThetaStep(theta, mprime, quotient, k0, stable_rank, witness, ranks))


class HnDecomposition(object):
    """
    An isogeny N -> M with N of Harder-Narasimhan type: 'witness' has the basis of N in the coordinates of M as its
    columns and 'flag' is the flag of N (steps are Kisin modules spanned by the leading basis vectors of N, the last
    one N itself).
    """

    def __init__(self, module, flag, witness, theta_steps, step_budget):
        self.module = module
        self.flag = flag
        self.witness = witness
        self.theta_steps = theta_steps
        self.step_budget = step_budget

    def __repr__(self):
        return 'HnDecomposition({0}, theta_steps={1})'.format(self.flag, self.theta_steps)


def _extend(mprime, theta_rank, sub, sub_witness):
    """
    The pushout of sub -> theta M' along theta M' -> M', where theta M' spans the leading theta_rank coordinates of
    M': basis g = diag(W, p^s) with W the basis of sub in theta M' and p^s clearing the denominators of the
    off-diagonal block. Returns (N', g).
    """
    p, r = mprime.p, mprime.rank
    one, zero = arith.RationalPoly.constant(1), arith.RationalPoly()
    det = arith.determinant(sub_witness, one, zero)
    if not det.is_constant() or det.is_zero():
        raise VerificationFailed('Theta witness determinant {0} is not a nonzero constant'.format(det))
    factor = 1 / det.coefficient(0)
    inverse = arith.object_matrix([[x * factor for x in row] for row in _rows(arith.adjugate(sub_witness, one, zero))])
    corner = arith.object_matrix([row[theta_rank:] for row in mprime.rows()[:theta_rank]])
    moved = arith.matrix_product(inverse, corner, zero)
    valuations = [x.p_valuation(p) for x in moved.flat if not x.is_zero()]
    s = max([0] + [-v for v in valuations])

    g = arith.identity_matrix(r, one, zero)
    g_inverse = arith.identity_matrix(r, one, zero)
    for i in range(r):
        for j in range(r):
            if i < theta_rank and j < theta_rank:
                g[i, j] = sub_witness[i, j]
                g_inverse[i, j] = inverse[i, j]
            elif i == j:
                g[i, j] = arith.RationalPoly.constant(Fraction(p) ** s)
                g_inverse[i, j] = arith.RationalPoly.constant(Fraction(1, p ** s))
    frobenius_g = arith.object_matrix([[x.frobenius(p) for x in row] for row in _rows(g)])
    product = arith.matrix_product(arith.matrix_product(g_inverse, mprime.matrix, zero), frobenius_g, zero)
    exact = sub.exact and mprime.exact
    rows = []
    for row in _rows(product):
        truncated_row = []
        for x in row:
            truncated, lossless = _truncate(x, mprime.u_precision)
            exact = exact and lossless
            if not truncated.is_zero() and truncated.p_valuation(p) < 0:
                raise VerificationFailed('Pushout Frobenius entry {0} is not {1}-integral'.format(truncated, p))
            truncated_row.append(truncated)
        rows.append(truncated_row)
    return _rebuild(mprime, rows, exact), g


def _decompose(module, levels, search_degree, budget, count):
    """
    (N, steps, slopes, ranks, witness, count): theta steps with a = 0 replace the module, a = rank stops, and
    0 < a < rank recurses into theta M and extends its flag by the quotient M'/theta M.
    """
    zero = arith.RationalPoly()
    current = module
    witness = _identity(module.rank)
    while True:
        if count >= budget:
            raise StepBudgetExceeded('No Harder-Narasimhan type reached within {0} theta steps'.format(budget),
                                     {'bound': budget})
        count += 1
        step = k_theta_step(current, levels, search_degree)
        if step.stable_rank == current.rank:
            return current, [current], [k_slope(current)], [current.rank], witness, count
        witness = arith.matrix_product(witness, arith.object_matrix(step.witness), zero)
        if step.stable_rank == 0:
            current = step.theta
            continue
        theta_rank = current.rank - step.stable_rank
        if theta_rank == 1:
            inner = (step.theta, [step.theta], [k_slope(step.theta)], [1], _identity(1), count)
        else:
            inner = _decompose(step.theta, levels, search_degree, budget, count)
        sub, steps, slopes, ranks, sub_witness, count = inner
        target, lift = _extend(step.mprime, theta_rank, sub, sub_witness)
        witness = arith.matrix_product(witness, lift, zero)
        return (target, steps + [target], slopes + [k_slope(step.quotient)], ranks + [current.rank], witness,
                count)


def _certify(module, target, witness, levels, search_degree):
    certificate = hncore.Certificate(target.exact, theta_levels=levels, n_max=DEFAULT_N_MAX)
    if not verify_isogeny(module, target, witness):
        raise VerificationFailed('Decomposition witness does not intertwine the Frobenii', certificate.as_dict())
    if not k_is_hn_type(target, DEFAULT_N_MAX, search_degree):
        raise VerificationFailed('Decomposition output is not of Harder-Narasimhan type up to n = {0}'.format(
                DEFAULT_N_MAX), certificate.as_dict())
    try:
        constant = isogeny_constant(target, module, witness, search_degree)
    except DomainMismatch:
        # Cokernel not killed by p: no constant to compare with.
        return certificate.merge(hncore.Certificate(True, envelope='unchecked'))
    for n in _levels(DEFAULT_N_MAX):
        if not isogeny_envelope_holds(target, module, witness, n, constant, search_degree):
            raise VerificationFailed('t_F,{0} of the output leaves the envelope of constant {1}'.format(n, constant),
                                     certificate.as_dict())
    return certificate.merge(hncore.Certificate(True, envelope_constant=str(constant)))


def k_hn_decompose(module, levels=DEFAULT_THETA_LEVELS, search_degree=None):
    """
    Iterates theta steps until the result is of Harder-Narasimhan type, then checks that it is: its polygons agree
    up to n = DEFAULT_N_MAX and stay within C/n of those of M.

    Each step with a = 0 raises mu_min by at least 1/(e.r!), so at most (mu - mu_min).e.r! + 1 steps are taken.
    """
    mu = k_slope(module)
    mu_min = k_mu_min(module, search_degree)
    budget = int(math.floor((mu - mu_min) * module.e * math.factorial(module.rank))) + 1
    try:
        target, steps, slopes, ranks, witness, count = _decompose(module, levels, search_degree, budget, 0)
    except StepBudgetExceeded as exc:
        exc.certificate.update({'mu': str(mu), 'mu_min': str(mu_min)})
        raise
    if any(later >= earlier for earlier, later in zip(slopes, slopes[1:])):
        raise VerificationFailed('Decomposition slopes {0} do not decrease'.format([str(s) for s in slopes]),
                                 {'theta_steps': count})
    witness = _rows(witness)
    certificate = _certify(module, target, witness, levels, search_degree)
    flag = hncore.HnFlag(steps, slopes, ranks, certificate)
    return HnDecomposition(target, flag, witness, count, budget)
