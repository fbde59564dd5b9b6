
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
# Generic Harder-Narasimhan engine.
#
# A category supplies rank, degree and a finite list of strict subobjects (with a completeness certificate).
# The flag is built greedily: among the subobjects strictly containing the current step, take the one of maximal
# slope relative to that step, ties going to the larger rank and then to the category's key.
#################################################################################################################


from __future__ import print_function
from fractions import Fraction
import warnings

from .exceptions import BoundedSearchInconclusive, VerificationFailed, ZeroObject
from .typealgebra import PolygonFunction, TypeVector


class Certificate(object):
    """
    Provenance of a verdict: 'exhaustive' when every strict subobject was enumerated, otherwise 'bounded' with the
    search parameters that were in effect.
    """

    def __init__(self, exhaustive=True, **params):
        self.exhaustive = bool(exhaustive)
        self.params = params

    def merge(self, other):
        params = dict(self.params)
        params.update(other.params)
        return Certificate(self.exhaustive and other.exhaustive, **params)

    def as_dict(self):
        result = {'exhaustive': self.exhaustive}
        result.update(self.params)
        return result

    def __repr__(self):
        if not self.params:
            return 'exhaustive' if self.exhaustive else 'bounded'
        inner = ', '.join('{0}={1}'.format(k, self.params[k]) for k in sorted(self.params))
        return '{0}({1})'.format('exhaustive' if self.exhaustive else 'bounded', inner)


class SlopeCategory(object):
    """
    Interface of a category with rank and degree functions and a strict-subobject enumerator.

    Subclasses implement rank, degree, subobjects and contains; quotient is needed only by iter_extensions.
    """

    def rank(self, obj):
        raise NotImplementedError

    def degree(self, obj):
        raise NotImplementedError

    def subobjects(self, obj):
        """Returns (list of nonzero proper strict subobjects, Certificate)."""
        raise NotImplementedError

    def contains(self, big, small):
        raise NotImplementedError

    def quotient(self, obj, sub):
        raise NotImplementedError

    def key(self, obj):
        """Deterministic ordering used to break ties between candidates."""
        return repr(obj)

    def is_zero(self, obj):
        return self.rank(obj) == 0


class HnFlag(object):
    """
    0 = M_0 < M_1 < ... < M_s = M with graded pieces semistable of strictly decreasing slopes.

    'base' is the starting object when the flag is that of a quotient M / base.
    """

    def __init__(self, steps, slopes, ranks, certificate, base_rank=0):
        self.steps = list(steps)
        self.slopes = [Fraction(s) for s in slopes]
        self.ranks = list(ranks)
        self.certificate = certificate
        self.base_rank = base_rank

    def graded_ranks(self):
        previous = self.base_rank
        result = []
        for rank in self.ranks:
            result.append(rank - previous)
            previous = rank
        return result

    def rank_at(self, value):
        """Rank of F^{>=value} (relative to the base)."""
        value = Fraction(value)
        rank = self.base_rank
        for slope, step_rank in zip(self.slopes, self.ranks):
            if slope >= value:
                rank = step_rank
        return rank - self.base_rank

    def __len__(self):
        return len(self.steps)

    def __repr__(self):
        return 'HnFlag(slopes={0}, ranks={1}, {2})'.format(
                [str(s) for s in self.slopes], self.ranks, self.certificate)


def slope(category, obj):
    rank = category.rank(obj)
    if rank == 0:
        raise ZeroObject('The slope of a zero object is undefined')
    return Fraction(category.degree(obj)) / rank


def _select(category, candidates, base_rank, base_degree, certificate):
    # Maximal relative slope, then maximal rank, then smallest key.
    best = None
    tied = False
    for candidate in sorted(candidates, key=category.key):
        rank = category.rank(candidate) - base_rank
        value = (Fraction(category.degree(candidate)) - base_degree) / rank
        if best is None or (value, rank) > (best[0], best[1]):
            best = (value, rank, candidate)
            tied = False
        elif (value, rank) == (best[0], best[1]):
            tied = True
    if tied:
        message = 'Distinct candidates tie at slope {0} and rank {1}'.format(best[0], best[1] + base_rank)
        if not certificate.exhaustive:
            raise BoundedSearchInconclusive(message, certificate.as_dict())
        warnings.warn('{0}; keeping the first by key'.format(message), RuntimeWarning)
    return best


def _enumerate(category, obj):
    subobjects, certificate = category.subobjects(obj)
    return [s for s in subobjects if 0 < category.rank(s) < category.rank(obj)], certificate


def max_destabilizing(category, obj):
    """The maximal subobject of maximal slope (obj itself when semistable)."""
    if category.is_zero(obj):
        raise ZeroObject('A zero object has no destabilizing subobject')
    subobjects, certificate = _enumerate(category, obj)
    return _select(category, subobjects + [obj], 0, Fraction(0), certificate)[2]


def is_semistable(category, obj):
    """
    True if no enumerated strict subobject has slope above that of obj.

    A bounded enumeration makes a positive verdict provisional and emits a RuntimeWarning.
    """
    mu = slope(category, obj)
    subobjects, certificate = _enumerate(category, obj)
    verdict = all(slope(category, s) <= mu for s in subobjects)
    if verdict and not certificate.exhaustive:
        warnings.warn('Semistability rests on a bounded search {0}'.format(certificate), RuntimeWarning)
    return verdict


def hn_flag(category, obj, base=None):
    """
    The Harder-Narasimhan flag of obj, or of obj/base when 'base' is a subobject.
    """
    if category.is_zero(obj):
        raise ZeroObject('A zero object has no Harder-Narasimhan flag')
    subobjects, certificate = _enumerate(category, obj)
    total = category.rank(obj)
    current = base
    current_rank = 0 if base is None else category.rank(base)
    current_degree = Fraction(0) if base is None else Fraction(category.degree(base))
    base_rank = current_rank
    steps, slopes, ranks = [], [], []
    while current_rank < total:
        if current is None:
            candidates = list(subobjects)
        else:
            candidates = [s for s in subobjects
                          if category.rank(s) > current_rank and category.contains(s, current)]
        value, _, chosen = _select(category, candidates + [obj], current_rank, current_degree, certificate)
        if slopes and value >= slopes[-1]:
            message = 'Slopes {0} then {1} do not decrease'.format(slopes[-1], value)
            if not certificate.exhaustive:
                raise BoundedSearchInconclusive('{0}; the bounded search missed a subobject'.format(message),
                                                certificate.as_dict())
            raise VerificationFailed('{0}; the category is inconsistent'.format(message), certificate.as_dict())
        steps.append(chosen)
        slopes.append(value)
        current = chosen
        current_rank = category.rank(chosen)
        current_degree = Fraction(category.degree(chosen))
        ranks.append(current_rank)
    return HnFlag(steps, slopes, ranks, certificate, base_rank)


def hn_polygon(category, obj, base=None):
    """Each slope repeated by the rank of its graded piece."""
    flag = hn_flag(category, obj, base)
    entries = []
    for value, multiplicity in zip(flag.slopes, flag.graded_ranks()):
        entries.extend([value] * multiplicity)
    return TypeVector(entries)


def polygon_of_flag(flag):
    return PolygonFunction.from_segments(zip(flag.graded_ranks(), flag.slopes))


def hn_polygon_function(category, obj, base=None):
    return polygon_of_flag(hn_flag(category, obj, base))


def iter_extensions(category, obj):
    """Lazily yields (subobject, quotient) for every enumerated strict subobject."""
    subobjects, _ = _enumerate(category, obj)
    for sub in sorted(subobjects, key=category.key):
        yield sub, category.quotient(obj, sub)
