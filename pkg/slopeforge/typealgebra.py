
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
# Types (weakly decreasing rational sequences) and the concave polygons they describe.
#
# Every Hodge, Newton and Harder-Narasimhan polygon in slopeforge is a TypeVector or, when break points have
# non-integral abscissas, a PolygonFunction. All arithmetic is exact (fractions.Fraction); norms are exposed
# squared so no floating point is ever needed.
#################################################################################################################


from __future__ import print_function
from fractions import Fraction
import itertools
import re

from .exceptions import DomainMismatch, LengthMismatch, ParseError


class TypeVector(object):
    """
    A finite weakly-decreasing sequence of rationals. Constructors sort, so equal types compare equal.
    """

    def __init__(self, entries=()):
        self._entries = tuple(sorted((Fraction(e) for e in entries), reverse=True))

    @property
    def entries(self):
        return self._entries

    def __len__(self):
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def __getitem__(self, index):
        return self._entries[index]

    def __eq__(self, other):
        if isinstance(other, TypeVector):
            return self._entries == other._entries
        if isinstance(other, (tuple, list)):
            return self == TypeVector(other)
        return NotImplemented

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    def __hash__(self):
        return hash(self._entries)

    def __repr__(self):
        return '({0})'.format(', '.join(str(e) for e in self._entries))

    def _check_length(self, other):
        if len(self) != len(other):
            raise LengthMismatch('Types of lengths {0} and {1}'.format(len(self), len(other)))

    def degree(self):
        return sum(self._entries, Fraction(0))

    def prefix_sums(self):
        return list(itertools.accumulate(self._entries))

    def dominance_le(self, other):
        """True if self <= other in the dominance order (prefix sums below, equal degrees)."""
        self._check_length(other)
        if self.degree() != other.degree():
            return False
        return all(a <= b for a, b in zip(self.prefix_sums(), other.prefix_sums()))

    def __add__(self, other):
        self._check_length(other)
        return TypeVector(a + b for a, b in zip(self._entries, other._entries))

    def scale(self, factor):
        factor = Fraction(factor)
        if factor <= 0:
            raise ValueError('Types can only be scaled by positive rationals, got {0}'.format(factor))
        return TypeVector(factor * e for e in self._entries)

    def involution(self):
        """(g_1, ..., g_r) -> (-g_r, ..., -g_1)"""
        return TypeVector(-e for e in self._entries)

    def norm_sq(self):
        return sum((e * e for e in self._entries), Fraction(0))

    def concat(self, other):
        return TypeVector(self._entries + other._entries)

    def tensor(self, other):
        return TypeVector(a + b for a in self._entries for b in other._entries)

    def ext_power(self, k):
        """Sums over strictly increasing index k-tuples; empty when k exceeds the length."""
        if k < 1:
            raise ValueError('Exterior power index must be at least 1, got {0}'.format(k))
        return TypeVector(sum(c) for c in itertools.combinations(self._entries, k))

    def sym_power(self, k):
        """Sums over weakly increasing index k-tuples."""
        if k < 1:
            raise ValueError('Symmetric power index must be at least 1, got {0}'.format(k))
        return TypeVector(sum(c) for c in itertools.combinations_with_replacement(self._entries, k))

    def polygon(self):
        return polygon_of(self)


def dominance_le(t1, t2):
    return t1.dominance_le(t2)


def sharp_average(orbit):
    """
    Average of a finite orbit of weight lists, re-sorted.

    TypeVector members contribute their sorted entries; plain sequences are averaged position by position
    (weight lists indexed by a Galois set) before sorting.
    """
    orbit = [member.entries if isinstance(member, TypeVector) else tuple(Fraction(x) for x in member)
             for member in orbit]
    if not orbit:
        raise ValueError('Cannot average an empty orbit')
    length = len(orbit[0])
    for member in orbit:
        if len(member) != length:
            raise LengthMismatch('Orbit members of lengths {0} and {1}'.format(length, len(member)))
    size = len(orbit)
    return TypeVector(sum(column, Fraction(0)) / size for column in zip(*orbit))


def sqrt_triangle_holds(a, b, c):
    """
    sqrt(a) <= sqrt(b) + sqrt(c) for non-negative rationals, decided exactly.
    """
    a, b, c = Fraction(a), Fraction(b), Fraction(c)
    gap = a - b - c
    return gap <= 0 or gap * gap <= 4 * b * c


def distance_triangle_holds(t13, t12, t23):
    """|t13| <= |t12| + |t23| for the Euclidean norms of three types."""
    return sqrt_triangle_holds(t13.norm_sq(), t12.norm_sq(), t23.norm_sq())


_TYPE_PATTERN = re.compile(r'^\s*\((.*)\)\s*$')


def parse_type(text):
    """
    Parse the text form '(2, 1/2, -1)' of a type.
    """
    match = _TYPE_PATTERN.match(text)
    if not match:
        raise ParseError('a type must be written as (a, b, ...)', 1)
    body = match.group(1)
    if not body.strip():
        return TypeVector()
    entries = []
    column = text.index('(') + 2
    for piece in body.split(','):
        try:
            entries.append(Fraction(piece.strip()))
        except (ValueError, ZeroDivisionError):
            raise ParseError("'{0}' is not a rational".format(piece.strip()), column)
        column += len(piece) + 1
    return TypeVector(entries)


class PolygonFunction(object):
    """
    A concave piecewise-linear function on [0, r] starting at (0, 0), stored by its break points.

    Collinear interior points are dropped so equal functions compare equal.
    """

    def __init__(self, breakpoints):
        points = [(Fraction(x), Fraction(y)) for x, y in breakpoints]
        if not points or points[0] != (0, 0):
            points.insert(0, (Fraction(0), Fraction(0)))
        for (x0, _), (x1, _) in zip(points, points[1:]):
            if x1 <= x0:
                raise ValueError('Polygon abscissas must be strictly increasing')
        reduced = [points[0]]
        for point in points[1:]:
            while len(reduced) >= 2 and _slope(reduced[-2], reduced[-1]) == _slope(reduced[-1], point):
                reduced.pop()
            reduced.append(point)
        slopes = [_slope(a, b) for a, b in zip(reduced, reduced[1:])]
        for s0, s1 in zip(slopes, slopes[1:]):
            if s1 > s0:
                raise ValueError('Polygon is not concave: slope {0} follows {1}'.format(s1, s0))
        self._points = tuple(reduced)

    @classmethod
    def from_segments(cls, segments):
        """Polygon from (length, slope) pairs taken in order."""
        points = [(Fraction(0), Fraction(0))]
        for length, slope in segments:
            length = Fraction(length)
            if length == 0:
                continue
            x, y = points[-1]
            points.append((x + length, y + length * Fraction(slope)))
        return cls(points)

    @property
    def breakpoints(self):
        return self._points

    @property
    def endpoint(self):
        return self._points[-1]

    @property
    def width(self):
        return self._points[-1][0]

    def slopes(self):
        """(length, slope) for each segment."""
        return [(b[0] - a[0], _slope(a, b)) for a, b in zip(self._points, self._points[1:])]

    def evaluate(self, x):
        x = Fraction(x)
        if x < 0 or x > self.width:
            raise DomainMismatch('{0} lies outside [0, {1}]'.format(x, self.width))
        for a, b in zip(self._points, self._points[1:]):
            if x <= b[0]:
                return a[1] + (x - a[0]) * _slope(a, b)
        return self._points[-1][1]

    def rescale(self, n):
        """x -> (1/n) f(n x), so break points (X, Y) become (X/n, Y/n)."""
        if n < 1:
            raise ValueError('Rescaling factor must be at least 1, got {0}'.format(n))
        return PolygonFunction([(x / n, y / n) for x, y in self._points])

    def scale_values(self, factor):
        """(X, Y) -> (X, factor.Y), for degree normalisations."""
        factor = Fraction(factor)
        if factor <= 0:
            raise ValueError('Degree normalisation must be positive, got {0}'.format(factor))
        return PolygonFunction([(x, factor * y) for x, y in self._points])

    def __eq__(self, other):
        if not isinstance(other, PolygonFunction):
            return NotImplemented
        return self._points == other._points

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    def __hash__(self):
        return hash(self._points)

    def __repr__(self):
        return 'PolygonFunction([{0}])'.format(', '.join('({0}, {1})'.format(x, y) for x, y in self._points))


def _slope(a, b):
    return (b[1] - a[1]) / (b[0] - a[0])


def polygon_of(t):
    """The polygon of a type: slopes t_1 >= t_2 >= ... on unit intervals."""
    return PolygonFunction.from_segments((1, e) for e in t.entries)


def _check_same_domain(f, g):
    if f.endpoint != g.endpoint:
        raise DomainMismatch('Polygons end at {0} and {1}'.format(f.endpoint, g.endpoint))


def polygon_le(f, g):
    """
    f <= g pointwise, compared at the union of break points (enough for piecewise-linear functions).
    """
    _check_same_domain(f, g)
    abscissas = sorted(set(x for x, _ in f.breakpoints) | set(x for x, _ in g.breakpoints))
    return all(f.evaluate(x) <= g.evaluate(x) for x in abscissas)


def polygon_le_on(f, g, upper, offset=0):
    """f(x) <= g(x) + offset for x in [0, upper] (no endpoint condition)."""
    upper = Fraction(upper)
    abscissas = set(x for x, _ in f.breakpoints if x <= upper) | set(x for x, _ in g.breakpoints if x <= upper)
    abscissas.add(upper)
    return all(f.evaluate(x) <= g.evaluate(x) + offset for x in abscissas)


def polygon_min(f, g):
    """
    Pointwise minimum of two polygons on the same domain, with crossing points inserted.
    """
    _check_same_domain(f, g)
    abscissas = sorted(set(x for x, _ in f.breakpoints) | set(x for x, _ in g.breakpoints))
    points = []
    for x0, x1 in zip(abscissas, abscissas[1:]):
        d0 = f.evaluate(x0) - g.evaluate(x0)
        d1 = f.evaluate(x1) - g.evaluate(x1)
        points.append((x0, min(f.evaluate(x0), g.evaluate(x0))))
        if d0 * d1 < 0:
            crossing = x0 + (x1 - x0) * d0 / (d0 - d1)
            points.append((crossing, f.evaluate(crossing)))
    last = abscissas[-1]
    points.append((last, min(f.evaluate(last), g.evaluate(last))))
    return PolygonFunction(points)


def upper_concave_hull(points):
    """
    The smallest concave polygon above a set of (x, y) points that include (0, 0) and share the rightmost point.
    """
    points = sorted(set((Fraction(x), Fraction(y)) for x, y in points))
    hull = []
    for point in points:
        # Keep only the highest point at each abscissa.
        if hull and hull[-1][0] == point[0]:
            hull.pop()
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], point) >= 0:
            hull.pop()
        hull.append(point)
    return PolygonFunction(hull)


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
