
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
# Exact arithmetic substrate.
#
# Truncated power series over F_p and Z/p^n, exact rational polynomials, p-adic valuations, the polynomial
# literal grammar, residue fields with row-echelon linear algebra, and Smith normal forms over the three
# discrete valuation rings used throughout (u-adic, p-adic and E-adic) and over Z/p^n.
#
# Matrices are numpy arrays of dtype object. Ring elements never define __len__/__iter__/__getitem__ and
# return NotImplemented when multiplied by an array, so numpy broadcasts scalar-times-row operations.
#################################################################################################################


from __future__ import print_function
from fractions import Fraction
import numpy as np
import sympy

from .exceptions import DomainMismatch, NotFullRank, ParseError, PrecisionExhausted, RingMismatch


# Default u-adic truncation N_u for the series rings.
DEFAULT_U_PRECISION = 8


def padic_valuation(value, p):
    """
    Returns the p-adic valuation of an integer or rational, or None for zero.
    """
    value = Fraction(value)
    if value == 0:
        return None
    return (sympy.multiplicity(p, abs(value.numerator)) -
            sympy.multiplicity(p, value.denominator))


def residue_mod(value, modulus):
    """
    Returns the canonical residue in [0, modulus) of a rational whose denominator is prime to the modulus.
    """
    value = Fraction(value)
    try:
        inverse = sympy.mod_inverse(value.denominator, modulus)
    except ValueError:
        raise DomainMismatch('{0} is not integral modulo {1}'.format(value, modulus))
    return (value.numerator * int(inverse)) % modulus


def _format_terms(coefficients):
    # Renders (exponent, coefficient) pairs in the literal grammar, lowest exponent first.
    pieces = []
    for exponent, coefficient in coefficients:
        if coefficient == 0:
            continue
        negative = coefficient < 0
        magnitude = -coefficient if negative else coefficient
        if exponent == 0:
            body = str(magnitude)
        else:
            monomial = 'u' if exponent == 1 else 'u^{0}'.format(exponent)
            body = monomial if magnitude == 1 else '{0}*{1}'.format(magnitude, monomial)
        if not pieces:
            pieces.append('-' + body if negative else body)
        else:
            pieces.append(('- ' if negative else '+ ') + body)
    return ' '.join(pieces) if pieces else '0'


class RingSpec(object):
    """
    One of the coefficient rings: F_p[u]/u^N, (Z/p^n)[u]/u^N, or rational polynomials of u-degree below a bound.
    """

    FP_SERIES = 'fp_series'
    ZPN_SERIES = 'zpn_series'
    RATIONAL_POLY = 'rational_poly'

    def __init__(self, kind, p, u_precision, n=1):
        if kind not in (RingSpec.FP_SERIES, RingSpec.ZPN_SERIES, RingSpec.RATIONAL_POLY):
            raise ValueError('Unknown ring kind "{0}"'.format(kind))
        if not sympy.isprime(p):
            raise ValueError('p = {0} is not a prime'.format(p))
        if u_precision < 1:
            raise ValueError('u-precision must be at least 1, got {0}'.format(u_precision))
        if n < 1:
            raise ValueError('p-power exponent must be at least 1, got {0}'.format(n))
        if kind == RingSpec.FP_SERIES:
            n = 1
        self.kind = kind
        self.p = int(p)
        self.n = int(n)
        self.u_precision = int(u_precision)

    @classmethod
    def fp_series(cls, p, u_precision=DEFAULT_U_PRECISION):
        return cls(cls.FP_SERIES, p, u_precision)

    @classmethod
    def zpn_series(cls, p, n, u_precision=DEFAULT_U_PRECISION):
        return cls(cls.ZPN_SERIES, p, u_precision, n)

    @classmethod
    def rational_poly(cls, p, u_degree_bound):
        return cls(cls.RATIONAL_POLY, p, u_degree_bound)

    @property
    def is_series(self):
        return self.kind != RingSpec.RATIONAL_POLY

    @property
    def modulus(self):
        if not self.is_series:
            return None
        return self.p ** self.n

    def with_level(self, n):
        """The series ring with the same p and u-precision at p-power level n."""
        if n == 1:
            return RingSpec.fp_series(self.p, self.u_precision)
        return RingSpec.zpn_series(self.p, n, self.u_precision)

    def _key(self):
        return (self.kind, self.p, self.n, self.u_precision)

    def __eq__(self, other):
        return isinstance(other, RingSpec) and self._key() == other._key()

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        if self.kind == RingSpec.FP_SERIES:
            return 'F_{0}[u]/u^{1}'.format(self.p, self.u_precision)
        if self.kind == RingSpec.ZPN_SERIES:
            return '(Z/{0}^{1})[u]/u^{2}'.format(self.p, self.n, self.u_precision)
        return 'Q[u]_<{0} (p={1})'.format(self.u_precision, self.p)


class SeriesElement(object):
    """
    An element of F_p[u]/u^N or (Z/p^n)[u]/u^N.

    'precision' is the number of leading u-digits known (coefficients at and above it are zero and unknown).
    'truncated' records that a Frobenius pushed nonzero digits past the ring's u-truncation.
    """

    def __init__(self, ring, coefficients, precision=None, truncated=False):
        if not ring.is_series:
            raise RingMismatch('SeriesElement requires a series ring, got {0}'.format(ring))
        size = ring.u_precision
        if precision is None:
            precision = size
        precision = max(0, min(int(precision), size))
        modulus = ring.modulus
        reduced = [0] * size
        for exponent, coefficient in enumerate(coefficients):
            if exponent >= precision:
                break
            if isinstance(coefficient, Fraction):
                reduced[exponent] = residue_mod(coefficient, modulus)
            else:
                reduced[exponent] = int(coefficient) % modulus
        self.ring = ring
        self.precision = precision
        self.truncated = bool(truncated)
        self._coefficients = tuple(reduced)

    @classmethod
    def constant(cls, ring, value):
        return cls(ring, [value])

    @classmethod
    def monomial(cls, ring, exponent, coefficient=1):
        coefficients = [0] * ring.u_precision
        if exponent < ring.u_precision:
            coefficients[exponent] = coefficient
        return cls(ring, coefficients)

    @property
    def coefficients(self):
        return self._coefficients

    def _coerce(self, other):
        if isinstance(other, SeriesElement):
            if other.ring != self.ring:
                raise RingMismatch('Operands live in {0} and {1}'.format(self.ring, other.ring))
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return SeriesElement.constant(self.ring, other)
        return None

    def _low(self):
        valuation = self.valuation()
        return self.precision if valuation is None else valuation

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        modulus = self.ring.modulus
        return SeriesElement(
                self.ring,
                [(a + b) % modulus for a, b in zip(self._coefficients, other._coefficients)],
                min(self.precision, other.precision),
                self.truncated or other.truncated)

    __radd__ = __add__

    def __neg__(self):
        modulus = self.ring.modulus
        return SeriesElement(self.ring, [(-a) % modulus for a in self._coefficients], self.precision, self.truncated)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        size = self.ring.u_precision
        modulus = self.ring.modulus
        precision = min(self.precision + other._low(), other.precision + self._low(), size)
        product = [0] * size
        for i, a in enumerate(self._coefficients):
            if a == 0:
                continue
            for j in range(size - i):
                b = other._coefficients[j]
                if b:
                    product[i + j] += a * b
        return SeriesElement(self.ring, [c % modulus for c in product], precision,
                             self.truncated or other.truncated)

    __rmul__ = __mul__

    def __pow__(self, exponent):
        result = SeriesElement.constant(self.ring, 1)
        for _ in range(exponent):
            result = result * self
        return result

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self._coefficients == other._coefficients

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    def __hash__(self):
        return hash((self.ring, self._coefficients))

    def valuation(self):
        """u-adic valuation, or None if the element reads zero at its precision."""
        for exponent, coefficient in enumerate(self._coefficients):
            if coefficient:
                return exponent
        return None

    def is_zero(self):
        return self.valuation() is None

    def is_unit(self):
        return self._coefficients[0] % self.ring.p != 0

    def residue(self):
        """Image in the residue field F_p."""
        return self._coefficients[0] % self.ring.p

    def inverse(self):
        if not self.is_unit():
            raise DomainMismatch('{0} is not a unit'.format(self))
        modulus = self.ring.modulus
        a = self._coefficients
        leading_inverse = int(sympy.mod_inverse(a[0], modulus))
        b = [0] * self.ring.u_precision
        b[0] = leading_inverse
        for k in range(1, self.precision):
            total = sum(a[i] * b[k - i] for i in range(1, k + 1))
            b[k] = (-leading_inverse * total) % modulus
        return SeriesElement(self.ring, b, self.precision, self.truncated)

    def frobenius(self):
        """u -> u^p. Coefficients in F_p and Z/p^n are fixed."""
        p = self.ring.p
        size = self.ring.u_precision
        image = [0] * size
        lost = False
        for exponent, coefficient in enumerate(self._coefficients):
            if not coefficient:
                continue
            if exponent * p < size:
                image[exponent * p] = coefficient
            else:
                lost = True
        return SeriesElement(self.ring, image, min(size, p * self.precision), self.truncated or lost)

    def shift(self, exponent):
        """Multiplication by u^exponent."""
        size = self.ring.u_precision
        coefficients = [0] * exponent + list(self._coefficients[:max(0, size - exponent)])
        return SeriesElement(self.ring, coefficients, self.precision + exponent, self.truncated)

    def divide_by_u(self, exponent):
        """Exact division by u^exponent; the leading 'exponent' digits must read zero."""
        if any(self._coefficients[:exponent]):
            raise DomainMismatch('{0} is not divisible by u^{1}'.format(self, exponent))
        return SeriesElement(self.ring, self._coefficients[exponent:], self.precision - exponent, self.truncated)

    def change_level(self, n):
        """Reduction to (Z/p^n)[u]/u^N for n at most the current level."""
        if n > self.ring.n:
            raise DomainMismatch('Cannot lift {0} from level {1} to level {2}'.format(self, self.ring.n, n))
        return SeriesElement(self.ring.with_level(n), self._coefficients, self.precision, self.truncated)

    def to_poly(self):
        """The canonical integer representative as a RationalPoly."""
        return RationalPoly(self._coefficients)

    def __repr__(self):
        text = _format_terms(enumerate(self._coefficients))
        if self.precision < self.ring.u_precision:
            text = '{0} + O(u^{1})'.format(text, self.precision)
        return text


class RationalPoly(object):
    """
    A polynomial in u with exact rational coefficients.
    """

    def __init__(self, coefficients=()):
        coefficients = [Fraction(c) for c in coefficients]
        while coefficients and coefficients[-1] == 0:
            coefficients.pop()
        self._coefficients = tuple(coefficients)

    @classmethod
    def constant(cls, value):
        return cls([value])

    @classmethod
    def monomial(cls, exponent, coefficient=1):
        return cls([0] * exponent + [coefficient])

    @property
    def coefficients(self):
        return self._coefficients

    @property
    def degree(self):
        """Degree in u; -1 for the zero polynomial."""
        return len(self._coefficients) - 1

    def coefficient(self, exponent):
        if 0 <= exponent < len(self._coefficients):
            return self._coefficients[exponent]
        return Fraction(0)

    def is_zero(self):
        return not self._coefficients

    def is_constant(self):
        return len(self._coefficients) <= 1

    @staticmethod
    def _coerce(other):
        if isinstance(other, RationalPoly):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return RationalPoly.constant(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        size = max(len(self._coefficients), len(other._coefficients))
        return RationalPoly([self.coefficient(k) + other.coefficient(k) for k in range(size)])

    __radd__ = __add__

    def __neg__(self):
        return RationalPoly([-c for c in self._coefficients])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return RationalPoly()
        product = [Fraction(0)] * (len(self._coefficients) + len(other._coefficients) - 1)
        for i, a in enumerate(self._coefficients):
            if a == 0:
                continue
            for j, b in enumerate(other._coefficients):
                product[i + j] += a * b
        return RationalPoly(product)

    __rmul__ = __mul__

    def __pow__(self, exponent):
        if exponent < 0:
            raise ValueError('Negative powers of polynomials are not supported')
        result = RationalPoly.constant(1)
        for _ in range(exponent):
            result = result * self
        return result

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self._coefficients == other._coefficients

    def __ne__(self, other):
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    def __hash__(self):
        return hash(self._coefficients)

    def divmod_monic(self, modulus_poly):
        """
        Division with remainder by a monic polynomial: returns (q, r) with self = q*E + r and deg r < deg E.
        """
        if modulus_poly.degree < 1 or modulus_poly.coefficient(modulus_poly.degree) != 1:
            raise ValueError('Divisor {0} must be monic of degree at least 1'.format(modulus_poly))
        e = modulus_poly.degree
        remainder = list(self._coefficients)
        quotient = [Fraction(0)] * max(0, len(remainder) - e)
        for top in range(len(remainder) - 1, e - 1, -1):
            leading = remainder[top]
            if leading == 0:
                continue
            quotient[top - e] = leading
            for k in range(e + 1):
                remainder[top - e + k] -= leading * modulus_poly.coefficient(k)
        return RationalPoly(quotient), RationalPoly(remainder[:e])

    def e_adic_valuation(self, modulus_poly):
        """Number of times the monic polynomial divides self, or None for zero."""
        if self.is_zero():
            return None
        valuation = 0
        current = self
        while True:
            quotient, remainder = current.divmod_monic(modulus_poly)
            if not remainder.is_zero():
                return valuation
            valuation += 1
            current = quotient

    def p_valuation(self, p):
        """Minimum p-adic valuation of the coefficients (the Gauss valuation), or None for zero."""
        valuations = [padic_valuation(c, p) for c in self._coefficients if c != 0]
        return min(valuations) if valuations else None

    def evaluate(self, x):
        result = Fraction(0)
        for coefficient in reversed(self._coefficients):
            result = result * x + coefficient
        return result

    def frobenius(self, p):
        """u -> u^p."""
        coefficients = [Fraction(0)] * (p * len(self._coefficients))
        for exponent, coefficient in enumerate(self._coefficients):
            coefficients[p * exponent] = coefficient
        return RationalPoly(coefficients)

    def truncate(self, size):
        """Reduction modulo u^size."""
        return RationalPoly(self._coefficients[:size])

    def reduce(self, ring):
        """Image in a series ring; coefficients must be p-integral."""
        if not ring.is_series:
            raise RingMismatch('Cannot reduce into {0}'.format(ring))
        return SeriesElement(ring, self._coefficients[:ring.u_precision])

    def __repr__(self):
        return _format_terms(enumerate(self._coefficients))


def series_add(x, y):
    return x + y


def series_mul(x, y):
    return x * y


def series_frobenius(x):
    return x.frobenius()


def poly_divmod_monic(f, modulus_poly):
    return f.divmod_monic(modulus_poly)


#
# Polynomial literal grammar: integers or a/b, the variable u, + - * ^ and parentheses.
#

class _LiteralParser(object):

    def __init__(self, text):
        self.text = text
        self.position = 0

    def _skip_space(self):
        while self.position < len(self.text) and self.text[self.position].isspace():
            self.position += 1

    def _peek(self):
        self._skip_space()
        if self.position < len(self.text):
            return self.text[self.position]
        return ''

    def _error(self, message):
        raise ParseError(message, self.position + 1)

    def parse(self):
        if not self.text.strip():
            self._error('empty polynomial literal')
        result = self._expression()
        if self._peek():
            self._error("unexpected '{0}'".format(self._peek()))
        return result

    def _expression(self):
        sign = self._peek()
        if sign in ('+', '-'):
            self.position += 1
        result = self._term()
        if sign == '-':
            result = -result
        while True:
            operator = self._peek()
            if operator == '+':
                self.position += 1
                result = result + self._term()
            elif operator == '-':
                self.position += 1
                result = result - self._term()
            else:
                return result

    def _term(self):
        result = self._factor()
        while self._peek() == '*':
            self.position += 1
            result = result * self._factor()
        return result

    def _factor(self):
        token = self._peek()
        if token.isdigit():
            value = Fraction(self._integer())
            if self._peek() == '/':
                self.position += 1
                denominator = self._integer()
                if denominator == 0:
                    self._error('zero denominator')
                value /= denominator
            base = RationalPoly.constant(value)
        elif token == 'u':
            self.position += 1
            base = RationalPoly.monomial(1)
        elif token == '(':
            self.position += 1
            base = self._expression()
            if self._peek() != ')':
                self._error("expected ')'")
            self.position += 1
        elif not token:
            self._error('unexpected end of literal')
        else:
            self._error("unexpected '{0}'".format(token))
        if self._peek() == '^':
            self.position += 1
            base = base ** self._integer()
        return base

    def _integer(self):
        self._skip_space()
        start = self.position
        while self.position < len(self.text) and self.text[self.position].isdigit():
            self.position += 1
        if start == self.position:
            self._error('expected an integer')
        return int(self.text[start:self.position])


def parse_polynomial(text):
    """
    Parse a polynomial literal such as '1 + 3*u^2 - 1/2*u^5' into a RationalPoly.

    Raises ParseError (with a 1-based column) on malformed input.
    """
    if isinstance(text, (int, Fraction)) and not isinstance(text, bool):
        return RationalPoly.constant(text)
    return _LiteralParser(str(text)).parse()


#
# Residue fields and row-echelon linear algebra over them.
#

class PrimeField(object):
    """The field F_p, elements stored as ints in [0, p)."""

    def __init__(self, p):
        self.p = int(p)

    zero = 0
    one = 1

    def coerce(self, value):
        if isinstance(value, Fraction):
            return residue_mod(value, self.p)
        return int(value) % self.p

    def inverse(self, value):
        if value % self.p == 0:
            raise ZeroDivisionError('0 has no inverse in F_{0}'.format(self.p))
        return int(sympy.mod_inverse(value, self.p))

    def reduce(self, value):
        return value % self.p

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(('F', self.p))

    def __repr__(self):
        return 'F_{0}'.format(self.p)


class RationalField(object):
    """The field Q, elements stored as Fractions."""

    zero = Fraction(0)
    one = Fraction(1)

    def coerce(self, value):
        return Fraction(value)

    def inverse(self, value):
        return 1 / Fraction(value)

    def reduce(self, value):
        return value

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash('Q')

    def __repr__(self):
        return 'Q'


def row_echelon(field, rows):
    """
    Reduced row-echelon form of a list of row vectors over a field.

    Returns (nonzero reduced rows, pivot columns).
    """
    matrix = [[field.coerce(x) for x in row] for row in rows]
    if not matrix:
        return [], []
    n_cols = len(matrix[0])
    pivots = []
    pivot_row = 0
    for col in range(n_cols):
        for i in range(pivot_row, len(matrix)):
            if field.reduce(matrix[i][col]) != 0:
                break
        else:
            continue
        matrix[pivot_row], matrix[i] = matrix[i], matrix[pivot_row]
        scale = field.inverse(matrix[pivot_row][col])
        matrix[pivot_row] = [field.reduce(x * scale) for x in matrix[pivot_row]]
        for r in range(len(matrix)):
            if r != pivot_row and field.reduce(matrix[r][col]) != 0:
                factor = matrix[r][col]
                matrix[r] = [field.reduce(a - factor * b) for a, b in zip(matrix[r], matrix[pivot_row])]
        pivots.append(col)
        pivot_row += 1
        if pivot_row == len(matrix):
            break
    return [tuple(row) for row in matrix[:pivot_row]], pivots


def null_space(field, rows, n_cols):
    """
    Basis of {x : rows . x = 0} as a list of vectors.
    """
    reduced, pivots = row_echelon(field, rows) if rows else ([], [])
    free = [c for c in range(n_cols) if c not in pivots]
    basis = []
    for f in free:
        vector = [field.zero] * n_cols
        vector[f] = field.one
        for row, pivot in zip(reduced, pivots):
            vector[pivot] = field.reduce(-row[f])
        basis.append(tuple(vector))
    return basis


def solve_linear(field, rows, rhs):
    """
    One solution x of rows . x = rhs together with a basis of the homogeneous solutions, or None if inconsistent.
    """
    n_cols = len(rows[0]) if rows else 0
    augmented = [list(row) + [b] for row, b in zip(rows, rhs)]
    reduced, pivots = row_echelon(field, augmented)
    if n_cols in pivots:
        return None
    particular = [field.zero] * n_cols
    for row, pivot in zip(reduced, pivots):
        particular[pivot] = row[n_cols]
    return tuple(particular), null_space(field, rows, n_cols)


def inverse_matrix(field, matrix):
    """Inverse of a square matrix (list of rows) over a field."""
    size = len(matrix)
    augmented = [list(matrix[i]) + [field.one if i == j else field.zero for j in range(size)]
                 for i in range(size)]
    reduced, pivots = row_echelon(field, augmented)
    if pivots[:size] != list(range(size)) or len(reduced) < size:
        raise NotFullRank('Matrix is singular over {0}'.format(field))
    return [list(row[size:]) for row in reduced]


#
# Matrix helpers for object-dtype numpy arrays.
#

def object_matrix(rows, coerce=None):
    """Builds an object-dtype matrix entry by entry (never letting numpy guess the structure of ring elements)."""
    rows = [list(row) for row in rows]
    n_rows = len(rows)
    n_cols = len(rows[0]) if rows else 0
    matrix = np.empty((n_rows, n_cols), dtype=object)
    for i, row in enumerate(rows):
        if len(row) != n_cols:
            raise ValueError('Ragged matrix: row {0} has {1} entries, expected {2}'.format(i, len(row), n_cols))
        for j, entry in enumerate(row):
            matrix[i, j] = coerce(entry) if coerce else entry
    return matrix


def identity_matrix(size, one, zero):
    matrix = np.empty((size, size), dtype=object)
    for i in range(size):
        for j in range(size):
            matrix[i, j] = one if i == j else zero
    return matrix


def matrix_product(a, b, zero):
    """Product of object matrices; 'zero' fills products with an empty inner dimension."""
    n_rows, inner = a.shape
    n_cols = b.shape[1]
    product = np.empty((n_rows, n_cols), dtype=object)
    for i in range(n_rows):
        for j in range(n_cols):
            total = zero
            for k in range(inner):
                total = total + a[i, k] * b[k, j]
            product[i, j] = total
    return product


def determinant(matrix, one, zero):
    """
    Determinant by expansion along rows, memoised on the remaining column set.
    """
    size = matrix.shape[0]
    memo = {}

    def minor(row, columns):
        if row == size:
            return one
        key = (row, columns)
        if key in memo:
            return memo[key]
        total = zero
        for position, column in enumerate(columns):
            term = matrix[row, column] * minor(row + 1, columns[:position] + columns[position + 1:])
            total = total + term if position % 2 == 0 else total - term
        memo[key] = total
        return total

    return minor(0, tuple(range(size)))


def adjugate(matrix, one, zero):
    """Transposed cofactor matrix: adj(A).A = A.adj(A) = det(A).I"""
    size = matrix.shape[0]
    result = np.empty((size, size), dtype=object)
    if size == 1:
        result[0, 0] = one
        return result
    for i in range(size):
        for j in range(size):
            rows = [r for r in range(size) if r != i]
            cols = [c for c in range(size) if c != j]
            cofactor = determinant(matrix[np.ix_(rows, cols)], one, zero)
            result[j, i] = cofactor if (i + j) % 2 == 0 else -cofactor
    return result


def diagonal_blocks(matrix):
    """
    Index sets of the diagonal blocks of a square matrix: i and j share a block when entry (i, j) or (j, i) is
    nonzero, closed under chaining.
    """
    size = matrix.shape[0]
    labels = list(range(size))

    def find(i):
        while labels[i] != i:
            labels[i] = labels[labels[i]]
            i = labels[i]
        return i

    for i in range(size):
        for j in range(size):
            if i != j and not matrix[i, j].is_zero():
                labels[find(i)] = find(j)
    blocks = {}
    for i in range(size):
        blocks.setdefault(find(i), []).append(i)
    return sorted(blocks.values())


#
# Discrete valuation ring contexts.
#
# Each context supplies coerce/zero/one, valuation (None for zero), exact division by a uniformizer power,
# and (where the residue field is F_p) the residue map.
#

class UAdicContext(object):
    """F_p[[u]] truncated at u^N, uniformizer u."""

    name = 'u-adic'
    exact = False

    def __init__(self, p, u_precision=DEFAULT_U_PRECISION):
        self.ring = RingSpec.fp_series(p, u_precision)
        self.p = self.ring.p
        self.precision = self.ring.u_precision
        self.residue_field = PrimeField(self.p)

    def coerce(self, value):
        if isinstance(value, SeriesElement):
            if value.ring != self.ring:
                raise RingMismatch('{0} does not live in {1}'.format(value, self.ring))
            return value
        if isinstance(value, RationalPoly):
            return value.reduce(self.ring)
        if isinstance(value, str):
            return parse_polynomial(value).reduce(self.ring)
        return SeriesElement.constant(self.ring, value)

    def zero(self):
        return SeriesElement.constant(self.ring, 0)

    def one(self):
        return SeriesElement.constant(self.ring, 1)

    def uniformizer_power(self, exponent):
        return SeriesElement.monomial(self.ring, exponent)

    def valuation(self, x):
        return x.valuation()

    def divide(self, x, exponent):
        return x.divide_by_u(exponent)

    def residue(self, x):
        return x.residue()

    def from_residue(self, value):
        return SeriesElement.constant(self.ring, value)

    def __eq__(self, other):
        return isinstance(other, UAdicContext) and other.ring == self.ring

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(('u', self.ring))

    def __repr__(self):
        return 'u-adic over {0}'.format(self.ring)


class PAdicContext(object):
    """The localisation of Q[u] at p (Gauss valuation), uniformizer p."""

    name = 'p-adic'
    exact = True

    def __init__(self, p):
        if not sympy.isprime(p):
            raise ValueError('p = {0} is not a prime'.format(p))
        self.p = int(p)
        self.residue_field = PrimeField(self.p)

    def coerce(self, value):
        if isinstance(value, RationalPoly):
            return value
        if isinstance(value, str):
            return parse_polynomial(value)
        return RationalPoly.constant(value)

    def zero(self):
        return RationalPoly()

    def one(self):
        return RationalPoly.constant(1)

    def uniformizer_power(self, exponent):
        return RationalPoly.constant(Fraction(self.p) ** exponent)

    def valuation(self, x):
        return x.p_valuation(self.p)

    def divide(self, x, exponent):
        return x * (Fraction(1, self.p) ** exponent)

    def residue(self, x):
        if not x.is_constant():
            raise DomainMismatch('Residues are only available for constants, got {0}'.format(x))
        return residue_mod(x.coefficient(0), self.p)

    def from_residue(self, value):
        return RationalPoly.constant(value)

    def __eq__(self, other):
        return isinstance(other, PAdicContext) and other.p == self.p

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(('p', self.p))

    def __repr__(self):
        return 'p-adic (p={0})'.format(self.p)


class EAdicContext(object):
    """The localisation of Q[u] at a monic irreducible E, uniformizer E."""

    name = 'E-adic'
    exact = True
    residue_field = None

    def __init__(self, eisenstein):
        self.eisenstein = eisenstein

    def coerce(self, value):
        if isinstance(value, RationalPoly):
            return value
        if isinstance(value, str):
            return parse_polynomial(value)
        return RationalPoly.constant(value)

    def zero(self):
        return RationalPoly()

    def one(self):
        return RationalPoly.constant(1)

    def uniformizer_power(self, exponent):
        return self.eisenstein ** exponent

    def valuation(self, x):
        return x.e_adic_valuation(self.eisenstein)

    def divide(self, x, exponent):
        for _ in range(exponent):
            x, remainder = x.divmod_monic(self.eisenstein)
            if not remainder.is_zero():
                raise DomainMismatch('Polynomial is not divisible by E^{0}'.format(exponent))
        return x

    def residue(self, x):
        raise DomainMismatch('The E-adic residue field is not a prime field')

    def __eq__(self, other):
        return isinstance(other, EAdicContext) and other.eisenstein == self.eisenstein

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(('E', self.eisenstein))

    def __repr__(self):
        return 'E-adic (E={0})'.format(self.eisenstein)


class SnfResult(object):
    """
    left . A . right = diag(pivots), with pivot i of valuation diagonal[i].

    Valuations are weakly increasing. A None entry means the pivot reads zero at the working precision
    (only produced when full rank is not required).
    """

    def __init__(self, left, right, diagonal, pivots):
        self.left = left
        self.right = right
        self.diagonal = diagonal
        self.pivots = pivots

    def __repr__(self):
        return 'SnfResult(diagonal={0})'.format(self.diagonal)


def as_context_matrix(matrix, context):
    if isinstance(matrix, np.ndarray):
        rows = [[matrix[i, j] for j in range(matrix.shape[1])] for i in range(matrix.shape[0])]
    else:
        rows = matrix
    return object_matrix(rows, context.coerce)


def snf_dvr(matrix, context, require_full_rank=True):
    """
    Smith normal form over a discrete valuation ring by fraction-free elimination.

    The pivot is an entry of minimal valuation, ties going to the lowest (row, column). With pivot w = pi^k.unit,
    every other row i becomes unit.row_i - (a_i / pi^k).row_pivot (and likewise for columns), so no inverses of
    non-constant units are ever needed. Rectangular inputs are allowed.

    Raises PrecisionExhausted (u-adic) or NotFullRank (exact contexts) when a pivot is required but every
    remaining entry reads zero.
    """
    a = as_context_matrix(matrix, context)
    n_rows, n_cols = a.shape
    left = identity_matrix(n_rows, context.one(), context.zero())
    right = identity_matrix(n_cols, context.one(), context.zero())
    diagonal = []
    pivots = []
    for t in range(min(n_rows, n_cols)):
        pivot = None
        for i in range(t, n_rows):
            for j in range(t, n_cols):
                valuation = context.valuation(a[i, j])
                if valuation is not None and (pivot is None or valuation < pivot[0]):
                    pivot = (valuation, i, j)
        if pivot is None:
            if require_full_rank:
                if context.exact:
                    raise NotFullRank('Matrix is singular over the fraction field ({0})'.format(context))
                raise PrecisionExhausted(
                        'Every remaining entry reads zero at u-precision {0}'.format(context.precision),
                        {'context': context.name, 'u_precision': context.precision, 'step': t})
            diagonal.extend([None] * (min(n_rows, n_cols) - t))
            break
        k, i, j = pivot
        if i != t:
            a[[t, i], :] = a[[i, t], :]
            left[[t, i], :] = left[[i, t], :]
        if j != t:
            a[:, [t, j]] = a[:, [j, t]]
            right[:, [t, j]] = right[:, [j, t]]
        unit = context.divide(a[t, t], k)
        for i in range(t + 1, n_rows):
            if context.valuation(a[i, t]) is None:
                continue
            factor = context.divide(a[i, t], k)
            a[i, :] = unit * a[i, :] - factor * a[t, :]
            left[i, :] = unit * left[i, :] - factor * left[t, :]
        for j in range(t + 1, n_cols):
            if context.valuation(a[t, j]) is None:
                continue
            factor = context.divide(a[t, j], k)
            a[:, j] = unit * a[:, j] - factor * a[:, t]
            right[:, j] = unit * right[:, j] - factor * right[:, t]
        diagonal.append(k)
        pivots.append(a[t, t])
    return SnfResult(left, right, diagonal, pivots)


def column_span_basis(generators, context):
    """
    A square basis matrix for the O-module spanned by the columns of an r x m generator matrix of rank r.

    From left.G.right = [D | 0] the span is left^{-1}.D.O^r; adj(left) differs from left^{-1} by the unit det(left).
    """
    snf = snf_dvr(generators, context)
    size = snf.left.shape[0]
    adj = adjugate(snf.left, context.one(), context.zero())
    basis = np.empty((size, size), dtype=object)
    for i in range(size):
        for j in range(size):
            basis[i, j] = adj[i, j] * snf.pivots[j]
    return basis


#
# Smith normal form over Z/p^n.
#

class IntegerSnfResult(object):
    """
    left . A . right = diag(p^diagonal[i]) modulo p^n, with the valuations capped at n.

    'diagonal' has one entry per row of the matrix (rows beyond the rank carry n). 'left' and 'right' are
    invertible integer matrices over Z/p^n, stored as lists of rows of residues.
    """

    def __init__(self, p, n, diagonal, left=None, right=None):
        self.p = p
        self.n = n
        self.diagonal = diagonal
        self.left = left
        self.right = right

    @property
    def cokernel_length(self):
        """log_p of the cardinality of the cokernel."""
        return sum(min(v, self.n) for v in self.diagonal)

    @property
    def image_length(self):
        """log_p of the cardinality of the column span."""
        return sum(self.n - min(v, self.n) for v in self.diagonal)

    def __repr__(self):
        return 'IntegerSnfResult(diagonal={0})'.format(self.diagonal)


def _valuation_mod(value, p, n):
    if value == 0:
        return n
    valuation = 0
    while value % p == 0:
        value //= p
        valuation += 1
    return valuation


def _identity_rows(size):
    return [[1 if i == j else 0 for j in range(size)] for i in range(size)]


def snf_integer_mod(matrix, p, n):
    """
    Smith normal form of an integer matrix over Z/p^n, with the row and column transforms.

    |coker(A mod p^n)| = p^(sum of capped valuations).
    """
    modulus = p ** n
    a = [[int(x) % modulus for x in row] for row in matrix]
    n_rows = len(a)
    n_cols = len(a[0]) if a else 0
    left = _identity_rows(n_rows)
    right = _identity_rows(n_cols)
    diagonal = []
    for t in range(min(n_rows, n_cols)):
        pivot = None
        for i in range(t, n_rows):
            for j in range(t, n_cols):
                if a[i][j]:
                    valuation = _valuation_mod(a[i][j], p, n)
                    if pivot is None or valuation < pivot[0]:
                        pivot = (valuation, i, j)
                        if valuation == 0:
                            break
            if pivot is not None and pivot[0] == 0:
                break
        if pivot is None:
            break
        k, i, j = pivot
        a[t], a[i] = a[i], a[t]
        left[t], left[i] = left[i], left[t]
        if j != t:
            for row in a:
                row[t], row[j] = row[j], row[t]
            for row in right:
                row[t], row[j] = row[j], row[t]
        scale = int(sympy.mod_inverse(a[t][t] // (p ** k), modulus))
        a[t] = [(x * scale) % modulus for x in a[t]]
        left[t] = [(x * scale) % modulus for x in left[t]]
        step = p ** k
        for i in range(t + 1, n_rows):
            if a[i][t]:
                factor = a[i][t] // step
                a[i] = [(x - factor * y) % modulus for x, y in zip(a[i], a[t])]
                left[i] = [(x - factor * y) % modulus for x, y in zip(left[i], left[t])]
        for j in range(t + 1, n_cols):
            if a[t][j]:
                factor = a[t][j] // step
                for row in a:
                    row[j] = (row[j] - factor * row[t]) % modulus
                for row in right:
                    row[j] = (row[j] - factor * row[t]) % modulus
        diagonal.append(k)
    diagonal.extend([n] * (n_rows - len(diagonal)))
    return IntegerSnfResult(p, n, diagonal, left, right)
