
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
# Error vocabulary shared by all slopeforge modules.
#
# Input and domain errors derive from ValueError (bad arguments, malformed documents, objects outside the
# supported domain). Kernel errors derive from RuntimeError (a computation ran out of precision, search budget
# or steps). Kernel errors carry a 'certificate' dict describing the precision and bounds that were in effect.
#################################################################################################################


class SlopeforgeError(Exception):
    """Mixin base of every slopeforge error."""
    pass


#
# Input and domain errors.
#

class RingMismatch(SlopeforgeError, ValueError):
    pass


class LengthMismatch(SlopeforgeError, ValueError):
    pass


class DomainMismatch(SlopeforgeError, ValueError):
    pass


class ParseError(SlopeforgeError, ValueError):
    """A polynomial literal could not be parsed. 'column' is 1-based."""

    def __init__(self, message, column):
        super(ParseError, self).__init__('{0} (column {1})'.format(message, column))
        self.column = column


class SchemaError(SlopeforgeError, ValueError):
    """An input document does not match the expected schema at 'path'."""

    def __init__(self, path, expected):
        super(SchemaError, self).__init__('{0}: expected {1}'.format(path, expected))
        self.path = path
        self.expected = expected


class NotFullRank(SlopeforgeError, ValueError):
    pass


class NoAdaptedBasis(SlopeforgeError, ValueError):
    pass


class ZeroObject(SlopeforgeError, ValueError):
    pass


class NonTransitiveAction(SlopeforgeError, ValueError):
    pass


class BaseMismatch(SlopeforgeError, ValueError):
    pass


class NonIntegralFiltration(SlopeforgeError, ValueError):
    pass


class NotDiagonalizable(SlopeforgeError, ValueError):
    pass


class NotWeaklyAdmissible(SlopeforgeError, ValueError):
    pass


#
# Kernel errors.
#

class KernelError(SlopeforgeError, RuntimeError):

    def __init__(self, message, certificate=None):
        super(KernelError, self).__init__(message)
        self.certificate = dict(certificate) if certificate else {}


class PrecisionExhausted(KernelError):
    pass


class SearchBudgetExceeded(KernelError):
    pass


class BoundedSearchInconclusive(KernelError):
    pass


class VerificationFailed(KernelError):
    pass


class StepBudgetExceeded(KernelError):
    pass
