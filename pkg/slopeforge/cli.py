
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
# Command-line front end.
#
# Each command reads one (or, with --batch, several) JSON documents with the top-level keys 'ring', 'eisenstein',
# 'object' and 'options', runs the matching kernel operation and writes a text, CSV or SVG report to stdout.
# Exit code 0 on success, 1 on input errors and 2 on kernel errors (which are reported with their certificate).
#################################################################################################################


from __future__ import print_function
import argparse
import csv
import io
import json
import sys
import warnings

from . import arith
from . import isocrystal
from . import kisin
from . import lattices
from . import phimod
from . import tori
from . import hncore
from .exceptions import KernelError, ParseError, SchemaError, SlopeforgeError
from .typealgebra import parse_type, polygon_of


EXIT_SUCCESS = 0
EXIT_INPUT_ERROR = 1
EXIT_KERNEL_ERROR = 2

OUTPUT_FORMATS = ('text', 'csv', 'svg')

# Object kind expected by each command.
COMMAND_KINDS = {
    'types': 'types',
    'pos': 'lattice_pair',
    'hn': 'phimodule',
    'newton': 'isocrystal',
    'mazur': 'isocrystal',
    'xmu': 'isocrystal',
    'phicris': 'isocrystal',
    'wa': 'filtered',
    'abelian': 'abelian',
    'kisin': 'kisin',
}

KISIN_ACTIONS = ('polygon', 'limit', 'theta', 'decompose')

RING_KINDS = ('fp_series', 'zpn_series', 'rational_poly')

SVG_COLOURS = ('#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e', '#8c564b')


#
# Schema validation.
#

def _get(mapping, key, path, expected, kinds=None, default=None, required=True):
    if not isinstance(mapping, dict):
        raise SchemaError(path.rsplit('.', 1)[0] if '.' in path else path, 'an object')
    if key not in mapping or mapping[key] is None:
        if required:
            raise SchemaError(path, expected)
        return default
    value = mapping[key]
    if kinds is not None and (not isinstance(value, kinds) or isinstance(value, bool)):
        raise SchemaError(path, expected)
    return value


def _literal(value, path):
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise SchemaError(path, 'a polynomial literal')
    if isinstance(value, int):
        return arith.RationalPoly.constant(value)
    try:
        return arith.parse_polynomial(value)
    except ParseError as exc:
        raise SchemaError(path, 'a polynomial literal ({0})'.format(exc))


def _matrix(value, path):
    if not isinstance(value, list) or not value or not all(isinstance(row, list) for row in value):
        raise SchemaError(path, 'a nonempty list of rows')
    size = len(value[0])
    rows = []
    for i, row in enumerate(value):
        if len(row) != size:
            raise SchemaError('{0}[{1}]'.format(path, i), 'a row of length {0}'.format(size))
        rows.append([_literal(x, '{0}[{1}][{2}]'.format(path, i, j)) for j, x in enumerate(row)])
    return rows


def _rational_matrix(value, path):
    rows = _matrix(value, path)
    for i, row in enumerate(rows):
        for j, x in enumerate(row):
            if not x.is_constant():
                raise SchemaError('{0}[{1}][{2}]'.format(path, i, j), 'a rational constant')
    return [[x.coefficient(0) for x in row] for row in rows]


class Request(object):
    """A validated document: the command, the ring data, the object payload and the resolved options."""

    def __init__(self, command, action, ring, eisenstein, payload, options, source):
        self.command = command
        self.action = action
        self.ring = ring
        self.eisenstein = eisenstein
        self.payload = payload
        self.options = options
        self.source = source


def _parse_ring(document):
    ring = _get(document, 'ring', 'ring', 'an object', dict)
    kind = _get(ring, 'kind', 'ring.kind', 'one of {0}'.format(', '.join(RING_KINDS)), str)
    if kind not in RING_KINDS:
        raise SchemaError('ring.kind', 'one of {0}'.format(', '.join(RING_KINDS)))
    p = _get(ring, 'p', 'ring.p', 'a prime', int)
    n = _get(ring, 'n', 'ring.n', 'a positive integer', int, default=1, required=False)
    precision = _get(ring, 'u_precision', 'ring.u_precision', 'a positive integer', int,
                     default=arith.DEFAULT_U_PRECISION, required=False)
    if n < 1:
        raise SchemaError('ring.n', 'a positive integer')
    if precision < 2:
        raise SchemaError('ring.u_precision', 'an integer of at least 2')
    try:
        spec = arith.RingSpec(kind, p, precision, n)
    except ValueError:
        raise SchemaError('ring.p', 'a prime')
    return spec


def _resolve_options(document, flags):
    # Precedence: command-line flag > document options > module default.
    options = _get(document, 'options', 'options', 'an object', dict, default={}, required=False)
    resolved = {}
    for key, flag, default, path in (('n_max', flags.get('n_max'), kisin.DEFAULT_N_MAX, 'options.n_max'),
                                     ('bound', flags.get('bound'), isocrystal.DEFAULT_LATTICE_BOUND, 'options.bounds'),
                                     ('search_degree', flags.get('search_degree'), None, 'options.search_degree')):
        name = 'bounds' if key == 'bound' else key
        value = _get(options, name, path, 'an integer', int, default=default, required=False)
        resolved[key] = flag if flag is not None else value
    return resolved


def parse(document, command, action=None, flags=None, source='<document>'):
    """Validates a loaded document for 'command' and returns a Request."""
    if not isinstance(document, dict):
        raise SchemaError('document', 'an object')
    if command not in COMMAND_KINDS:
        raise SchemaError('command', 'one of {0}'.format(', '.join(sorted(COMMAND_KINDS))))
    ring = _parse_ring(document)
    obj = _get(document, 'object', 'object', 'an object', dict)
    kind = _get(obj, 'kind', 'object.kind', "'{0}'".format(COMMAND_KINDS[command]), str)
    if kind != COMMAND_KINDS[command]:
        raise SchemaError('object.kind', "'{0}' for the {1} command".format(COMMAND_KINDS[command], command))
    payload = _get(obj, 'payload', 'object.payload', 'an object', dict)
    eisenstein = None
    if command == 'kisin':
        if action not in KISIN_ACTIONS:
            raise SchemaError('action', 'one of {0}'.format(', '.join(KISIN_ACTIONS)))
        value = _get(document, 'eisenstein', 'eisenstein', 'a coefficient list or a polynomial literal')
        if isinstance(value, list):
            coefficients = [_literal(c, 'eisenstein[{0}]'.format(i)) for i, c in enumerate(value)]
            if not all(c.is_constant() for c in coefficients):
                raise SchemaError('eisenstein', 'rational coefficients')
            eisenstein = kisin.EisensteinPoly(ring.p, arith.RationalPoly([c.coefficient(0) for c in coefficients]))
        else:
            eisenstein = kisin.EisensteinPoly(ring.p, _literal(value, 'eisenstein'))
    return Request(command, action, ring, eisenstein, payload, _resolve_options(document, flags or {}), source)


#
# Reports.
#

class Report(object):
    """Ordered (label, value) lines, named polygons and the certificate of a run."""

    def __init__(self, title):
        self.title = title
        self.lines = []
        self.polygons = []
        self.certificate = {}

    def add(self, label, value):
        self.lines.append((label, value))

    def add_polygon(self, series, polygon):
        self.polygons.append((series, polygon))


def _format(value):
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, (list, tuple)):
        return '[{0}]'.format(', '.join(_format(v) for v in value))
    return str(value)


def _format_matrix(rows):
    return '[{0}]'.format(', '.join('[{0}]'.format(', '.join(str(x) for x in row)) for row in rows))


def _record_flag(report, flag):
    report.add('slopes', [str(s) for s in flag.slopes])
    report.add('ranks', flag.ranks)
    report.certificate.update(flag.certificate.as_dict())


#
# Command runners.
#

def _run_types(request, report):
    entries = _get(request.payload, 'types', 'object.payload.types', 'a list of types', list)
    types = []
    for i, text in enumerate(entries):
        if not isinstance(text, str):
            raise SchemaError('object.payload.types[{0}]'.format(i), 'a type such as "(1, 0)"')
        types.append(parse_type(text))
    for i, t in enumerate(types):
        report.add('type[{0}]'.format(i), t)
        report.add('degree[{0}]'.format(i), t.degree())
        report.add('norm_sq[{0}]'.format(i), t.norm_sq())
        report.add('involution[{0}]'.format(i), t.involution())
        report.add_polygon('type[{0}]'.format(i), polygon_of(t))
    for i in range(len(types) - 1):
        comparable = len(types[i]) == len(types[i + 1])
        report.add('dominance[{0}<={1}]'.format(i, i + 1), comparable and types[i].dominance_le(types[i + 1]))


def _lattice(request, value, path):
    basis = _get(value, 'basis', path + '.basis', 'a square matrix', list)
    shift = _get(value, 'shift', path + '.shift', 'an integer', int, default=0, required=False)
    ring = request.ring
    if ring.kind == 'rational_poly':
        context = arith.PAdicContext(ring.p)
        return lattices.DvrLattice.from_rationals(context, _rational_matrix(basis, path + '.basis')).scaled(-shift)
    context = arith.UAdicContext(ring.p, ring.u_precision)
    return lattices.DvrLattice(context, _matrix(basis, path + '.basis'), shift)


def _run_pos(request, report):
    first = _lattice(request, _get(request.payload, 'first', 'object.payload.first', 'a lattice', dict),
                     'object.payload.first')
    second = _lattice(request, _get(request.payload, 'second', 'object.payload.second', 'a lattice', dict),
                      'object.payload.second')
    relative = lattices.pos(first, second)
    report.add('pos', relative)
    report.add('nu', lattices.nu(first, second))
    report.add('dist_sq', lattices.dist_sq(first, second))
    report.add_polygon('pos', polygon_of(relative))
    report.certificate['context'] = first.context.name
    if not first.context.exact:
        report.certificate['u_precision'] = request.ring.u_precision


def _run_hn(request, report):
    ring = request.ring
    matrix = _matrix(_get(request.payload, 'matrix', 'object.payload.matrix', 'a square matrix', list),
                     'object.payload.matrix')
    twist = _get(request.payload, 'twist', 'object.payload.twist', 'an integer', int, default=0, required=False)
    search_degree = request.options['search_degree']
    report.certificate['u_precision'] = ring.u_precision
    if ring.kind == 'fp_series' or (ring.kind == 'zpn_series' and ring.n == 1):
        module = phimod.PTorsionPhiModule(ring.p, matrix, twist, ring.u_precision)
        flag, polygon = phimod.pt_fargues(module, search_degree)
        hodge = phimod.pt_hodge_type(module)
        report.add('rank', phimod.pt_rank(module))
        report.add('degree', phimod.pt_degree(module))
        report.add('t_H', hodge)
        report.add('t_F', polygon)
        _record_flag(report, flag)
        report.add_polygon('t_H', polygon_of(hodge))
        report.add_polygon('t_F', polygon_of(polygon))
    elif ring.kind == 'zpn_series':
        module = phimod.TorsionKisinModule(ring.p, ring.n, matrix, twist, ring.u_precision)
        flag, polygon = phimod.tk_fargues(module, search_degree)
        report.add('rank', phimod.tk_rank(module))
        report.add('degree', phimod.tk_degree(module))
        report.add('t_F', polygon)
        _record_flag(report, flag)
        report.add_polygon('t_F', hncore.polygon_of_flag(flag))
    else:
        raise SchemaError('ring.kind', "'fp_series' or 'zpn_series' for the hn command")


def _isocrystal(request):
    b = _rational_matrix(_get(request.payload, 'b', 'object.payload.b', 'a square matrix', list),
                         'object.payload.b')
    s = _get(request.payload, 's', 'object.payload.s', 'a positive integer', int, default=1, required=False)
    return isocrystal.Isocrystal(request.ring.p, b, s)


def _witt_lattice(request, crystal):
    value = _get(request.payload, 'lattice', 'object.payload.lattice', 'a square matrix', list, required=False)
    if value is None:
        size = crystal.dimension
        value = [[1 if i == j else 0 for j in range(size)] for i in range(size)]
    return isocrystal.witt_lattice(crystal, _rational_matrix(value, 'object.payload.lattice'))


def _mu(request):
    text = _get(request.payload, 'mu', 'object.payload.mu', 'a type such as "(0, -1)"', str)
    return parse_type(text)


def _run_newton(request, report):
    crystal = _isocrystal(request)
    newton = isocrystal.newton_type(crystal)
    report.add('newton', newton)
    report.add('kottwitz', isocrystal.kottwitz_point(crystal))
    report.add_polygon('t_N', polygon_of(newton))


def _run_mazur(request, report):
    crystal = _isocrystal(request)
    lattice = _witt_lattice(request, crystal)
    hodge = isocrystal.lattice_hodge_type(crystal, lattice)
    newton = isocrystal.newton_type(crystal).involution()
    report.add('newton_involuted', newton)
    report.add('lattice_hodge', hodge)
    report.add('mazur', isocrystal.mazur_check(crystal, lattice))
    report.add_polygon('t_N^i', polygon_of(newton))
    report.add_polygon('t_H(y)', polygon_of(hodge))


def _run_xmu(request, report):
    crystal = _isocrystal(request)
    mu = _mu(request)
    bound = request.options['bound']
    found = isocrystal.lattice_set(crystal, mu, bound)
    report.add('mu', mu)
    report.add('lattices', len(found))
    report.add('nonempty', bool(found))
    report.add('criterion', isocrystal.gashi_criterion(crystal, mu))
    report.add('mu_ordinary', isocrystal.is_mu_ordinary(crystal, mu, bound))
    report.certificate.update({'exhaustive': True, 'bound': bound})


def _run_phicris(request, report):
    crystal = _isocrystal(request)
    lattice = _witt_lattice(request, crystal)
    power = _get(request.payload, 'power', 'object.payload.power', 'a positive integer', int, default=1,
                 required=False)
    result = isocrystal.phi_cris(crystal, lattice, power)
    translate = isocrystal.frobenius_translate(crystal, lattice, power)
    report.add('phi_cris', _format_matrix(result.to_rationals()))
    report.add('equals_frobenius', lattices.lattice_equal(result, translate))


def _run_wa(request, report):
    crystal = _isocrystal(request)
    hodge = _get(request.payload, 'hodge', 'object.payload.hodge', 'an object with vectors and weights', dict)
    vectors = _rational_matrix(_get(hodge, 'vectors', 'object.payload.hodge.vectors', 'a list of vectors', list),
                               'object.payload.hodge.vectors')
    weights = _get(hodge, 'weights', 'object.payload.hodge.weights', 'a list of integers', list)
    if len(weights) != len(vectors) or not all(isinstance(w, int) for w in weights):
        raise SchemaError('object.payload.hodge.weights', 'one integer per vector')
    filtered = isocrystal.FilteredIsocrystal.from_weights(crystal, vectors, weights)
    admissible = isocrystal.fi_is_weakly_admissible(filtered)
    report.add('t_H', isocrystal.fi_hodge_type(filtered))
    report.add('t_N', isocrystal.fi_newton_type(filtered))
    report.add('deg', isocrystal.fi_deg(filtered))
    report.add('weakly_admissible', admissible)
    _, certificate = isocrystal.sub_isocrystals(filtered)
    report.certificate.update(certificate.as_dict())
    if admissible:
        flag, fargues = isocrystal.fi_fargues(filtered)
        report.add('t_F', fargues)
        _record_flag(report, flag)
        report.add_polygon('t_F', polygon_of(fargues))


def _run_abelian(request, report):
    size = _get(request.payload, 'size', 'object.payload.size', 'a positive integer', int)
    base = _get(request.payload, 'base', 'object.payload.base', 'an integer', int, default=0, required=False)
    generators = _get(request.payload, 'generators', 'object.payload.generators', 'a list of permutations', list,
                      required=False)
    galois_set = tori.GaloisSet(size, generators, base)
    values = _get(request.payload, 'weights', 'object.payload.weights', 'a list of value lists', list)
    weights = []
    for i, row in enumerate(values):
        if not isinstance(row, list) or not all(isinstance(v, int) for v in row):
            raise SchemaError('object.payload.weights[{0}]'.format(i), 'a list of integers')
        weights.append(tori.CharacterFunction(galois_set, row))
    report.add('t_H', tori.push_to_weights(weights, 'hodge'))
    report.add('t_N', tori.push_to_weights(weights, 'newton'))
    report.add('t_F', tori.fargues_type(weights))
    report.add('ordinary', tori.is_ordinary_abelian(weights))


def _kisin_module(request):
    ring = request.ring
    matrix = _matrix(_get(request.payload, 'matrix', 'object.payload.matrix', 'a square matrix', list),
                     'object.payload.matrix')
    twist = _get(request.payload, 'twist', 'object.payload.twist', 'an integer', int, default=0, required=False)
    return kisin.KisinModule(ring.p, request.eisenstein, matrix, twist, ring.u_precision)


def _run_kisin(request, report):
    module = _kisin_module(request)
    n_max = request.options['n_max']
    search_degree = request.options['search_degree']
    report.certificate.update({'u_precision': module.u_precision, 'n_max': n_max})
    if request.action == 'polygon':
        hodge = kisin.k_hodge_type(module)
        report.add('t_H', hodge)
        report.add('t_H,u', kisin.k_crystal_hodge_type(module))
        report.add('t_H(M/p)/e', kisin.k_rescaled_hodge_mod_p(module))
        report.add_polygon('t_H', polygon_of(hodge))
        sequence = kisin.k_fargues_sequence(module, n_max, search_degree)
        for n, polygon in sequence:
            report.add('t_F,{0}'.format(n), polygon)
        report.add_polygon('t_F,1', sequence[0][1])
        if len(sequence) > 1:
            report.add_polygon('t_F,{0}'.format(sequence[-1][0]), sequence[-1][1])
        report.add('hn_type', all(polygon == sequence[0][1] for _, polygon in sequence))
    elif request.action == 'limit':
        limit = kisin.k_fargues_limit(module, n_max, search_degree)
        report.add('t_F', limit)
        report.add('semistable', kisin.k_is_semistable(module, search_degree))
        report.add_polygon('t_F', limit)
    elif request.action == 'theta':
        step = kisin.k_theta_step(module, search_degree=search_degree)
        report.add('k0', step.k0)
        report.add('a', step.stable_rank)
        report.add('min_quotient_ranks', step.ranks)
        report.add('theta', step.theta if step.theta is not None else '0')
        report.add('witness', _format_matrix(step.witness))
    else:
        decomposition = kisin.k_hn_decompose(module, search_degree=search_degree)
        report.add('module', decomposition.module)
        _record_flag(report, decomposition.flag)
        report.add('theta_steps', decomposition.theta_steps)
        report.add('step_bound', decomposition.step_budget)
        report.add('witness', _format_matrix(decomposition.witness))


RUNNERS = {
    'types': _run_types,
    'pos': _run_pos,
    'hn': _run_hn,
    'newton': _run_newton,
    'mazur': _run_mazur,
    'xmu': _run_xmu,
    'phicris': _run_phicris,
    'wa': _run_wa,
    'abelian': _run_abelian,
    'kisin': _run_kisin,
}


def run(request):
    title = request.command if request.action is None else '{0} {1}'.format(request.command, request.action)
    report = Report('{0}: {1}'.format(title, request.source))
    RUNNERS[request.command](request, report)
    if request.options['search_degree'] is not None:
        report.certificate.setdefault('search_degree', request.options['search_degree'])
    return report


#
# Output formats.
#

def _emit_text(report):
    lines = ['# {0}'.format(report.title)]
    lines.extend('{0}: {1}'.format(label, _format(value)) for label, value in report.lines)
    for key in sorted(report.certificate):
        lines.append('certificate.{0}: {1}'.format(key, _format(report.certificate[key])))
    return '\n'.join(lines) + '\n'


def _emit_csv(report):
    stream = io.StringIO()
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(['x', 'y', 'series'])
    for series, polygon in report.polygons:
        for x, y in polygon.breakpoints:
            writer.writerow([str(x), str(y), series])
    return stream.getvalue()


def _emit_svg(report, width=480, height=320, margin=40):
    points = [point for _, polygon in report.polygons for point in polygon.breakpoints] or [(0, 0), (1, 0)]
    xs = [float(x) for x, _ in points]
    ys = [float(y) for _, y in points]
    x_low, x_high = min(xs), max(xs) if max(xs) > min(xs) else min(xs) + 1
    y_low, y_high = min(ys), max(ys) if max(ys) > min(ys) else min(ys) + 1

    def project(x, y):
        px = margin + (float(x) - x_low) / (x_high - x_low) * (width - 2 * margin)
        py = height - margin - (float(y) - y_low) / (y_high - y_low) * (height - 2 * margin)
        return '{0:.2f},{1:.2f}'.format(px, py)

    parts = ['<?xml version="1.0" encoding="UTF-8"?>',
             '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{0}" height="{1}">'.format(width, height),
             '<title>{0}</title>'.format(report.title.replace('&', '&amp;').replace('<', '&lt;')),
             '<rect x="0" y="0" width="{0}" height="{1}" fill="white"/>'.format(width, height)]
    for index, (series, polygon) in enumerate(report.polygons):
        colour = SVG_COLOURS[index % len(SVG_COLOURS)]
        path = ' '.join(project(x, y) for x, y in polygon.breakpoints)
        parts.append('<polyline fill="none" stroke="{0}" stroke-width="2" points="{1}"/>'.format(colour, path))
        parts.append('<text x="{0}" y="{1}" font-size="12" fill="{2}">{3}</text>'.format(
                width - margin - 80, margin + 14 * index, colour, series.replace('<', '&lt;')))
    parts.append('</svg>')
    return '\n'.join(parts) + '\n'


def emit(report, output_format='text'):
    if output_format == 'csv':
        return _emit_csv(report)
    if output_format == 'svg':
        return _emit_svg(report)
    return _emit_text(report)


#
# Entry point.
#

def warning_format(message, category, filename, lineno, file=None, line=None):
    return '{0}: {1}\n'.format(category.__name__, message)


def _build_parser():
    __description__ = \
    """Slope filtrations of Kisin modules, lattices and isocrystals.

    Every command reads JSON documents with the keys 'ring', 'eisenstein' (Kisin modules only), 'object' and
    'options'. For example...

    slopeforge hn module.json --format csv
    slopeforge kisin decompose module.json"""

    parser = argparse.ArgumentParser(prog='slopeforge', description=__description__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument('command', choices=sorted(COMMAND_KINDS), help='The operation to run.')
    parser.add_argument('arguments', nargs='+', metavar='argument',
                        help='For "kisin" the action ({0}) followed by the input documents, '
                             'otherwise the input documents.'.format(', '.join(KISIN_ACTIONS)))
    parser.add_argument('--format', dest='output_format', choices=OUTPUT_FORMATS, default='text',
                        help="Report format - default is 'text'.")
    parser.add_argument('--nmax', type=int, dest='n_max',
                        help='Largest n for the polygons t_F,n - default is {0}.'.format(kisin.DEFAULT_N_MAX))
    parser.add_argument('--search-degree', type=int, dest='search_degree',
                        help='Bound on the u-degree of searched lines - default is the full u-precision.')
    parser.add_argument('--bound', type=int,
                        help='Lattice window bound - default is {0}.'.format(isocrystal.DEFAULT_LATTICE_BOUND))
    parser.add_argument('--batch', action='store_true',
                        help='Accept several input documents and report on each in input order.')
    parser.add_argument('-w', '--ignore_warnings', action='store_true',
                        help='If specified then warnings about bounded searches and truncations are not output.')
    return parser


def _load(filename):
    with open(filename, 'r') as handle:
        try:
            return json.load(handle)
        except ValueError as exc:
            raise SchemaError(filename, 'a JSON document ({0})'.format(exc))


def _process(filename, args, action, flags, out, err):
    try:
        document = _load(filename)
        request = parse(document, args.command, action, flags, filename)
        out.write(emit(run(request), args.output_format))
        return EXIT_SUCCESS
    except KernelError as exc:
        print('ERROR: {0}'.format(exc), file=err)
        for key in sorted(exc.certificate):
            print('certificate.{0}: {1}'.format(key, _format(exc.certificate[key])), file=err)
        return EXIT_KERNEL_ERROR
    except (SlopeforgeError, ValueError, IOError, OSError) as exc:
        print('ERROR: {0}'.format(exc), file=err)
        return EXIT_INPUT_ERROR


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    out, err = sys.stdout, sys.stderr

    action = None
    filenames = list(args.arguments)
    if args.command == 'kisin':
        action = filenames.pop(0)
        if action not in KISIN_ACTIONS:
            print('ERROR: unknown kisin action "{0}", expected one of {1}'.format(
                    action, ', '.join(KISIN_ACTIONS)), file=err)
            return EXIT_INPUT_ERROR
    if not filenames:
        print('ERROR: no input document given', file=err)
        return EXIT_INPUT_ERROR
    if len(filenames) > 1 and not args.batch:
        print('ERROR: several input documents need --batch', file=err)
        return EXIT_INPUT_ERROR

    flags = {'n_max': args.n_max, 'search_degree': args.search_degree, 'bound': args.bound}
    previous_format = warnings.formatwarning
    warnings.formatwarning = warning_format
    try:
        with warnings.catch_warnings():
            # Bounded searches and truncations correspond to "warnings.warn(..., RuntimeWarning)".
            if args.ignore_warnings:
                warnings.simplefilter('ignore', RuntimeWarning)
            exit_code = EXIT_SUCCESS
            for filename in filenames:
                exit_code = max(exit_code, _process(filename, args, action, flags, out, err))
    finally:
        warnings.formatwarning = previous_format
    return exit_code


if __name__ == '__main__':
    sys.exit(main())
