import json
import os

import pytest

import slopeforge
from slopeforge import cli


EXAMPLES = os.path.join(os.path.dirname(os.path.abspath(slopeforge.__file__)), 'Examples')


def example(name):
    return os.path.join(EXAMPLES, name)


@pytest.fixture
def write(tmp_path):
    def _write(document, name='document.json'):
        path = tmp_path / name
        path.write_text(json.dumps(document) if not isinstance(document, str) else document)
        return str(path)
    return _write


def _lines(text):
    return text.splitlines()


def test_types(capsys):
    assert cli.main(['types', example('types.json')]) == cli.EXIT_SUCCESS
    lines = _lines(capsys.readouterr().out)
    assert lines[0].startswith('# types: ')
    assert 'type[1]: (1/2, 1/2)' in lines
    assert 'degree[2]: 1' in lines
    assert 'involution[2]: (1, -2)' in lines
    assert 'dominance[0<=1]: false' in lines


def test_pos(capsys):
    assert cli.main(['pos', example('lattice_pair.json')]) == cli.EXIT_SUCCESS
    lines = _lines(capsys.readouterr().out)
    assert 'pos: (1, -1)' in lines
    assert 'certificate.context: p-adic' in lines


def test_hn_of_p_torsion_module(capsys):
    assert cli.main(['hn', '-w', example('phimodule.json')]) == cli.EXIT_SUCCESS
    lines = _lines(capsys.readouterr().out)
    assert 'rank: 2' in lines
    assert 'degree: -5' in lines
    assert 't_F: (-5/2, -5/2)' in lines
    assert 'ranks: [2]' in lines
    assert 'certificate.u_precision: 8' in lines


def test_hn_of_torsion_kisin_module(capsys, write):
    document = {'ring': {'kind': 'zpn_series', 'p': 2, 'n': 2},
                'object': {'kind': 'phimodule', 'payload': {'matrix': [['1', '0'], ['0', 'u^3']]}}}
    assert cli.main(['hn', '-w', write(document)]) == cli.EXIT_SUCCESS
    lines = _lines(capsys.readouterr().out)
    assert 'degree: -6' in lines
    assert 'slopes: [0, -3]' in lines
    assert 'ranks: [2, 4]' in lines


def test_hn_rejects_rational_ring(capsys, write):
    document = {'ring': {'kind': 'rational_poly', 'p': 2},
                'object': {'kind': 'phimodule', 'payload': {'matrix': [['1']]}}}
    assert cli.main(['hn', write(document)]) == cli.EXIT_INPUT_ERROR
    assert 'ring.kind' in capsys.readouterr().err


def test_isocrystal_commands(capsys):
    assert cli.main(['newton', example('isocrystal.json')]) == cli.EXIT_SUCCESS
    lines = _lines(capsys.readouterr().out)
    assert 'newton: (1, 0)' in lines
    assert 'kottwitz: 1' in lines

    assert cli.main(['mazur', example('isocrystal.json')]) == cli.EXIT_SUCCESS
    lines = _lines(capsys.readouterr().out)
    assert 'lattice_hodge: (0, -1)' in lines
    assert 'mazur: true' in lines

    assert cli.main(['xmu', example('isocrystal.json')]) == cli.EXIT_SUCCESS
    lines = _lines(capsys.readouterr().out)
    assert 'nonempty: true' in lines
    assert 'criterion: true' in lines
    assert 'mu_ordinary: true' in lines
    assert 'certificate.bound: 2' in lines

    assert cli.main(['phicris', example('isocrystal.json')]) == cli.EXIT_SUCCESS
    assert 'equals_frobenius: true' in _lines(capsys.readouterr().out)


def test_flags_override_document_options(capsys):
    assert cli.main(['xmu', '--bound', '1', example('isocrystal.json')]) == cli.EXIT_SUCCESS
    assert 'certificate.bound: 1' in _lines(capsys.readouterr().out)


def test_weak_admissibility(capsys):
    assert cli.main(['wa', example('filtered.json')]) == cli.EXIT_SUCCESS
    lines = _lines(capsys.readouterr().out)
    assert 'deg: 0' in lines
    assert 'weakly_admissible: true' in lines
    assert 't_F: (0, -1)' in lines
    assert 'certificate.exhaustive: true' in lines


def test_abelian(capsys):
    assert cli.main(['abelian', example('abelian.json')]) == cli.EXIT_SUCCESS
    lines = _lines(capsys.readouterr().out)
    assert 't_H: (1, 0)' in lines
    assert 't_N: (1/2, 1/2)' in lines
    assert 't_F: (-1/2, -1/2)' in lines
    assert 'ordinary: true' in lines


def test_kisin_actions(capsys):
    assert cli.main(['kisin', 'polygon', '-w', example('kisin_theta.json')]) == cli.EXIT_SUCCESS
    lines = _lines(capsys.readouterr().out)
    assert 't_H: (0, -4)' in lines
    assert 'hn_type: false' in lines
    assert 'certificate.n_max: 2' in lines

    assert cli.main(['kisin', 'decompose', '-w', example('kisin_theta.json')]) == cli.EXIT_SUCCESS
    lines = _lines(capsys.readouterr().out)
    assert 'theta_steps: 2' in lines
    assert 'step_bound: 3' in lines


def test_kisin_unknown_action(capsys):
    assert cli.main(['kisin', 'spiral', example('kisin_theta.json')]) == cli.EXIT_INPUT_ERROR
    assert 'spiral' in capsys.readouterr().err


def test_kernel_errors_report_certificate(capsys, write):
    chain = [['1', '1', '0'], ['0', '1', '1'], ['0', '0', '1']]
    document = {'ring': {'kind': 'zpn_series', 'p': 2}, 'eisenstein': [-2, 1],
                'object': {'kind': 'kisin', 'payload': {'matrix': chain}}}
    assert cli.main(['kisin', 'theta', write(document)]) == cli.EXIT_KERNEL_ERROR
    err = capsys.readouterr().err
    assert err.startswith('ERROR: ')
    assert 'certificate.rank: 3' in err


def test_schema_errors(capsys, write):
    document = {'ring': {'kind': 'rational_poly', 'p': 4},
                'object': {'kind': 'isocrystal', 'payload': {'b': [['1']]}}}
    assert cli.main(['newton', write(document)]) == cli.EXIT_INPUT_ERROR
    assert 'ring.p: expected a prime' in capsys.readouterr().err

    document = {'ring': {'kind': 'rational_poly', 'p': 2},
                'object': {'kind': 'abelian', 'payload': {'b': [['1']]}}}
    assert cli.main(['newton', write(document)]) == cli.EXIT_INPUT_ERROR
    assert 'object.kind' in capsys.readouterr().err

    document = {'ring': {'kind': 'fp_series', 'p': 2},
                'object': {'kind': 'phimodule', 'payload': {'matrix': [['u + *']]}}}
    assert cli.main(['hn', write(document)]) == cli.EXIT_INPUT_ERROR
    assert 'object.payload.matrix[0][0]' in capsys.readouterr().err

    assert cli.main(['newton', write('{"ring": ', 'broken.json')]) == cli.EXIT_INPUT_ERROR
    assert 'a JSON document' in capsys.readouterr().err

    assert cli.main(['newton', os.path.join(EXAMPLES, 'missing.json')]) == cli.EXIT_INPUT_ERROR


def test_parse_resolves_options():
    document = {'ring': {'kind': 'zpn_series', 'p': 2}, 'eisenstein': 'u - 2',
                'object': {'kind': 'kisin', 'payload': {'matrix': [['u - 2']]}},
                'options': {'n_max': 4}}
    request = cli.parse(document, 'kisin', 'limit', {'n_max': None, 'search_degree': 3})
    assert request.options['n_max'] == 4
    assert request.options['search_degree'] == 3
    assert request.eisenstein.degree == 1
    request = cli.parse(document, 'kisin', 'limit', {'n_max': 1})
    assert request.options['n_max'] == 1
    with pytest.raises(cli.SchemaError):
        cli.parse(document, 'kisin', 'sideways')


def test_csv_and_svg_reports(capsys):
    assert cli.main(['newton', '--format', 'csv', example('isocrystal.json')]) == cli.EXIT_SUCCESS
    assert _lines(capsys.readouterr().out) == ['x,y,series', '0,0,t_N', '1,1,t_N', '2,1,t_N']

    assert cli.main(['mazur', '--format', 'svg', example('isocrystal.json')]) == cli.EXIT_SUCCESS
    out = capsys.readouterr().out
    assert out.startswith('<?xml')
    assert out.count('<polyline') == 2
    assert out.rstrip().endswith('</svg>')


def test_batch(capsys):
    documents = [example('isocrystal.json'), example('isocrystal.json')]
    assert cli.main(['newton'] + documents) == cli.EXIT_INPUT_ERROR
    assert 'batch' in capsys.readouterr().err
    assert cli.main(['newton', '--batch'] + documents) == cli.EXIT_SUCCESS
    assert capsys.readouterr().out.count('# newton: ') == 2


def test_unknown_command():
    with pytest.raises(SystemExit):
        cli.main(['spiral', example('types.json')])


def test_install_examples(tmp_path):
    target = slopeforge.install_examples(str(tmp_path / 'examples'))
    assert sorted(os.listdir(target)) == sorted(os.listdir(EXAMPLES))
