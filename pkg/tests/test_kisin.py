from fractions import Fraction
import random

import pytest

from slopeforge import arith
from slopeforge import kisin
from slopeforge import phimod
from slopeforge.exceptions import DomainMismatch, KernelError, NotFullRank, SearchBudgetExceeded
from slopeforge.typealgebra import PolygonFunction, TypeVector, polygon_le, polygon_of


@pytest.fixture
def eisenstein():
    return kisin.EisensteinPoly(2, 'u - 2')


@pytest.fixture
def hodge_line(eisenstein):
    return kisin.KisinModule(2, eisenstein, [['u - 2', '0'], ['0', '1']])


@pytest.fixture
def theta_demo(eisenstein):
    # Not of Harder-Narasimhan type: t_{F,2} lies strictly below t_{F,1}.
    return kisin.KisinModule(2, eisenstein, [['u - 2', '0'], ['2', '(u - 2)^3']])


@pytest.fixture
def split(eisenstein):
    return kisin.KisinModule(2, eisenstein, [['1', '0'], ['0', '(u - 2)^2']])


def test_eisenstein_validation():
    assert kisin.EisensteinPoly(2, 'u^2 - 2').degree == 2
    assert kisin.EisensteinPoly(3, [3, 0, 1]) == kisin.EisensteinPoly(3, 'u^2 + 3')
    for text in ('u - 4', 'u - 1', '2*u - 2', 'u^2 + u - 2'):
        with pytest.raises(DomainMismatch):
            kisin.EisensteinPoly(2, text)


def test_module_validation(eisenstein):
    with pytest.raises(NotFullRank):
        kisin.KisinModule(2, eisenstein, [['1', '1'], ['1', '1']])
    with pytest.raises(DomainMismatch):
        kisin.KisinModule(2, eisenstein, [['u']])
    with pytest.raises(DomainMismatch):
        kisin.KisinModule(2, eisenstein, [['1/2']])
    with pytest.raises(DomainMismatch):
        kisin.KisinModule(3, eisenstein, [['1']])


def test_hodge_types(eisenstein, hodge_line):
    assert hodge_line.hodge_exponent == 1
    assert kisin.k_hodge_type(hodge_line) == (0, -1)
    assert kisin.k_crystal_hodge_type(hodge_line) == (0, -1)
    assert kisin.k_degree(hodge_line) == -1
    assert kisin.k_slope(hodge_line) == Fraction(-1, 2)
    assert kisin.k_rescaled_hodge_mod_p(hodge_line) == (0, -1)
    both = kisin.KisinModule(2, eisenstein, [['(u - 2)^2', '0'], ['0', 'u - 2']])
    assert kisin.k_hodge_type(both) == (-1, -2)
    assert kisin.k_degree(both) == -3


def test_ramified_normalisation():
    module = kisin.KisinModule(2, 'u^2 - 2', [['u^2 - 2', '0'], ['0', '1']])
    assert kisin.k_hodge_type(module) == (0, -1)
    assert kisin.k_rescaled_hodge_mod_p(module) == (0, -1)
    assert kisin.k_fargues_n(module, 1) == polygon_of(TypeVector([0, -1]))


def test_twists(hodge_line):
    twisted = kisin.k_twist(hodge_line, 1)
    assert kisin.k_degree(twisted) == -3
    assert kisin.k_hodge_type(twisted) == (-1, -2)
    assert kisin.k_is_effective(twisted)
    negative = kisin.k_twist(hodge_line, -1)
    assert not kisin.k_is_effective(negative)
    assert kisin.k_hodge_type(negative) == (1, 0)
    assert kisin.k_rescaled_hodge_mod_p(negative) == (1, 0)
    with pytest.raises(DomainMismatch):
        kisin.k_reduce(negative, 1)


def test_reductions(eisenstein):
    line = kisin.KisinModule(2, eisenstein, [['u - 2']])
    assert phimod.tk_degree(kisin.k_reduce(line, 2)) == -2
    assert phimod.tk_degree(kisin.k_reduce(line, 1)) == -1
    twisted = kisin.k_reduce(kisin.k_twist(line, 1), 1)
    assert phimod.tk_degree(twisted) == -2


def test_twist_absorbed_by_matrix(eisenstein):
    # E^{-1}.diag(E, E) is the identity Frobenius.
    module = kisin.KisinModule(2, eisenstein, [['u - 2', '0'], ['0', 'u - 2']], twist=1)
    assert kisin.k_is_effective(module)
    assert kisin.k_degree(module) == 0
    assert kisin.k_hodge_type(module) == (0, 0)
    reduced = kisin.k_reduce(module, 2)
    assert reduced.twist == 0
    assert phimod.tk_degree(reduced) == 0
    assert phimod.tk_degree(kisin.k_reduce(module, 1)) == 0
    half = kisin.KisinModule(2, eisenstein, [['u - 2', '0'], ['0', '1']], twist=1)
    assert not kisin.k_is_effective(half)
    with pytest.raises(DomainMismatch):
        kisin.k_reduce(half, 1)


@pytest.mark.filterwarnings('ignore::RuntimeWarning')
def test_fargues_polygons_of_split_module(hodge_line):
    assert kisin.k_fargues_n(hodge_line, 1) == polygon_of(TypeVector([0, -1]))
    assert not kisin.k_is_semistable(hodge_line)
    assert kisin.k_mu_min(hodge_line) == -1
    assert kisin.k_is_hn_type(hodge_line, n_max=2)
    assert kisin.hodge_chain_holds(hodge_line, n_max=2)


@pytest.mark.filterwarnings('ignore::RuntimeWarning')
def test_fargues_polygons_drop_with_n(theta_demo):
    first = kisin.k_fargues_n(theta_demo, 1)
    second = kisin.k_fargues_n(theta_demo, 2)
    assert first == polygon_of(TypeVector([-1, -3]))
    assert second == PolygonFunction([(0, 0), (Fraction(1, 2), Fraction(-1, 2)), (Fraction(3, 2), Fraction(-5, 2)),
                                      (2, -4)])
    assert kisin.k_fargues_limit(theta_demo, 2) == second
    assert [n for n, _ in kisin.k_fargues_sequence(theta_demo, 2)] == [1, 2]
    assert not kisin.k_is_hn_type(theta_demo, n_max=2)
    assert kisin.hodge_chain_holds(theta_demo, n_max=2)
    assert kisin.k_mu_min(theta_demo) == -3


def test_hodge_type_of_theta_demo(theta_demo):
    assert kisin.k_hodge_type(theta_demo) == (0, -4)
    assert kisin.k_rescaled_hodge_mod_p(theta_demo) == (-1, -3)


@pytest.mark.filterwarnings('ignore::RuntimeWarning')
def test_theta_step(theta_demo, eisenstein):
    step = kisin.k_theta_step(theta_demo)
    assert step.k0 == 1
    assert step.stable_rank == 0
    expected = kisin.KisinModule(2, eisenstein, [['u - 2', '0'], ['1', '(u - 2)^3']])
    assert step.theta.exact
    assert step.theta.rows() == expected.rows()
    assert step.mprime is step.theta
    assert step.witness[0][0] == 1
    assert step.witness[1][1] == 2
    assert step.witness[0][1].is_zero() and step.witness[1][0].is_zero()
    assert kisin.verify_isogeny(theta_demo, step.theta, step.witness)


@pytest.mark.filterwarnings('ignore::RuntimeWarning')
def test_hn_decomposition(theta_demo):
    decomposition = kisin.k_hn_decompose(theta_demo)
    assert decomposition.theta_steps == 2
    assert decomposition.step_budget == 3
    assert kisin.verify_isogeny(theta_demo, decomposition.module, decomposition.witness)


@pytest.mark.filterwarnings('ignore::RuntimeWarning')
def test_isogeny_envelope(theta_demo, eisenstein):
    theta = kisin.KisinModule(2, eisenstein, [['u - 2', '0'], ['1', '(u - 2)^3']])
    witness = [['1', '0'], ['0', '2']]
    assert kisin.verify_isogeny(theta_demo, theta, witness)
    assert kisin.isogeny_constant(theta, theta_demo, witness) == 0
    for n in (1, 2):
        assert kisin.isogeny_envelope_holds(theta, theta_demo, witness, n)


def test_isogeny_checks(hodge_line):
    assert kisin.isogeny_constant(hodge_line, hodge_line, [['1', '0'], ['0', '1']]) == 0
    assert not kisin.verify_isogeny(hodge_line, hodge_line, [['0', '1'], ['1', '0']])
    with pytest.raises(DomainMismatch):
        kisin.verify_isogeny(hodge_line, kisin.k_twist(hodge_line, 1), [['1', '0'], ['0', '1']])
    with pytest.raises(DomainMismatch):
        kisin.isogeny_constant(hodge_line, hodge_line, [['1/2', '0'], ['0', '1']])


@pytest.mark.filterwarnings('ignore::RuntimeWarning')
def test_split_module_takes_one_theta_step(split):
    step = kisin.k_theta_step(split)
    assert step.stable_rank == 1
    decomposition = kisin.k_hn_decompose(split)
    assert decomposition.theta_steps == 1
    assert decomposition.flag.slopes == [0, -2]
    assert decomposition.flag.ranks == [1, 2]


@pytest.mark.filterwarnings('ignore::RuntimeWarning')
def test_semistable_line_is_its_own_decomposition(eisenstein):
    line = kisin.KisinModule(2, eisenstein, [['u - 2']])
    step = kisin.k_theta_step(line)
    assert step.stable_rank == 1
    assert step.theta is None
    decomposition = kisin.k_hn_decompose(line)
    assert decomposition.theta_steps == 1
    assert decomposition.flag.slopes == [-1]


@pytest.mark.filterwarnings('ignore::RuntimeWarning')
def test_theta_step_limits(eisenstein, hodge_line):
    chain = [['1', '1', '0'], ['0', '1', '1'], ['0', '0', '1']]
    with pytest.raises(SearchBudgetExceeded):
        kisin.k_theta_step(kisin.KisinModule(2, eisenstein, chain))
    with pytest.raises(ValueError):
        kisin.k_theta_step(hodge_line, levels=3)
    identity = [['1' if i == j else '0' for j in range(3)] for i in range(3)]
    step = kisin.k_theta_step(kisin.KisinModule(2, eisenstein, identity))
    assert step.stable_rank == 3
    assert step.theta is None


@pytest.fixture
def three_slopes(eisenstein):
    return kisin.KisinModule(2, eisenstein, [['1', '0', '0'], ['0', 'u - 2', '0'], ['0', '0', '(u - 2)^3']])


@pytest.mark.filterwarnings('ignore::RuntimeWarning')
def test_split_rank_three_polygons(three_slopes):
    assert kisin.k_fargues_n(three_slopes, 1) == polygon_of(TypeVector([0, -1, -3]))
    assert kisin.k_fargues_n(three_slopes, 4) == polygon_of(TypeVector([0, -1, -3]))
    assert not kisin.k_is_semistable(three_slopes)
    assert kisin.k_mu_min(three_slopes) == -3
    assert kisin.k_is_hn_type(three_slopes, n_max=4)


@pytest.mark.filterwarnings('ignore::RuntimeWarning')
def test_split_rank_three_decomposition(three_slopes):
    step = kisin.k_theta_step(three_slopes)
    assert step.stable_rank == 1
    assert step.theta.rank == 2
    assert step.quotient.rows() == [[arith.parse_polynomial('(u - 2)^3')]]
    decomposition = kisin.k_hn_decompose(three_slopes)
    assert decomposition.theta_steps == 2
    assert len(decomposition.flag) == 3
    assert decomposition.flag.slopes == [0, -1, -3]
    assert decomposition.flag.ranks == [1, 2, 3]
    assert decomposition.flag.certificate.params['envelope_constant'] == '0'
    assert kisin.verify_isogeny(three_slopes, decomposition.module, decomposition.witness)
    assert kisin.k_is_hn_type(decomposition.module, n_max=4)


@pytest.mark.filterwarnings('ignore::RuntimeWarning')
def test_rank_three_level_one_without_splitting(eisenstein):
    module = kisin.KisinModule(2, eisenstein, [['1', '0', '0'], ['1', 'u - 2', '0'], ['0', '1', '(u - 2)^2']])
    polygon = kisin.k_fargues_n(module, 1)
    assert polygon.evaluate(3) == -3
    assert polygon_le(polygon, polygon_of(kisin.k_rescaled_hodge_mod_p(module)))
    assert kisin.k_is_semistable(module) == (len(polygon.breakpoints) == 2)
    with pytest.raises(SearchBudgetExceeded):
        kisin.k_fargues_n(module, 2)


def _random_pair(rng, text, total):
    """
    A random module M = U.diag(E^a, E^b).L with 2 | A_21, and the module M' on (e1, 2.e2) with its inclusion.
    """
    eisenstein = kisin.EisensteinPoly(2, text)
    a = rng.randint(0, total)
    ea = '({0})^{1}'.format(text, a)
    eb = '({0})^{1}'.format(text, total - a)
    f = '({0} + {1}*u)'.format(rng.randint(0, 3), rng.randint(0, 3))
    g = '({0} + {1}*u)'.format(rng.randint(0, 3), rng.randint(0, 3))
    corner = '{0} + 2*{1}*{2}*{3}'.format(ea, f, g, eb)
    target = kisin.KisinModule(2, eisenstein, [[corner, '{0}*{1}'.format(f, eb)], ['2*{0}*{1}'.format(g, eb), eb]])
    source = kisin.KisinModule(2, eisenstein, [[corner, '2*{0}*{1}'.format(f, eb)], ['{0}*{1}'.format(g, eb), eb]])
    return target, source


RANDOM_FAMILIES = [('u - 2', 3, 12), ('u^2 - 2', 2, 8)]


@pytest.mark.filterwarnings('ignore::RuntimeWarning')
def test_fargues_polygons_along_the_hodge_chain():
    rng = random.Random(31)
    checked = 0
    for text, largest, count in RANDOM_FAMILIES:
        for _ in range(count):
            module, _ = _random_pair(rng, text, rng.randint(1, largest))
            try:
                first, second, fourth = (kisin.k_fargues_n(module, n) for n in (1, 2, 4))
            except KernelError:
                continue
            checked += 1
            mod_p = polygon_of(kisin.k_rescaled_hodge_mod_p(module))
            assert polygon_le(fourth, second)
            assert polygon_le(second, first)
            assert polygon_le(first, mod_p)
            assert polygon_le(mod_p, polygon_of(kisin.k_hodge_type(module)))
    assert checked >= 10


@pytest.mark.filterwarnings('ignore::RuntimeWarning')
def test_envelope_after_scaling_a_basis_vector():
    rng = random.Random(37)
    witness = [['1', '0'], ['0', '2']]
    checked = 0
    for text, largest, _ in RANDOM_FAMILIES:
        for _ in range(5):
            target, source = _random_pair(rng, text, rng.randint(1, largest))
            assert kisin.verify_isogeny(target, source, witness)
            assert kisin.k_degree(source) == kisin.k_degree(target)
            try:
                holds = [kisin.isogeny_envelope_holds(source, target, witness, n) for n in (1, 2, 4)]
            except KernelError:
                continue
            checked += 1
            assert all(holds)
    assert checked >= 5
