import math

import pytest

from momentdet.distributions import (QuadParams, builtin_references, gaussian, hyperbolic_secant,
                                     normalization, reference_moments, validate_reference)
from momentdet.errors import InvalidParameter, MismatchBeyondTolerance, QuadratureNotConverged
from momentdet.jacobi import JacobiSequence
from momentdet.sc import decide_sc

from oracles import double_factorial, dyck_moment


def dyck_free_sech_moment(n):
    # |E_2n| from the Euler-number recurrence sum_k C(2n, 2k) E_2k = 0
    from math import comb
    E = [1]
    for m in range(1, n + 1):
        E.append(-sum(comb(2 * m, 2 * k) * E[k] for k in range(m)))
    return abs(E[n])


def test_gaussian_moments():
    ms = reference_moments(gaussian(), 3)
    assert list(ms.even_moments) == pytest.approx([1, 1, 3, 15], rel=1e-12)


def test_sech_moments():
    assert list(reference_moments(hyperbolic_secant(), 3).even_moments) == pytest.approx(
        [1, 1, 5, 61], rel=1e-12)
    assert reference_moments(hyperbolic_secant(), 0).even_moments == (1.0,)


def test_sech_against_enumeration():
    ms = reference_moments(hyperbolic_secant(), 6)
    squares = [n * n for n in range(1, 7)]
    for n in range(7):
        assert ms[n] == pytest.approx(dyck_moment(squares, n), rel=1e-9)


def test_sech_top_moment_within_reported_error():
    ms, err = reference_moments(hyperbolic_secant(), 10, with_errors=True)
    exact = dyck_free_sech_moment(10)
    # the tail bound is nearly sharp, so allow for rounding of the double result
    assert abs(ms[10] - exact) <= err[10] + 4 * math.ulp(ms[10])


def test_sech_range_limited():
    with pytest.raises(InvalidParameter):
        reference_moments(hyperbolic_secant(), 11)


def test_normalization():
    for dist in (gaussian(), hyperbolic_secant()):
        val, err = normalization(dist)
        assert abs(val - 1) < 1e-8 and err < 1e-8


def test_quadrature_failure_reports_achieved_error():
    with pytest.raises(QuadratureNotConverged) as info:
        reference_moments(hyperbolic_secant(), 6, QuadParams(window=10.0))
    assert info.value.achieved > 1e-9


def test_validate_gaussian():
    rep = validate_reference(gaussian(), 5)
    assert rep.max_deviation < 1e-9
    assert rep.oracle == [double_factorial(2 * k - 1) for k in range(6)]


def test_validate_sech():
    assert validate_reference(hyperbolic_secant(), 4).max_deviation < 1e-7


def test_wrong_sequence_detected():
    with pytest.raises(MismatchBeyondTolerance) as info:
        validate_reference(hyperbolic_secant(), 4, JacobiSequence.power(1))
    assert info.value.index == 2
    assert info.value.oracle == 3 and info.value.reference == pytest.approx(5)


def test_qgaussian_has_no_density():
    ref = builtin_references()[-1]
    with pytest.raises(InvalidParameter):
        reference_moments(ref, 2)


@pytest.mark.parametrize("ref", builtin_references(), ids=lambda r: r.name)
def test_known_verdicts(ref):
    assert decide_sc(ref.jacobi).verdict.value == ref.known_verdict
