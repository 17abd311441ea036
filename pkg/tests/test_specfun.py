"""Tests for gamma, incomplete gamma and Mittag-Leffler evaluation.

Reference values were frozen from independent oracles: mpmath gamma /
gammainc at 30 significant digits, and a compensated extended-precision
power series for the Mittag-Leffler function whose gamma arguments are
formed in working precision (so that heavy cancellation cannot leak
double-rounding noise into the reference).
"""

import cmath
import math

import numpy as np
import pytest
from scipy.special import wofz

from frachill.errors import DomainError, NotDiagonalizableError, PoleError
from frachill.specfun import (
    gamma,
    ml_matrix,
    mittag_leffler,
    reciprocal_gamma,
    upper_incomplete_gamma,
    upper_incomplete_gamma_vec,
)

SQRT_PI = 1.7724538509055160


def test_gamma_known_values():
    assert gamma(1.0) == pytest.approx(1.0, rel=1e-13)
    assert gamma(0.5) == pytest.approx(SQRT_PI, rel=1e-13)
    assert gamma(1.5) == pytest.approx(0.5 * SQRT_PI, rel=1e-13)
    assert gamma(5.0) == pytest.approx(24.0, rel=1e-13)
    assert gamma(7.7) == pytest.approx(2769.8303623273137, rel=1e-12)


def test_gamma_negative_non_integer():
    assert gamma(-2.3) == pytest.approx(-1.4471073942559173, rel=1e-12)


def test_gamma_recurrence_sweep():
    # Gamma(x+1) = x Gamma(x) across the supported range
    rng = np.random.default_rng(7)
    for x in rng.uniform(0.05, 49.0, size=200):
        assert gamma(x + 1.0) == pytest.approx(x * gamma(x), rel=1e-11)


def test_gamma_pole_rejected():
    for x in (0.0, -1.0, -7.0):
        with pytest.raises(PoleError):
            gamma(x)


def test_reciprocal_gamma_zero_at_poles():
    assert reciprocal_gamma(0.0) == 0.0
    assert reciprocal_gamma(-3.0) == 0.0
    assert reciprocal_gamma(2.5) == pytest.approx(1.0 / gamma(2.5), rel=1e-13)


def test_upper_incomplete_gamma_known_values():
    assert upper_incomplete_gamma(0.5, 0.0) == pytest.approx(SQRT_PI, rel=1e-12)
    assert upper_incomplete_gamma(1.0, 2.0) == pytest.approx(
        math.exp(-2.0), rel=1e-12
    )
    assert upper_incomplete_gamma(0.5, 1.0) == pytest.approx(
        0.27880558528066198, rel=1e-11
    )
    assert upper_incomplete_gamma(1.3, 4.2) == pytest.approx(
        0.024508113326821152, rel=1e-11
    )


def test_upper_incomplete_gamma_complex_arguments():
    got = upper_incomplete_gamma(0.7, 2j)
    want = -0.54899362878195504 - 0.54865957595853374j
    assert abs(got - want) <= 1e-10 * abs(want)
    got = upper_incomplete_gamma(0.5, 3 - 4j)
    want = -0.0063920760517665408 - 0.019956068593141613j
    assert abs(got - want) <= 1e-10


def test_upper_incomplete_gamma_vectorized_matches_scalar():
    rng = np.random.default_rng(11)
    x = rng.uniform(0.0, 20.0, size=64) + 1j * rng.uniform(-20.0, 20.0, size=64)
    for a in (0.3, 0.5, 1.0, 1.9):
        vec = upper_incomplete_gamma_vec(a, x)
        ref = np.array([upper_incomplete_gamma(a, xi) for xi in x])
        assert np.max(np.abs(vec - ref)) <= 1e-13 * max(1.0, np.max(np.abs(ref)))


def test_ml_at_zero():
    assert mittag_leffler(0.5, 1.0, 0.0) == pytest.approx(1.0, rel=1e-14)
    assert mittag_leffler(0.5, 0.5, 0.0) == pytest.approx(
        1.0 / SQRT_PI, rel=1e-13
    )


def test_ml_reduces_to_exp():
    rng = np.random.default_rng(3)
    pts = rng.uniform(-20.0, 20.0, size=(40, 2))
    for re, im in pts:
        z = complex(re, im * 0.6)
        want = cmath.exp(z)
        got = mittag_leffler(1.0, 1.0, z)
        assert abs(got - want) <= 1e-9 * max(1.0, abs(want))


# frozen extended-precision series oracle, one point per evaluation regime
ML_ORACLE = {
    (0.5, 1.0, -3.0 + 0.0j): 0.17900115118138995 + 0.0j,
    (0.3, 1.0, 3.0j): 0.051918367383206693 + 0.25171686755542566j,
    (0.5, 0.5, 1.5 + 0.0j): 28.545018967941857 + 0.0j,
    (0.7, 1.7, 7.0j): 0.0067701991052598402 + 0.14364789639387852j,
    (0.5, 1.0, 7.0j): 5.2428856633634639e-22 + 0.081447508065002968j,
    (0.3, 0.3, 4.9j): -0.0094306001217677809 + 0.0023669689950999277j,
    (0.95, 2.5, -8.0 + 2.0j): 0.12326420965431093 + 0.028066001822958964j,
    (0.5, 1.0, -30.0 + 0.0j): 0.018795888861416751 + 0.0j,
    (1.0, 3.5, -13.0 + 0.0j): 0.051456933884291955 + 0.0j,
    (0.7, 1.0, 11.0 + 0.0j): 31997312058434.254 + 0.0j,
}


@pytest.mark.parametrize("key", sorted(ML_ORACLE, key=repr))
def test_ml_against_frozen_oracle(key):
    alpha, beta, z = key
    want = ML_ORACLE[key]
    got = mittag_leffler(alpha, beta, z)
    assert abs(got - want) <= 1e-9 * max(1.0, abs(want))


def test_ml_half_alpha_matches_faddeeva():
    # E_{1/2,1}(z) = exp(z^2) erfc(-z) = wofz(-iz)
    rng = np.random.default_rng(19)
    pts = rng.uniform(-2.5, 2.5, size=(50, 2))
    for re, im in pts:
        z = complex(re, im)
        want = wofz(-1j * z)
        got = mittag_leffler(0.5, 1.0, z)
        assert abs(got - want) <= 1e-9 * max(1.0, abs(want))


def test_ml_conjugate_symmetry():
    rng = np.random.default_rng(23)
    for _ in range(60):
        alpha = rng.uniform(0.25, 1.0)
        beta = rng.uniform(0.3, 3.0)
        z = complex(rng.uniform(-8, 8), rng.uniform(-8, 8))
        a = mittag_leffler(alpha, beta, z)
        b = mittag_leffler(alpha, beta, z.conjugate())
        assert abs(b - a.conjugate()) <= 1e-12 * max(1.0, abs(a))


def test_ml_recurrence_in_beta():
    # E_{a,b}(z) = z E_{a,a+b}(z) + 1/Gamma(b)
    rng = np.random.default_rng(31)
    checked = 0
    while checked < 100:
        alpha = rng.uniform(0.3, 1.0)
        beta = rng.uniform(0.2, 2.5)
        if alpha + beta > 5.0:
            continue
        z = complex(rng.uniform(-6, 6), rng.uniform(-6, 6))
        lhs = mittag_leffler(alpha, beta, z)
        rhs = z * mittag_leffler(alpha, alpha + beta, z) + reciprocal_gamma(beta)
        assert abs(lhs - rhs) <= 1e-8 * max(1.0, abs(lhs))
        checked += 1


def test_ml_decreasing_on_negative_axis():
    ts = np.arange(0.0, 10.0 + 1e-12, 0.1)
    for alpha in (0.3, 0.5, 0.8):
        vals = [mittag_leffler(alpha, alpha, -t).real for t in ts]
        assert all(b < a for a, b in zip(vals, vals[1:]))
        assert all(v > 0.0 for v in vals)


def test_ml_domain_errors():
    with pytest.raises(DomainError):
        mittag_leffler(0.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        mittag_leffler(1.2, 1.0, 1.0)
    with pytest.raises(DomainError):
        mittag_leffler(0.5, 6.0, 1.0)
    with pytest.raises(DomainError):
        mittag_leffler(0.5, 1.0, 2e6)


def test_ml_matrix_scalar_consistency():
    a = np.array([[-1.0]])
    got = ml_matrix(0.5, 1.0, a, 4.0)
    want = mittag_leffler(0.5, 1.0, -4.0).real
    assert got.shape == (1, 1)
    assert got[0, 0] == pytest.approx(want, rel=1e-12)


def test_ml_matrix_rotation_at_alpha_one():
    a = np.array([[0.0, 1.0], [-1.0, 0.0]])
    got = ml_matrix(1.0, 1.0, a, math.pi)
    want = np.array([[-1.0, 0.0], [0.0, -1.0]])
    assert np.max(np.abs(got - want)) <= 1e-12


def test_ml_matrix_against_series():
    # independent route: matrix power series, valid for small norm
    rng = np.random.default_rng(5)
    for _ in range(5):
        a = rng.uniform(-0.6, 0.6, size=(3, 3))
        alpha, beta = 0.6, 1.0
        got = ml_matrix(alpha, beta, a, 1.0)
        acc = np.zeros((3, 3))
        p = np.eye(3)
        for k in range(60):
            acc = acc + p * reciprocal_gamma(alpha * k + beta)
            p = p @ a
        assert np.max(np.abs(got - acc)) <= 1e-10


def test_ml_matrix_rejects_defective():
    jordan = np.array([[1.0, 1.0], [0.0, 1.0]])
    with pytest.raises(NotDiagonalizableError):
        ml_matrix(0.5, 1.0, jordan, 1.0)
