import math

import mpmath
import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate, stats

from mmkde.specfun import (PoleError, de_quad, f_density, f_logpdf, log_beta, log_gamma,
                           log_gamma_ratio, quad_positive)

mpmath.mp.dps = 40


@pytest.mark.parametrize("z", [0.3, 1.0, 2.5, 7.0, 1 + 1j, 0.5 - 3j, -2.5 + 0.1j, 40 + 25j, -0.5])
def test_log_gamma_matches_mpmath(z):
    expected = complex(mpmath.loggamma(mpmath.mpc(z)))
    assert_allclose(log_gamma(z), expected, rtol=1e-13, atol=1e-13)


def test_log_gamma_one_plus_i_exponentiates_to_gamma():
    # the commonly quoted value 0.498 - 0.155i is Gamma(1+i), not its logarithm
    assert_allclose(np.exp(log_gamma(1 + 1j)), 0.49801566811835604 - 0.15494982830181069j, rtol=1e-12)
    assert_allclose(log_gamma(1 + 1j), -0.6509231993018563 - 0.3016403204675331j, rtol=1e-13)


def test_log_gamma_half_and_integer():
    assert_allclose(log_gamma(0.5).real, 0.5 * math.log(math.pi), rtol=1e-15)
    assert log_gamma(1.0) == 0


@pytest.mark.parametrize("z", [0, -1, -7, -3 + 1e-15])
def test_log_gamma_poles(z):
    with pytest.raises(PoleError):
        log_gamma(z)


def test_log_gamma_non_finite():
    with pytest.raises(ValueError):
        log_gamma(complex(math.nan, 0))


def test_log_beta_oracle():
    assert_allclose(log_beta(2.5, 3.5), float(mpmath.log(mpmath.beta(2.5, 3.5))), rtol=1e-14)
    with pytest.raises(ValueError):
        log_beta(0.0, 1.0)


@pytest.mark.parametrize("a,s", [(0.3, 0.7), (5.0, -2.5), (50.0, 3.0 + 2j), (1e4, -7.5),
                                 (1e6, 0.5), (40.0, 12.0 - 3j), (2e8, 1.0)])
def test_log_gamma_ratio_against_mpmath(a, s):
    mpmath.mp.dps = 50
    expected = complex(mpmath.loggamma(a + mpmath.mpc(s)) - mpmath.loggamma(a))
    got = complex(log_gamma_ratio(a, s))
    assert abs(got - expected) <= 1e-13 * max(1.0, abs(expected))


def test_log_gamma_ratio_vectorised():
    a = np.array([0.5, 3.0, 100.0])
    out = log_gamma_ratio(a, 1.0)
    assert_allclose(out, np.log(a), rtol=1e-14)  # Gamma(a+1) = a Gamma(a)


def test_f_density_examples():
    assert_allclose(f_density(1.0, 2, 2), 0.25, rtol=1e-15)
    x = np.linspace(0.01, 10, 50)
    for d1, d2 in [(3, 5), (0.7, 9), (40, 2.5)]:
        assert_allclose(f_density(x, d1, d2), stats.f(d1, d2).pdf(x), rtol=1e-12)


def test_f_density_at_zero():
    assert f_density(0.0, 4, 3) == 0.0
    assert math.isinf(f_logpdf(0.0, 1, 3))
    assert_allclose(f_density(0.0, 2, 3), 1.0, rtol=1e-15)  # d1 = 2: density d1/d2 * ... -> 1
    with pytest.raises(ValueError):
        f_density(-1.0, 2, 2)
    with pytest.raises(ValueError):
        f_density(1.0, 0, 2)


def test_f_density_huge_shapes_no_overflow():
    # F(2a, 2b) with a, b ~ 1e8 concentrates near 1 without overflow
    v = f_density(np.array([0.9999, 1.0, 1.0001]), 2e8, 2e8)
    assert np.all(np.isfinite(v)) and v[1] > v[0]


def test_f_density_integrates_to_one():
    assert_allclose(quad_positive(lambda x: f_density(x, 3, 5)), 1.0, atol=1e-10)


def test_de_quad_gaussian_and_independent_oracle():
    assert_allclose(de_quad(lambda t: np.exp(-t * t)), math.sqrt(math.pi), rtol=1e-13)
    g = lambda x: x ** 1.5 * np.exp(-x)
    ref = integrate.quad(g, 0, np.inf, epsabs=0, epsrel=1e-13)[0]
    assert_allclose(quad_positive(g), ref, rtol=1e-11)
    assert_allclose(ref, 0.75 * math.sqrt(math.pi), rtol=1e-12)


def test_quad_positive_sharp_peak():
    d = stats.gamma(400.0, scale=1 / 400.0)
    assert_allclose(quad_positive(d.pdf, center=1.0, width=0.05), 1.0, atol=1e-12)


@pytest.mark.parametrize("a,b", [(0.3, 45.0), (206.0, 3.7e7), (50.0, 80.0), (1e6, 2.5e6),
                                 (3.7e7, 12.0), (5.0, 7.0)])
def test_log_beta_large_arguments(a, b):
    with mpmath.workdps(40):
        ref = float(mpmath.log(mpmath.beta(a, b)))
    assert_allclose(log_beta(a, b), ref, rtol=1e-15, atol=1e-13)
    assert_allclose(log_beta(np.array([a, b]), np.array([b, a])), [ref, ref], rtol=1e-15, atol=1e-13)
