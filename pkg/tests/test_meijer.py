import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate, special, stats

from mmkde.meijer import (CATALOG_NAMES, HALF_PI, KernelShape, MeijerKernel, MomentError,
                          StripError, catalog_logpdf, catalog_params, kernel_cv, kernel_density,
                          kernel_mellin, kernel_mellin_sq, kernel_strip, per_obs_params)
from mmkde.specfun import quad_positive

QUARTER_PI = 0.25 * math.pi


def K(nu, gamma, xi, theta):
    return MeijerKernel(nu, gamma, KernelShape(xi, theta))


# --- types ---------------------------------------------------------------------

def test_shape_and_kernel_validation():
    with pytest.raises(ValueError):
        KernelShape(0.0, 0.1)
    with pytest.raises(ValueError):
        KernelShape(1.0, 1.6)
    with pytest.raises(ValueError):
        K(0.0, 1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        K(1.0, -1.0, 1.0, 0.0)


@pytest.mark.parametrize("args,bounds", [
    ((1, 1, 1, 0.0), (0.0, math.inf)),
    ((1, 1, 1, HALF_PI), (-math.inf, 2.0)),
    ((2, 0.5, 1, QUARTER_PI), (-7.0, 9.0)),
])
def test_kernel_strip_examples(args, bounds):
    st = kernel_strip(K(*args))
    assert_allclose((st.lower, st.upper), bounds, rtol=1e-14)
    assert st.contains(1.0)


# --- Mellin transform --------------------------------------------------------------

def test_mellin_is_exactly_one_at_one():
    for args in [(1, 1, 1, 0.0), (3.7, 0.01, 0.5, 1.2), (0.2, 2.0, 2.0, HALF_PI)]:
        assert kernel_mellin(K(*args), 1.0) == 1.0


def test_mellin_gamma_example():
    assert_allclose(kernel_mellin(K(1, 1, 1, 0.0), 2.0), 1.0, rtol=1e-15)


def test_mellin_quadrature_example():
    k = K(1, 0.3, 2, QUARTER_PI)
    ref = integrate.quad(lambda x: x ** 1.5 * kernel_density(k, x), 0, np.inf, epsrel=1e-12, limit=400)[0]
    assert_allclose(kernel_mellin(k, 2.5).real, ref, rtol=1e-6)


def test_mellin_strip_violation():
    with pytest.raises(StripError):
        kernel_mellin(K(1, 1, 1, 0.0), -0.5)
    with pytest.raises(StripError):
        kernel_mellin(K(1, 1, 1, HALF_PI), 2.0 + 1j)


@pytest.mark.parametrize("xi,theta", [(0.5, 0.0), (1, QUARTER_PI), (2, HALF_PI), (1, 0.3)])
def test_mellin_property_grid(xi, theta):
    k = K(1.3, 0.4, xi, theta)
    st = kernel_strip(k)
    for z in (0.5, 1.0, 1.5, 2.0, 2 + 3j):
        if not st.contains(z.real if isinstance(z, complex) else z):
            continue
        re = quad_positive(lambda x: (x ** (z - 1) * kernel_density(k, x)).real, 1.3, 1.0)
        im = quad_positive(lambda x: (x ** (z - 1) * kernel_density(k, x)).imag, 1.3, 1.0)
        assert_allclose(kernel_mellin(k, z), complex(re, im), rtol=1e-6)


# --- density ----------------------------------------------------------------------

def test_density_exponential_example():
    assert_allclose(kernel_density(K(1, 1, 1, 0.0), 0.5), math.exp(-0.5), rtol=1e-15)


def test_density_inverse_gamma_example():
    a = 6.25
    expected = math.exp(a * math.log(a) - a - special.gammaln(a))
    assert_allclose(kernel_density(K(1, 0.4, 1, HALF_PI), 1.0), expected, rtol=1e-13)


def test_density_matches_power_of_f_variable():
    # nu X^xi with X ~ F(2a, 2b), through scipy's F density (independent path)
    nu, g, xi, th = 1.7, 0.45, 0.7, 0.6
    a = xi ** 2 / (g * math.cos(th)) ** 2
    b = xi ** 2 / (g * math.sin(th)) ** 2
    x = np.geomspace(0.05, 20, 40)
    u = (x / nu) ** (1 / xi)
    expected = stats.f(2 * a, 2 * b).pdf(u) * u / (xi * x)
    assert_allclose(kernel_density(K(nu, g, xi, th), x), expected, rtol=1e-10)


def test_density_at_zero_by_head_exponent():
    # head exponent xi / (gamma^2 cos^2 theta) - 1
    assert kernel_density(K(1, 0.5, 1, 0.0), 0.0) == 0.0  # 4 - 1 > 0
    assert math.isinf(kernel_density(K(1, 2.0, 1, 0.0), 0.0))  # 1/4 - 1 < 0
    assert_allclose(kernel_density(K(1, 1.0, 1, 0.0), 0.0), 1.0)  # Exp(1) at 0
    assert kernel_density(K(1, 2.0, 1, HALF_PI), 0.0) == 0.0
    with pytest.raises(ValueError):
        kernel_density(K(1, 1, 1, 0.0), -1.0)


def test_density_normalisation_random_draws(rng):
    for _ in range(20):
        nu = math.exp(rng.uniform(-1, 1))
        g = rng.uniform(0.05, 0.9)
        xi = rng.choice([0.5, 1.0, 2.0])
        th = rng.choice([0.0, rng.uniform(0, HALF_PI), HALF_PI])
        k = K(nu, g, xi, th)
        assert_allclose(quad_positive(lambda x: kernel_density(k, x), nu, max(g * xi, 0.05) * 3), 1.0,
                        atol=1e-6)


def test_density_huge_shape_parameters():
    k = K(1.0, 1e-4, 1.0, QUARTER_PI)  # Gamma arguments ~ 1e8
    v = kernel_density(k, np.array([0.999, 1.0, 1.001]))
    assert np.all(np.isfinite(v))
    assert_allclose(quad_positive(lambda x: kernel_density(k, x), 1.0, 1e-3), 1.0, atol=1e-6)


def test_inverse_closure():
    x = np.geomspace(0.05, 30, 50)
    for nu, g, xi, th in [(1.5, 0.3, 0.5, 0.2), (0.7, 0.8, 2.0, 0.0), (2.0, 0.4, 1.0, HALF_PI)]:
        left = kernel_density(K(nu, g, xi, th), x)
        right = x ** -2 * kernel_density(K(1 / nu, g, xi, HALF_PI - th), 1 / x)
        assert_allclose(left, right, rtol=1e-8)


# --- coefficient of variation ----------------------------------------------------

def _cv_xi_one(g, th):
    s2 = math.sin(th) ** 2
    c2 = math.cos(th) ** 2
    return g * math.sqrt((1 - g * g * s2 * c2) / (1 - 2 * g * g * s2))


def test_cv_examples():
    assert_allclose(kernel_cv(K(1, 0.1, 1, QUARTER_PI)), 0.1 * math.sqrt(0.9975 / 0.99), rtol=1e-12)
    assert_allclose(kernel_cv(K(1, 0.5, 1, 0.0)), 0.5, rtol=1e-14)


@pytest.mark.parametrize("xi", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("theta", [0.0, QUARTER_PI, HALF_PI])
def test_cv_small_gamma_equivalent_to_gamma(xi, theta):
    assert 0.0099 < kernel_cv(K(1, 0.01, xi, theta)) < 0.0101


def test_cv_independent_of_nu_and_moment_error():
    assert kernel_cv(K(1, 0.3, 0.5, 1.0)) == kernel_cv(K(7.5, 0.3, 0.5, 1.0))
    with pytest.raises(MomentError):
        kernel_cv(K(1, 1.0, 1.0, HALF_PI))  # xi <= 2 gamma^2


def test_cv_against_xi_one_closed_form(rng):
    for _ in range(20):
        th = rng.uniform(0, HALF_PI)
        g = rng.uniform(0.05, 0.65)
        assert_allclose(kernel_cv(K(1, g, 1, th)), _cv_xi_one(g, th), rtol=1e-10)


# --- Mellin transform of L^2 -----------------------------------------------------

def test_mellin_sq_quadrature(rng):
    for _ in range(10):
        xi = rng.choice([0.5, 1.0, 2.0])
        th = rng.choice([0.0, rng.uniform(0.1, 1.4), HALF_PI])
        g = rng.uniform(0.1, 0.6)
        k = K(math.exp(rng.uniform(-0.5, 0.5)), g, xi, th)
        z = 2.0 + rng.uniform(-0.4, 0.4)
        ref = quad_positive(lambda x: x ** (z - 1) * kernel_density(k, x) ** 2, k.nu, 1.0)
        assert_allclose(kernel_mellin_sq(k, z).real, ref, rtol=1e-5)


def test_mellin_sq_asymptotics():
    def scaled(g):
        return (kernel_mellin_sq(K(1, g, 1, QUARTER_PI), 2.0) * 2 * math.sqrt(math.pi) * g).real
    assert abs(scaled(0.05) - 1) < 0.1
    ratio = (scaled(0.1) - 1) / (scaled(0.05) - 1)
    assert 3.0 < ratio < 5.0


# --- per-observation parameters -------------------------------------------------

def test_per_obs_examples():
    k = per_obs_params(0.5, 1.0, KernelShape(0.5, 0.0))
    assert_allclose(k.gamma, 0.4472135954999579, rtol=1e-15)
    assert_allclose(k.nu, 1.3, rtol=1e-15)
    k = per_obs_params(0.7, 3.0, KernelShape(2.0, QUARTER_PI))
    assert_allclose(k.nu, 1 + k.gamma ** 2 / 2, rtol=1e-15)
    far = per_obs_params(0.5, 1e12, KernelShape(1.0, 0.3))
    assert far.gamma < 1e-6 and abs(far.nu - 1) < 1e-12
    with pytest.raises(ValueError):
        per_obs_params(0.0, 1.0, KernelShape(1.0, 0.0))


# --- catalog -----------------------------------------------------------------

def test_catalog_examples():
    k = catalog_params("gamma", (2.0, 0.5))
    assert_allclose((k.nu, k.gamma, k.xi, k.theta), (4.0, 1 / math.sqrt(2), 1.0, 0.0), rtol=1e-15)
    k = catalog_params("weibull", (1.0, 2.0))
    assert_allclose((k.nu, k.gamma, k.xi, k.theta), (1.0, 0.5, 0.5, 0.0), rtol=1e-15)
    k = catalog_params("levy", (1.0,))
    assert_allclose((k.nu, k.gamma, k.xi, k.theta), (1.0, math.sqrt(2), 1.0, HALF_PI), rtol=1e-15)
    with pytest.raises(KeyError):
        catalog_params("cauchy", (1.0,))
    with pytest.raises(ValueError):
        catalog_params("gamma", (-1.0, 1.0))


_PARAMS = {
    "beta_prime": (2.5, 3.5), "burr": (2.0, 3.0), "chi": (3.0,), "chi2": (4.0,),
    "dagum": (2.0, 1.5, 3.0), "erlang": (3.0, 2.0), "f": (4.0, 7.0), "frechet": (2.0, 1.5),
    "gamma": (2.0, 0.5), "gpd": (2 / 3, 2 / 3), "inverse_gamma": (3.0, 2.0), "levy": (1.0,),
    "log_logistic": (1.5, 4.0), "maxwell": (1.2,), "nakagami": (1.0, 2.0), "rayleigh": (0.8,),
    "singh_maddala": (2.0, 1.5, 3.0), "stacy": (2.0, 1.5, 3.0), "weibull": (1.0, 2.0),
}

_SCIPY = {
    "chi": lambda p: stats.chi(p[0]),
    "chi2": lambda p: stats.chi2(p[0]),
    "f": lambda p: stats.f(*p),
    "gamma": lambda p: stats.gamma(p[0], scale=1 / p[1]),
    "gpd": lambda p: stats.genpareto(p[1], scale=p[0]),
    "levy": lambda p: stats.levy(scale=p[0]),
    "nakagami": lambda p: stats.nakagami(p[0], scale=math.sqrt(p[1])),
    "weibull": lambda p: stats.weibull_min(p[1], scale=p[0]),
}


def test_catalog_has_all_rows():
    assert set(_PARAMS) == set(CATALOG_NAMES)
    assert len(CATALOG_NAMES) == 19


@pytest.mark.parametrize("name", sorted(_PARAMS))
def test_catalog_fidelity(name):
    x = np.geomspace(0.02, 20, 50)
    k = catalog_params(name, _PARAMS[name])
    expected = np.exp(catalog_logpdf(name, _PARAMS[name], x))
    assert_allclose(kernel_density(k, x), expected, rtol=1e-8)
    if name in _SCIPY:
        assert_allclose(kernel_density(k, x), _SCIPY[name](_PARAMS[name]).pdf(x), rtol=1e-8)


# --- expansion order -------------------------------------------------------------

@pytest.mark.parametrize("xi", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("theta", [0.0, QUARTER_PI, HALF_PI])
def test_expansion_remainder_is_fourth_order(xi, theta):
    shape = KernelShape(xi, theta)
    delta = 0.5 * (1 + math.cos(2 * theta) / xi)

    def err(g, z):
        return abs(kernel_mellin(MeijerKernel(1 + delta * g * g, g, shape), z) - 1 - 0.5 * g * g * z * (z - 1))

    for z in (2.0, 3.0, 1 + 2j):
        e1, e2 = err(0.2, z), err(0.1, z)
        if e1 < 1e-13:  # expansion exact (e.g. the mean of a Gamma kernel)
            continue
        assert 8 <= e1 / e2 <= 32
