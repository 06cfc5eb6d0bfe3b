"""Meijer kernel densities.

A Meijer kernel ``L(nu, gamma, xi, theta)`` is the law of ``nu * X**xi`` where
``X`` is Fisher-Snedecor with ``2a`` and ``2b`` degrees of freedom,

    a = xi**2 / (gamma**2 cos(theta)**2),   b = xi**2 / (gamma**2 sin(theta)**2).

``theta = 0`` (``b`` infinite) gives a power of a Gamma(a, a) variable and
``theta = pi/2`` (``a`` infinite) a power of an Inverse Gamma(b, b) variable.
Its Mellin transform is a rescaled product of two Gamma functions, which is
what makes the whole estimator tractable.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .specfun import log_beta, log_gamma_ratio

HALF_PI = 0.5 * math.pi
THETA_EPS = 1e-12


class StripError(ValueError):
    """Mellin argument outside the strip of holomorphy."""


class MomentError(ValueError):
    """Requested moment does not exist for this kernel."""


@dataclass(frozen=True)
class KernelShape:
    """Kernel family: power ``xi`` and head/tail balance angle ``theta``."""

    xi: float
    theta: float

    def __post_init__(self):
        if not (self.xi > 0 and math.isfinite(self.xi)):
            raise ValueError(f"xi must be positive, got {self.xi}")
        if not (-THETA_EPS <= self.theta <= HALF_PI + THETA_EPS):
            raise ValueError(f"theta must lie in [0, pi/2], got {self.theta}")

    @property
    def is_gamma(self):
        return abs(self.theta) < THETA_EPS

    @property
    def is_invgamma(self):
        return abs(self.theta - HALF_PI) < THETA_EPS


@dataclass(frozen=True)
class HolomorphyStrip:
    lower: float
    upper: float

    def contains(self, re):
        return self.lower < re < self.upper


@dataclass(frozen=True)
class MeijerKernel:
    nu: float
    gamma: float
    shape: KernelShape

    def __post_init__(self):
        if not (self.nu > 0 and math.isfinite(self.nu)):
            raise ValueError(f"nu must be positive, got {self.nu}")
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    @property
    def xi(self):
        return self.shape.xi

    @property
    def theta(self):
        return self.shape.theta

    @property
    def head(self):
        """Gamma-factor parameter ``a`` (``inf`` when theta = pi/2)."""
        if self.shape.is_invgamma:
            return math.inf
        return self.xi**2 / (self.gamma**2 * math.cos(self.theta) ** 2)

    @property
    def tail(self):
        """Gamma-factor parameter ``b`` (``inf`` when theta = 0)."""
        if self.shape.is_gamma:
            return math.inf
        return self.xi**2 / (self.gamma**2 * math.sin(self.theta) ** 2)


def kernel_strip(k):
    """Strip of holomorphy of the kernel's Mellin transform."""
    return HolomorphyStrip(1.0 - k.head / k.xi, 1.0 + k.tail / k.xi)


def _mellin_log(k, s):
    # log M(L; 1 + s), s complex (array)
    a, b, xi = k.head, k.tail, k.xi
    out = s * math.log(k.nu)
    if k.shape.is_gamma:
        out = out + xi * s * math.log(1.0 / a) + log_gamma_ratio(a, xi * s)
    elif k.shape.is_invgamma:
        out = out + xi * s * math.log(b) + log_gamma_ratio(b, -xi * s)
    else:
        # (1/tan^2 theta)^{xi s} = (b/a)^{xi s}
        out = out + xi * s * math.log(b / a) + log_gamma_ratio(a, xi * s) + log_gamma_ratio(b, -xi * s)
    return out


def kernel_mellin(k, z):
    """Mellin transform M(L; z) of a Meijer kernel.

    Exactly 1 at ``z = 1``.  ``z`` may be a scalar or an array.

    Raises
    ------
    StripError
        If some ``Re(z)`` lies outside the open strip of holomorphy.
    """
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=complex)
    strip = kernel_strip(k)
    if np.any(z.real <= strip.lower) or np.any(z.real >= strip.upper):
        raise StripError(f"Re(z) outside ({strip.lower}, {strip.upper})")
    s = z - 1.0
    out = np.exp(_mellin_log(k, s))
    out = np.where(s == 0, 1.0 + 0.0j, out)
    return complex(out) if scalar else out


def kernel_logpdf(k, x):
    """Log-density of the kernel, vectorised over ``x >= 0``."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise ValueError("kernel density defined for x >= 0 only")
    c0, p, mode = _logpdf_terms(k)
    with np.errstate(divide="ignore"):
        ly = np.log(x) - math.log(k.nu)
    return _logpdf_from(ly, c0, p, mode, k)


def _logpdf_terms(k):
    """Constant, head power and family tag for the log-density in ly = log(y/nu)."""
    xi = k.xi
    lxi = math.log(xi) + math.log(k.nu)
    if k.shape.is_gamma:
        a = k.head
        c0 = a * math.log(a) - special.gammaln(a) - lxi
        return c0, a / xi - 1.0, "gamma"
    if k.shape.is_invgamma:
        b = k.tail
        c0 = b * math.log(b) - special.gammaln(b) - lxi
        return c0, -b / xi - 1.0, "invgamma"
    a, b = k.head, k.tail
    c0 = a * math.log(a / b) - log_beta(a, b) - lxi
    return c0, a / xi - 1.0, "f"


def _logpdf_from(ly, c0, p, mode, k):
    xi = k.xi
    with np.errstate(over="ignore", invalid="ignore"):
        if mode == "gamma":
            core = p * ly - k.head * np.exp(ly / xi)
        elif mode == "invgamma":
            core = p * ly - k.tail * np.exp(-ly / xi)
        else:
            a, b = k.head, k.tail
            core = p * ly - (a + b) * np.logaddexp(0.0, math.log(a / b) + ly / xi)
    out = c0 + core
    at_zero = np.isneginf(ly)
    if np.any(at_zero):
        out = np.where(at_zero, _log_at_zero(c0, p, mode), out)
    return out


def _log_at_zero(c0, p, mode):
    if mode == "invgamma" or p > 0:
        return -math.inf
    if p < 0:
        return math.inf
    return c0


def kernel_density(k, x):
    """Kernel density at ``x >= 0`` (vectorised).

    At ``x = 0`` returns 0, a finite limit, or ``inf`` according to the sign
    of the head exponent ``xi / (gamma^2 cos^2 theta) - 1``.
    """
    return np.exp(kernel_logpdf(k, x))


def kernel_cv(k):
    """Coefficient of variation of the kernel (independent of ``nu``).

    Raises
    ------
    MomentError
        If the second moment does not exist (``xi <= 2 gamma^2 sin^2 theta``).
    """
    xi = k.xi
    total = 0.0
    if not k.shape.is_invgamma:
        a = k.head
        total += float(log_gamma_ratio(a, 2 * xi) - 2 * log_gamma_ratio(a, xi))
    if not k.shape.is_gamma:
        b = k.tail
        if not b > 2 * xi:
            raise MomentError("coefficient of variation needs xi > 2 gamma^2 sin^2 theta")
        total += float(log_gamma_ratio(b, -2 * xi) - 2 * log_gamma_ratio(b, -xi))
    return math.sqrt(math.expm1(total))


def kernel_mellin_sq(k, z):
    """Mellin transform of the squared kernel, M(L^2; z)."""
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=complex)
    xi = k.xi
    lo = 2.0 - 2.0 * k.head / xi
    hi = 2.0 + 2.0 * k.tail / xi
    if np.any(z.real <= lo) or np.any(z.real >= hi):
        raise StripError(f"Re(z) outside ({lo}, {hi}) for M(L^2)")
    s = z - 2.0
    out = s * math.log(k.nu) - math.log(xi)
    if k.shape.is_gamma:
        a = k.head
        out = out + 2 * a * math.log(a) - 2 * special.gammaln(a) + special.gammaln(2 * a)
        out = out - (2 * a + xi * s) * math.log(2 * a) + log_gamma_ratio(2 * a, xi * s)
    elif k.shape.is_invgamma:
        b = k.tail
        out = out + 2 * b * math.log(b) - 2 * special.gammaln(b) + special.gammaln(2 * b)
        out = out + (xi * s - 2 * b) * math.log(2 * b) + log_gamma_ratio(2 * b, -xi * s)
    else:
        a, b = k.head, k.tail
        out = out + log_beta(2 * a, 2 * b) - 2 * log_beta(a, b)
        out = out + xi * s * math.log(b / a)
        out = out + log_gamma_ratio(2 * a, xi * s) + log_gamma_ratio(2 * b, -xi * s)
    out = np.exp(out)
    return complex(out) if scalar else out


def per_obs_params(eta, x_k, shape):
    """Kernel attached to observation ``x_k`` for smoothing parameter ``eta``.

    gamma = eta / sqrt(eta^2 + x_k) and nu = 1 + gamma^2 (1 + cos(2 theta)/xi) / 2,
    so that the kernel has CV close to gamma and mean close to 1 + gamma^2.
    """
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    if not x_k > 0:
        raise ValueError(f"observation must be positive, got {x_k}")
    g = eta / math.sqrt(eta * eta + x_k)
    nu = 1.0 + 0.5 * g * g * (1.0 + math.cos(2.0 * shape.theta) / shape.xi)
    return MeijerKernel(nu, g, shape)


# --- named distributions -----------------------------------------------------

def _atan_sqrt(r):
    return math.atan(math.sqrt(r))


def _gamma_lpdf(x, al, be):
    return al * math.log(be) - special.gammaln(al) + (al - 1) * np.log(x) - be * x


_CATALOG = {
    # name: (parameter names, (nu, gamma, xi, theta) rule, closed-form log-density)
    "beta_prime": (
        ("alpha", "beta"),
        lambda al, be: (al / be, math.sqrt(1 / al + 1 / be), 1.0, _atan_sqrt(al / be)),
        lambda x, al, be: (al - 1) * np.log(x) - (al + be) * np.log1p(x) - special.betaln(al, be),
    ),
    "burr": (
        ("c", "k"),
        lambda c, kk: (kk ** (-1 / c), math.sqrt(1 + 1 / kk) / c, 1 / c, _atan_sqrt(1 / kk)),
        lambda x, c, kk: math.log(c * kk) + (c - 1) * np.log(x) - (kk + 1) * np.log1p(x**c),
    ),
    "chi": (
        ("k",),
        lambda kk: (math.sqrt(kk), 1 / math.sqrt(2 * kk), 0.5, 0.0),
        lambda x, kk: (1 - kk / 2) * math.log(2) + (kk - 1) * np.log(x) - x * x / 2 - special.gammaln(kk / 2),
    ),
    "chi2": (
        ("k",),
        lambda kk: (kk, math.sqrt(2 / kk), 1.0, 0.0),
        lambda x, kk: _gamma_lpdf(x, kk / 2, 0.5),
    ),
    "dagum": (
        ("a", "b", "p"),
        lambda a, b, p: (b * p ** (1 / a), math.sqrt(1 + 1 / p) / a, 1 / a, _atan_sqrt(p)),
        lambda x, a, b, p: math.log(a * p) + (a * p - 1) * np.log(x) - a * p * math.log(b)
        - (p + 1) * np.log1p((x / b) ** a),
    ),
    "erlang": (
        ("mu", "k"),
        lambda mu, kk: (mu * kk, math.sqrt(1 / kk), 1.0, 0.0),
        lambda x, mu, kk: _gamma_lpdf(x, kk, 1 / mu),
    ),
    "f": (
        ("d1", "d2"),
        lambda d1, d2: (1.0, math.sqrt(2 / d1 + 2 / d2), 1.0, _atan_sqrt(d1 / d2)),
        lambda x, d1, d2: (d1 / 2) * math.log(d1 / d2) - special.betaln(d1 / 2, d2 / 2)
        + (d1 / 2 - 1) * np.log(x) - (d1 + d2) / 2 * np.log1p(d1 / d2 * x),
    ),
    "frechet": (
        ("alpha", "s"),
        lambda al, s: (s, 1 / al, 1 / al, HALF_PI),
        lambda x, al, s: math.log(al / s) - (1 + al) * np.log(x / s) - (x / s) ** (-al),
    ),
    "gamma": (
        ("alpha", "beta"),
        lambda al, be: (al / be, math.sqrt(1 / al), 1.0, 0.0),
        _gamma_lpdf,
    ),
    "gpd": (
        ("sigma", "zeta"),
        lambda sg, ze: (sg, math.sqrt(ze + 1), 1.0, _atan_sqrt(ze)),
        lambda x, sg, ze: -math.log(sg) - (1 / ze + 1) * np.log1p(ze * x / sg),
    ),
    "inverse_gamma": (
        ("alpha", "beta"),
        lambda al, be: (be / al, math.sqrt(1 / al), 1.0, HALF_PI),
        lambda x, al, be: al * math.log(be) - special.gammaln(al) - (al + 1) * np.log(x) - be / x,
    ),
    "levy": (
        ("c",),
        lambda c: (c, math.sqrt(2), 1.0, HALF_PI),
        lambda x, c: 0.5 * math.log(c / (2 * math.pi)) - c / (2 * x) - 1.5 * np.log(x),
    ),
    "log_logistic": (
        ("alpha", "beta"),
        lambda al, be: (al, math.sqrt(2) / be, 1 / be, math.pi / 4),
        lambda x, al, be: math.log(be / al) + (be - 1) * np.log(x / al) - 2 * np.log1p((x / al) ** be),
    ),
    "maxwell": (
        ("sigma",),
        lambda sg: (math.sqrt(3) * sg, 1 / math.sqrt(6), 0.5, 0.0),
        lambda x, sg: 0.5 * math.log(2 / math.pi) - 3 * math.log(sg) + 2 * np.log(x) - x * x / (2 * sg * sg),
    ),
    "nakagami": (
        ("m", "omega"),
        lambda m, om: (math.sqrt(om), 1 / (2 * math.sqrt(m)), 0.5, 0.0),
        lambda x, m, om: math.log(2) + m * math.log(m) - special.gammaln(m) - m * math.log(om)
        + (2 * m - 1) * np.log(x) - m * x * x / om,
    ),
    "rayleigh": (
        ("sigma",),
        lambda sg: (math.sqrt(2) * sg, 0.5, 0.5, 0.0),
        lambda x, sg: np.log(x) - 2 * math.log(sg) - x * x / (2 * sg * sg),
    ),
    "singh_maddala": (
        ("a", "b", "q"),
        lambda a, b, q: (b / q ** (1 / a), math.sqrt(1 + 1 / q) / a, 1 / a, _atan_sqrt(1 / q)),
        lambda x, a, b, q: math.log(a * q / b) + (a - 1) * np.log(x / b) - (q + 1) * np.log1p((x / b) ** a),
    ),
    "stacy": (
        ("a", "d", "p"),
        lambda a, d, p: (a * (d / p) ** (1 / p), math.sqrt(p / d) / p, 1 / p, 0.0),
        lambda x, a, d, p: math.log(p) - d * math.log(a) - special.gammaln(d / p)
        + (d - 1) * np.log(x) - (x / a) ** p,
    ),
    "weibull": (
        ("mu", "eta"),
        lambda mu, et: (mu, 1 / et, 1 / et, 0.0),
        lambda x, mu, et: math.log(et / mu) + (et - 1) * np.log(x / mu) - (x / mu) ** et,
    ),
}

CATALOG_NAMES = tuple(_CATALOG)


def _lookup(name, params):
    key = name.lower().replace("-", "_")
    if key not in _CATALOG:
        raise KeyError(f"unknown distribution {name!r}")
    names, rule, lpdf = _CATALOG[key]
    params = tuple(float(p) for p in params)
    if len(params) != len(names):
        raise ValueError(f"{key} takes parameters {names}, got {params}")
    if not all(p > 0 and math.isfinite(p) for p in params):
        raise ValueError(f"{key} parameters must be positive, got {params}")
    return rule, lpdf, params


def catalog_params(name, params):
    """Meijer kernel reproducing the named distribution."""
    rule, _, params = _lookup(name, params)
    nu, g, xi, th = rule(*params)
    return MeijerKernel(nu, g, KernelShape(xi, th))


def catalog_logpdf(name, params, x):
    """Closed-form log-density of a catalog distribution (independent path)."""
    _, lpdf, params = _lookup(name, params)
    with np.errstate(divide="ignore"):
        return lpdf(np.asarray(x, dtype=float), *params)
