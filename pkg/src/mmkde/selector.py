"""Plug-in choice of the smoothing parameter eta in the Mellin domain.

The AMISE-optimal eta for weight x^{2c-1} depends on the unknown density
through two quantities: the moment E X^{2c-3/2} and the curvature integral
(1/2pi) int |z(z-1) M(f; z-1)|^2 dw along Re(z) = c.  The plug-in rule
replaces M(f; .) by the empirical transform and truncates the integral at the
first local minimum T0 of its modulus, beyond which the empirical transform is
mostly noise.
"""

import math
from dataclasses import dataclass

import numpy as np

from .meijer import MomentError, StripError, catalog_params, kernel_strip
from .mellin import Sample, _weighted_sum_exp, analytic_mellin
from .specfun import de_quad

_SCAN_CHUNK = 4096
_SERIES_CUTOFF = 2.0  # |a T| below which the Taylor series replaces the closed form
_SERIES_TERMS = 24
_MIN_REL = 1e-10  # relative drop required on both sides of a grid minimum
_DEGENERATE = 1e-12


class DegenerateSampleError(ValueError):
    """The empirical curvature term vanishes, so eta is undefined."""


class DivergentIntegralError(ValueError):
    """An integral in the optimal-eta formula does not converge."""


@dataclass(frozen=True)
class SelectorConfig:
    """Settings of the plug-in selector.

    Attributes
    ----------
    c : float
        Weight exponent; the loss is weighted by x^{2c-1}.
    omega_step : float
        Grid spacing of the T0 scan.
    omega_max : float
        End of the T0 scan, returned when no minimum is found.
    eta_floor : float
        Lower clamp for the returned eta.
    """

    c: float = 1.5
    omega_step: float = 0.005
    omega_max: float = 500.0
    eta_floor: float = 1e-6

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if not self.omega_step > 0:
            raise ValueError(f"omega_step must be positive, got {self.omega_step}")
        if not self.omega_max > self.omega_step:
            raise ValueError("omega_max must exceed omega_step")
        if not self.eta_floor > 0:
            raise ValueError("eta_floor must be positive")


@dataclass(frozen=True)
class Selection:
    """Outcome of the plug-in rule with its intermediate quantities."""

    eta: float
    t0: float
    i_hat: float
    moment: float
    c: float


def find_t0(s, cfg=SelectorConfig()):
    """First strict local minimum of |M(P_n; (c-1) + i w)| over w > 0.

    The modulus is scanned on w = 0, step, 2 step, ... in blocks, stopping at
    the first grid point whose value is smaller than both neighbours.  A
    relative margin of 1e-10 keeps floating-point ripple on a flat modulus
    (e.g. an all-equal sample) from counting as a minimum.  Returns
    ``cfg.omega_max`` when the scan finds nothing.
    """
    step = cfg.omega_step
    count = int(math.floor(cfg.omega_max / step + 1e-9)) + 1
    w = np.exp((cfg.c - 2.0) * s.logs) / s.n
    prev = None  # (m[i-2], m[i-1]) carried across blocks
    for start in range(0, count, _SCAN_CHUNK):
        idx = np.arange(start, min(count, start + _SCAN_CHUNK))
        m = np.abs(_weighted_sum_exp(w, s.logs, 1j * step * idx))
        if prev is not None:
            m = np.concatenate([prev, m])
            idx = np.concatenate([[idx[0] - 2, idx[0] - 1], idx])
        mid = m[1:-1]
        hit = (mid < m[:-2] * (1 - _MIN_REL)) & (mid < m[2:] * (1 - _MIN_REL))
        hit &= idx[1:-1] > 0
        if np.any(hit):
            return float(step * idx[1:-1][np.argmax(hit)])
        prev = m[-2:]
    return float(cfg.omega_max)


def _poly_coeffs(c):
    # |z(z-1)|^2 at z = c + iw equals w^4 + b w^2 + a0^2
    a0 = c * (c - 1.0)
    return a0, 2.0 * c * c - 2.0 * c + 1.0


def _cos_moments(t, a):
    """I_m = int_0^t w^{2m} cos(a w) dw for m = 0, 1, 2, vectorised over ``a``."""
    a = np.asarray(a, dtype=float)
    x = a * t
    small = np.abs(x) < _SERIES_CUTOFF
    i0 = np.empty_like(a)
    i1 = np.empty_like(a)
    i2 = np.empty_like(a)
    if np.any(small):
        # sum_j (-1)^j x^{2j} / (2j)! * t^{2m+1} / (2m+2j+1)
        xs2 = x[small] ** 2
        term = np.ones_like(xs2)
        s0 = np.zeros_like(xs2)
        s1 = np.zeros_like(xs2)
        s2 = np.zeros_like(xs2)
        for j in range(_SERIES_TERMS):
            if j:
                term = term * (-xs2) / ((2 * j - 1) * (2 * j))
            s0 += term / (2 * j + 1)
            s1 += term / (2 * j + 3)
            s2 += term / (2 * j + 5)
        i0[small] = s0 * t
        i1[small] = s1 * t ** 3
        i2[small] = s2 * t ** 5
    big = ~small
    if np.any(big):
        ab = a[big]
        sn = np.sin(x[big])
        cs = np.cos(x[big])
        i0[big] = sn / ab
        i1[big] = t * t * sn / ab + 2 * t * cs / ab ** 2 - 2 * sn / ab ** 3
        i2[big] = (t ** 4 * sn / ab + 4 * t ** 3 * cs / ab ** 2 - 12 * t * t * sn / ab ** 3
                   - 24 * t * cs / ab ** 4 + 24 * sn / ab ** 5)
    return i0, i1, i2


def a_integral(t, a, c):
    """A(t; a) = int_{-t}^{t} |z(z-1)|^2 cos(a w) dw with z = c + i w."""
    a0, b = _poly_coeffs(c)
    i0, i1, i2 = _cos_moments(t, a)
    return 2.0 * (i2 + b * i1 + a0 * a0 * i0)


def i_hat(s, c, t):
    """Empirical curvature integral truncated at ``t``.

    (1/(2 pi n^2)) sum_{k,k'} (X_k X_k')^{c-2} A(t; log(X_k / X_k')), summed
    with :func:`math.fsum` so the result does not depend on term order.
    """
    if not t > 0:
        raise ValueError(f"truncation point must be positive, got {t}")
    logs = s.logs
    wlog = (c - 2.0) * logs
    parts = []
    rows = max(1, (1 << 20) // s.n)
    for i in range(0, s.n, rows):
        a = logs[i:i + rows, None] - logs[None, :]
        terms = np.exp(wlog[i:i + rows, None] + wlog[None, :]) * a_integral(t, a, c)
        parts.extend(terms.ravel())
    return math.fsum(parts) / (2.0 * math.pi * s.n * s.n)


def eta_rule(moment, curvature, n):
    """eta = ((2 sqrt(pi))^{-1} moment / curvature)^{1/5} n^{-1/5}."""
    return (moment / (2.0 * math.sqrt(math.pi) * curvature)) ** 0.2 * n ** -0.2


def select(s, cfg=SelectorConfig()):
    """Run the plug-in rule and return eta together with T0 and its inputs.

    Raises
    ------
    DegenerateSampleError
        When all observations coincide (the empirical transform then has
        constant modulus, no truncation point exists and the curvature term
        grows without bound) or when the curvature estimate is <= 1e-12.
    """
    if np.ptp(s.logs) == 0.0:
        raise DegenerateSampleError("all observations are equal; curvature is undefined")
    t0 = find_t0(s, cfg)
    ih = i_hat(s, cfg.c, t0)
    if not ih > _DEGENERATE:
        raise DegenerateSampleError(f"curvature estimate {ih!r} is not positive")
    moment = math.fsum(np.exp((2 * cfg.c - 1.5) * s.logs)) / s.n
    eta = max(eta_rule(moment, ih, s.n), cfg.eta_floor)
    return Selection(eta=eta, t0=t0, i_hat=ih, moment=moment, c=cfg.c)


def plugin_eta(s, cfg=SelectorConfig()):
    """Plug-in smoothing parameter for sample ``s``; see :func:`select`."""
    if not isinstance(s, Sample):
        s = Sample(s)
    return select(s, cfg).eta


def oracle_eta(name, params, n, c=1.5):
    """AMISE-optimal eta for a known distribution (test oracle).

    The moment is M(f; 2c - 1/2).  The curvature integral is evaluated on
    Re(z) = c by Parseval from |z(z-1) M(f; z-1)|^2.  Both need their Mellin
    arguments inside the strip of holomorphy of ``f``.

    Raises
    ------
    DivergentIntegralError
        If 2c - 1/2 or c - 1 lies outside the strip.
    """
    key = name.lower()
    if key in ("lognormal", "lognorm"):
        lower, upper = -math.inf, math.inf
    else:
        cat = "gamma" if key in ("exp", "exponential") else key
        cparams = (1.0, params[0]) if cat != key else params
        st = kernel_strip(catalog_params(cat, cparams))
        lower, upper = st.lower, st.upper
    for z in (2 * c - 0.5, c - 1.0):
        if not lower < z < upper:
            raise DivergentIntegralError(
                f"Mellin argument {z} outside the strip ({lower}, {upper}) for {name}")
    try:
        moment = float(np.real(analytic_mellin(name, params, 2 * c - 0.5)))

        def integrand(w):
            z = c + 1j * np.asarray(w)
            return np.abs(z * (z - 1) * analytic_mellin(name, params, z - 1)) ** 2

        curvature = de_quad(integrand, 0.0, 1.0, tol=1e-11) / (2 * math.pi)
    except (StripError, MomentError) as exc:
        raise DivergentIntegralError(str(exc)) from exc
    return eta_rule(moment, curvature, n)
