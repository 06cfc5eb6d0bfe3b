"""Mellin-Meijer kernel density estimator and the asymmetric-kernel baselines.

The refined estimator is

    f_hat(x) = n^{-1} sum_k (1/X_k) L_k(x / X_k),

where L_k is a Meijer kernel of fixed shape (xi, theta) whose coefficient of
variation is eta / sqrt(eta^2 + X_k).  Baselines are the log-Normal kernel
estimator and the original and modified Gamma kernel estimators.
"""

import csv
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special

from .meijer import KernelShape, MeijerKernel, _logpdf_from, _logpdf_terms
from .mellin import Sample
from .specfun import log_beta

_BLOCK = 1 << 20  # max elements of a (grid x observations) block


class AssumptionWarning(UserWarning):
    """Kernel shape too light for the stated head/tail of the target density."""


def _check_x(x, strict=False):
    x = np.asarray(x, dtype=float)
    if np.any(np.isnan(x)):
        raise ValueError("evaluation point is NaN")
    if strict and np.any(x <= 0):
        raise ValueError("evaluation points must be > 0")
    if np.any(x < 0):
        raise ValueError("evaluation points must be >= 0")
    return x


class MMEstimator:
    """Fitted Mellin-Meijer estimator; immutable after construction.

    Parameters
    ----------
    sample : Sample
    shape : KernelShape
    eta : float
        Smoothing parameter, > 0.
    head_index, tail_index : float, optional
        Moment indices alpha, beta of the target (E X^-alpha and E X^beta
        finite).  When given, the kernel shape is checked against them and an
        :class:`AssumptionWarning` is emitted if it is too light.

    Attributes
    ----------
    gammas, nus : ndarray
        Per-observation kernel CV parameter and location.
    notes : tuple of str
        Messages of any warnings emitted at fit time.
    """

    def __init__(self, sample, shape, eta, head_index=None, tail_index=None):
        if not (eta > 0 and math.isfinite(eta)):
            raise ValueError(f"eta must be positive and finite, got {eta}")
        if not isinstance(sample, Sample):
            sample = Sample(sample)
        self.sample = sample
        self.shape = shape
        self.eta = float(eta)
        x = sample.values
        g2 = eta * eta / (eta * eta + x)
        self.gammas = np.sqrt(g2)
        self.nus = 1.0 + 0.5 * g2 * (1.0 + math.cos(2.0 * shape.theta) / shape.xi)
        xi = shape.xi
        cos2 = math.cos(shape.theta) ** 2
        sin2 = math.sin(shape.theta) ** 2
        shift = np.log(self.nus) + math.log(xi)
        if shape.is_gamma:
            self._mode = "gamma"
            a = xi * xi / (g2 * cos2)
            self._a, self._b = a, None
            self._c0 = a * np.log(a) - special.gammaln(a) - shift
            self._p = a / xi - 1.0
        elif shape.is_invgamma:
            self._mode = "invgamma"
            b = xi * xi / (g2 * sin2)
            self._a, self._b = None, b
            self._c0 = b * np.log(b) - special.gammaln(b) - shift
            self._p = -b / xi - 1.0
        else:
            self._mode = "f"
            a = xi * xi / (g2 * cos2)
            b = xi * xi / (g2 * sin2)
            self._a, self._b = a, b
            self._c0 = a * np.log(a / b) - log_beta(a, b) - shift
            self._p = a / xi - 1.0
        self._lognu = np.log(self.nus)
        self.notes = tuple(self._assumption_notes(head_index, tail_index))
        for msg in self.notes:
            warnings.warn(msg, AssumptionWarning, stacklevel=3)

    def _assumption_notes(self, alpha, beta):
        xi, th = self.shape.xi, self.shape.theta
        out = []
        c2, s2 = math.cos(th) ** 2, math.sin(th) ** 2
        if beta is not None and c2 > 0 and not xi / c2 > 0.25 - beta / 2:
            out.append(f"xi/cos^2(theta) = {xi / c2:.6g} <= 1/4 - beta/2: kernel tail too light")
        if alpha is not None and s2 > 0 and not xi / s2 > 1 - alpha:
            out.append(f"xi/sin^2(theta) = {xi / s2:.6g} <= 1 - alpha: kernel head too light")
        return out

    @property
    def n(self):
        return self.sample.n

    @property
    def kernels(self):
        """One :class:`MeijerKernel` per observation (built on demand)."""
        return tuple(MeijerKernel(float(nu), float(g), self.shape)
                     for nu, g in zip(self.nus, self.gammas))

    def _log_terms(self, lx, sl):
        # log of (1/X_k) L_k(x/X_k) for a block of observations, lx shape (m, 1)
        logs = self.sample.logs[sl]
        ly = lx - logs[None, :] - self._lognu[None, sl]
        u = ly / self.shape.xi
        p = self._p[None, sl]
        with np.errstate(over="ignore", invalid="ignore"):
            if self._mode == "gamma":
                core = p * ly - self._a[None, sl] * np.exp(u)
            elif self._mode == "invgamma":
                core = p * ly - self._b[None, sl] * np.exp(-u)
            else:
                a, b = self._a[None, sl], self._b[None, sl]
                core = p * ly - (a + b) * np.logaddexp(0.0, np.log(a / b) + u)
        return self._c0[None, sl] + core - logs[None, :]

    def __call__(self, x):
        return evaluate(self, x)

    def __repr__(self):
        return (f"MMEstimator(n={self.n}, xi={self.shape.xi:g}, "
                f"theta={self.shape.theta:g}, eta={self.eta:g})")


def fit(s, shape, eta, head_index=None, tail_index=None):
    """Build the refined estimator for sample ``s``; see :class:`MMEstimator`."""
    return MMEstimator(s, shape, eta, head_index, tail_index)


def evaluate(m, x):
    """Refined estimate at ``x >= 0`` (scalar or array).

    At ``x = 0`` the value is the sum of kernel limits: ``inf`` when some head
    exponent ``xi/(gamma_k^2 cos^2 theta) - 1`` is negative.
    """
    scalar = np.ndim(x) == 0
    x = _check_x(x).ravel()
    out = np.empty(x.size)
    pos = x > 0
    xp = x[pos]
    res = np.zeros(xp.size)
    n = m.n
    rows = max(1, _BLOCK // n)
    lx = np.log(xp)[:, None]
    for i in range(0, xp.size, rows):
        t = m._log_terms(lx[i:i + rows], slice(None))
        res[i:i + rows] = np.exp(t).sum(axis=1) / n
    out[pos] = res
    if not np.all(pos):
        out[~pos] = _value_at_zero(m)
    return float(out[0]) if scalar else out


def _value_at_zero(m):
    if m._mode == "invgamma" or np.all(m._p > 0):
        return 0.0
    if np.any(m._p < 0):
        return math.inf
    zero = m._p == 0
    return float(np.sum(np.exp(m._c0[zero] - m.sample.logs[zero]))) / m.n


def evaluate_basic(s, k, x):
    """Basic estimator n^{-1} sum_k (1/X_k) L(x/X_k) with one shared kernel ``k``."""
    scalar = np.ndim(x) == 0
    x = _check_x(x).ravel()
    c0, p, mode = _logpdf_terms(k)
    lnu = math.log(k.nu)
    with np.errstate(divide="ignore"):
        lx = np.log(x)[:, None]
    out = np.empty(x.size)
    rows = max(1, _BLOCK // s.n)
    for i in range(0, x.size, rows):
        ly = lx[i:i + rows] - s.logs[None, :] - lnu
        t = _logpdf_from(ly, c0, p, mode, k) - s.logs[None, :]
        out[i:i + rows] = np.exp(t).sum(axis=1) / s.n
    return float(out[0]) if scalar else out


def lognormal_kde(s, h, x):
    """log-Normal kernel estimator n^{-1} sum (x h sqrt(2 pi))^{-1} exp(-(log x - log X_k)^2 / 2h^2)."""
    if not h > 0:
        raise ValueError(f"bandwidth must be positive, got {h}")
    scalar = np.ndim(x) == 0
    x = _check_x(x, strict=True).ravel()
    lx = np.log(x)
    out = np.empty(x.size)
    rows = max(1, _BLOCK // s.n)
    for i in range(0, x.size, rows):
        d = (lx[i:i + rows, None] - s.logs[None, :]) / h
        out[i:i + rows] = np.exp(-0.5 * d * d).sum(axis=1)
    out /= s.n * h * math.sqrt(2 * math.pi) * x
    return float(out[0]) if scalar else out


def modified_gamma_shape(x, b):
    """Boundary-patched shape rho_b(x): x/b for x >= 2b, else (x/b)^2/4 + 1."""
    r = np.asarray(x, dtype=float) / b
    return np.where(r >= 2.0, r, 0.25 * r * r + 1.0)


def chen_gamma_kde(s, b, x, modified=False):
    """Gamma kernel estimator n^{-1} sum_k K_{rho(x), b}(X_k).

    K_{rho, b} is the Gamma density with shape rho and scale b; rho = x/b + 1
    for the original estimator and :func:`modified_gamma_shape` otherwise.
    The result need not integrate to one.
    """
    if not b > 0:
        raise ValueError(f"bandwidth must be positive, got {b}")
    scalar = np.ndim(x) == 0
    x = _check_x(x).ravel()
    rho = modified_gamma_shape(x, b) if modified else x / b + 1.0
    const = -rho * math.log(b) - special.gammaln(rho)
    out = np.empty(x.size)
    rows = max(1, _BLOCK // s.n)
    for i in range(0, x.size, rows):
        r = rho[i:i + rows, None]
        t = (r - 1.0) * s.logs[None, :] - s.values[None, :] / b + const[i:i + rows, None]
        out[i:i + rows] = np.exp(t).sum(axis=1) / s.n
    return float(out[0]) if scalar else out


def gamma_curvature(alpha, beta):
    """int_0^inf (x f''(x))^2 dx for the Gamma(alpha, rate beta) density, alpha > 3/2.

    With f = Gamma(alpha, 1), x f'' = f (p/x + q + x) where p = (alpha-1)(alpha-2)
    and q = -2(alpha-1); each power of x then integrates against f^2 in closed
    form.  The rate enters as beta^3.
    """
    if not alpha > 1.5:
        raise ValueError(f"curvature integral diverges for alpha <= 3/2, got {alpha}")
    p = (alpha - 1.0) * (alpha - 2.0)
    q = -2.0 * (alpha - 1.0)
    coef = {-2: p * p, -1: 2 * p * q, 0: q * q + 2 * p, 1: 2 * q, 2: 1.0}
    total = 0.0
    for k, ck in coef.items():
        e = 2 * alpha - 1 + k
        total += ck * math.exp(special.gammaln(e) - e * math.log(2.0) - 2 * special.gammaln(alpha))
    return beta ** 3 * total


def gamma_reference_bandwidth(s, min_shape=2.0):
    """AMISE-optimal Gamma-kernel b under a moment-matched Gamma reference.

    Away from the boundary the modified Gamma estimator has bias
    b x f''(x) / 2 and variance (2 sqrt(pi) n)^{-1} b^{-1/2} x^{-1/2} f(x),
    so b = (V / (n R))^{2/5} with V = (2 sqrt(pi))^{-1} E X^{-1/2} and
    R = int (x f'')^2.  Both are evaluated for Gamma(alpha, beta) with
    alpha = mean^2 / var and beta = mean / var.  R is infinite for
    alpha <= 3/2, so alpha is raised to ``min_shape`` when below it.
    """
    x = s.values
    mean = float(np.mean(x))
    var = float(np.var(x, ddof=1))
    alpha = max(mean * mean / var, min_shape)
    beta = alpha / mean
    v = math.sqrt(beta) * math.exp(special.gammaln(alpha - 0.5) - special.gammaln(alpha))
    v /= 2.0 * math.sqrt(math.pi)
    return (v / (s.n * gamma_curvature(alpha, beta))) ** 0.4


def log_normal_reference_bandwidth(s):
    """Normal-reference rule 0.9 min(sd, IQR/1.34) n^{-1/5} on the log data."""
    lg = s.logs
    sd = float(np.std(lg, ddof=1))
    q75, q25 = np.percentile(lg, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34) or sd
    return 0.9 * spread * s.n ** -0.2


@dataclass(frozen=True)
class DensityGrid:
    """Density values on an increasing grid of positive points."""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys, dtype=float)
        if xs.shape != ys.shape or xs.ndim != 1:
            raise ValueError("xs and ys must be 1-d of equal length")
        if np.any(xs < 0) or np.any(np.diff(xs) <= 0):
            raise ValueError("xs must be non-negative and strictly increasing")
        if np.any(ys < 0) or np.any(np.isnan(ys)) or np.any(np.isinf(ys[1:])):
            raise ValueError("ys must be finite and non-negative beyond the first point")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    @classmethod
    def from_estimator(cls, m, xs):
        xs = np.asarray(xs, dtype=float)
        return cls(xs, evaluate(m, xs))

    def to_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y"])
        for x, y in zip(self.xs, self.ys):
            w.writerow([format(x, ".17g"), format(y, ".17g")])

    def to_json(self, fh, meta=None):
        doc = {"x": [float(v) for v in self.xs], "y": [float(v) for v in self.ys]}
        if meta:
            doc["meta"] = meta
        json.dump(doc, fh, indent=1)
        fh.write("\n")


__all__ = [
    "AssumptionWarning", "DensityGrid", "KernelShape", "MMEstimator", "chen_gamma_kde",
    "evaluate", "evaluate_basic", "fit", "gamma_curvature", "gamma_reference_bandwidth", "lognormal_kde",
    "log_normal_reference_bandwidth", "modified_gamma_shape",
]
