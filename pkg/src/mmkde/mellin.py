"""Empirical and analytic Mellin transforms along vertical lines."""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .meijer import catalog_params, kernel_mellin

_CHUNK = 1 << 18  # max elements of a (points x observations) block


class Sample:
    """Immutable vector of strictly positive, finite observations.

    The logarithms are computed once at construction; every Mellin-type
    quantity is evaluated through them.
    """

    def __init__(self, values):
        v = np.array(values, dtype=float).ravel()
        if v.size < 2:
            raise ValueError(f"a sample needs at least 2 observations, got {v.size}")
        bad = ~(np.isfinite(v) & (v > 0))
        if np.any(bad):
            i = int(np.flatnonzero(bad)[0])
            raise ValueError(f"observation {i} is not a positive finite number: {v[i]!r}")
        v.setflags(write=False)
        self._values = v
        self._logs = np.log(v)
        self._logs.setflags(write=False)

    @property
    def values(self):
        return self._values

    @property
    def logs(self):
        return self._logs

    @property
    def n(self):
        return self._values.size

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"Sample(n={self.n})"


def _weighted_sum_exp(weights, logs, zs):
    # sum_k weights_k * exp(zs * logs_k), blocked over zs
    zs = np.asarray(zs, dtype=complex).ravel()
    out = np.empty(zs.size, dtype=complex)
    step = max(1, _CHUNK // max(1, logs.size))
    for i in range(0, zs.size, step):
        blk = zs[i:i + step, None] * logs[None, :]
        out[i:i + step] = np.exp(blk) @ weights
    return out


def empirical_mellin(s, z):
    """M(P_n; z) = n^{-1} sum_k X_k^{z-1} for scalar or array ``z``."""
    scalar = np.ndim(z) == 0
    zs = np.asarray(z, dtype=complex)
    w = np.full(s.n, 1.0 / s.n)
    out = _weighted_sum_exp(w, s.logs, zs.ravel() - 1.0).reshape(zs.shape)
    return complex(out) if scalar else out


@dataclass(frozen=True)
class MellinLine:
    """Transform values at c + i*omega for an increasing grid of omega >= 0."""

    c: float
    omegas: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        om = np.asarray(self.omegas, dtype=float)
        if om.size == 0 or om[0] != 0.0 or np.any(np.diff(om) <= 0):
            raise ValueError("omegas must start at 0 and be strictly increasing")
        if len(self.values) != om.size:
            raise ValueError("values and omegas differ in length")

    @property
    def abs(self):
        return np.abs(self.values)

    def rows(self, extra=None):
        extra = extra or {}
        for i, (w, v) in enumerate(zip(self.omegas, self.values)):
            row = [w, v.real, v.imag, abs(v)]
            row.extend(col[i] for col in extra.values())
            yield row

    def to_csv(self, fh, extra=None):
        """Write ``omega,re,im,abs`` (plus ``extra`` columns) to a text stream."""
        extra = extra or {}
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["omega", "re", "im", "abs", *extra])
        for row in self.rows(extra):
            w.writerow([format(float(x), ".17g") for x in row])


def mellin_line(s, c, omega_max=200.0, step=0.01):
    """Empirical transform on the line Re(z) = c, omega = 0, step, ..., omega_max."""
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    if not omega_max > 0:
        raise ValueError(f"omega_max must be positive, got {omega_max}")
    count = int(math.floor(omega_max / step + 1e-9)) + 1
    omegas = step * np.arange(count)
    return MellinLine(float(c), omegas, empirical_mellin(s, c + 1j * omegas))


def analytic_mellin(name, params, z):
    """Exact Mellin transform of a named distribution.

    ``lognormal`` (mu, sigma) and ``exp`` (rate) are handled directly; every
    other name goes through the Meijer catalog.
    """
    key = name.lower().replace("-", "_")
    if key in ("lognormal", "lognorm"):
        mu, sigma = (float(p) for p in params)
        if not sigma > 0:
            raise ValueError("lognormal sigma must be positive")
        w = np.asarray(z, dtype=complex) - 1.0
        out = np.exp(mu * w + 0.5 * sigma * sigma * w * w)
        return complex(out) if np.ndim(z) == 0 else out
    if key in ("exp", "exponential"):
        (rate,) = params
        return kernel_mellin(catalog_params("gamma", (1.0, rate)), z)
    return kernel_mellin(catalog_params(key, params), z)


def parseval_check(f_grid, line):
    """|int x^{2c-1} f^2 dx - (1/2pi) int |M(f; c+iw)|^2 dw| with trapezoid sums.

    ``f_grid`` carries ``xs``/``ys``; ``line`` holds the transform for w >= 0
    and the w < 0 half is filled in by conjugate symmetry.
    """
    xs = np.asarray(f_grid.xs, dtype=float)
    ys = np.asarray(f_grid.ys, dtype=float)
    c = line.c
    lhs = float(np.trapezoid(xs ** (2 * c - 1) * ys * ys, xs))
    rhs = float(2.0 * np.trapezoid(np.abs(line.values) ** 2, line.omegas)) / (2 * math.pi)
    return abs(lhs - rhs)
