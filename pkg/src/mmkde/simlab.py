"""Monte Carlo MISE benchmark over ten test densities on the positive half-line.

Replicate ``r`` of density ``d`` under seed ``s`` always draws from the
stream ``SeedSequence([s, d, r])``, so every estimator sees the same samples
and results do not depend on how replicates are split across workers.
"""

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import optimize, stats

from .estimator import (chen_gamma_kde, evaluate, fit, gamma_reference_bandwidth,
                        log_normal_reference_bandwidth, lognormal_kde)
from .meijer import HALF_PI, KernelShape
from .mellin import Sample
from .selector import DegenerateSampleError, SelectorConfig, plugin_eta
from .specfun import quad_positive

GRID_SIZE = 1000
MAX_FAILURE_RATE = 0.05


@dataclass(frozen=True)
class TestDensity:
    """A benchmark density with exact sampler and quantile function."""

    __test__ = False  # keep pytest from collecting this class

    id: int
    name: str
    pdf: object
    cdf: object
    sampler: object  # (Generator, size) -> ndarray
    q: object

    def grid(self, size=GRID_SIZE):
        """x_i = i q(0.9999) / size, i = 1..size."""
        return self.q(0.9999) * np.arange(1, size + 1) / size


class _Mixture:
    def __init__(self, weight, first, second):
        self.w, self.f1, self.f2 = weight, first, second

    def pdf(self, x):
        return self.w * self.f1.pdf(x) + (1 - self.w) * self.f2.pdf(x)

    def cdf(self, x):
        return self.w * self.f1.cdf(x) + (1 - self.w) * self.f2.cdf(x)

    def ppf(self, p):
        lo = min(self.f1.ppf(p), self.f2.ppf(p))
        hi = max(self.f1.ppf(p), self.f2.ppf(p))
        if lo == hi:
            return lo
        return optimize.brentq(lambda x: self.cdf(x) - p, lo, hi, xtol=1e-12, rtol=1e-14)


def _gamma(shape, rate):
    return stats.gamma(shape, scale=1.0 / rate)


def _mix_sampler(weight, draw1, draw2):
    def draw(rng, size):
        pick = rng.random(size) < weight
        a = draw1(rng, size)
        b = draw2(rng, size)
        return np.where(pick, a, b)
    return draw


def _gpd_sampler(sigma, zeta):
    def draw(rng, size):
        u = rng.random(size)
        return sigma / zeta * np.expm1(-zeta * np.log1p(-u))
    return draw


def _build():
    ln01 = stats.lognorm(1.0)
    ln15 = stats.lognorm(math.sqrt(0.1), scale=math.exp(1.5))
    dists = [
        (1, "log-normal(0,1)", ln01, lambda g, n: g.lognormal(0.0, 1.0, n)),
        (2, "chi-squared(1)", stats.chi2(1), lambda g, n: g.standard_normal(n) ** 2),
        (3, "Nakagami(1,2)", stats.nakagami(1.0, scale=math.sqrt(2.0)),
         lambda g, n: np.sqrt(g.gamma(1.0, 2.0, n))),
        (4, "Gamma(2,1/2)", _gamma(2.0, 0.5), lambda g, n: g.gamma(2.0, 2.0, n)),
        (5, "Gamma(0.7,1/2)", _gamma(0.7, 0.5), lambda g, n: g.gamma(0.7, 2.0, n)),
        (6, "Exp(1)", stats.expon(), lambda g, n: g.exponential(1.0, n)),
        (7, "GPD(2/3,2/3)", stats.genpareto(2 / 3, scale=2 / 3), _gpd_sampler(2 / 3, 2 / 3)),
        (8, "inverse Weibull(1,2)", stats.invweibull(2.0),
         lambda g, n: 1.0 / g.weibull(2.0, n)),
        (9, "2/3 Gamma(0.7,1/2) + 1/3 Gamma(20,5)",
         _Mixture(2 / 3, _gamma(0.7, 0.5), _gamma(20.0, 5.0)),
         _mix_sampler(2 / 3, lambda g, n: g.gamma(0.7, 2.0, n), lambda g, n: g.gamma(20.0, 0.2, n))),
        (10, "2/3 logN(0,1) + 1/3 logN(1.5,0.1)", _Mixture(2 / 3, ln01, ln15),
         _mix_sampler(2 / 3, lambda g, n: g.lognormal(0.0, 1.0, n),
                      lambda g, n: g.lognormal(1.5, math.sqrt(0.1), n))),
    ]
    out = []
    for i, name, d, draw in dists:
        td = TestDensity(i, name, d.pdf, d.cdf, draw, d.ppf)
        mass = quad_positive(td.pdf, center=float(td.q(0.5)), width=1.0, tol=1e-11)
        if abs(mass - 1.0) > 1e-8:
            raise RuntimeError(f"density {i} integrates to {mass}")
        out.append(td)
    return tuple(out)


@lru_cache(maxsize=1)
def density_registry():
    """The ten test densities, ids 1..10 (validated once per process)."""
    return _build()


def get_density(density_id):
    for d in density_registry():
        if d.id == density_id:
            return d
    raise KeyError(f"unknown density id {density_id!r}; expected 1..10")


# --- estimator configurations -------------------------------------------------

def parse_theta(text):
    """Angle in radians, or one of the tokens ``0``, ``pi/4``, ``pi/2``."""
    t = str(text).strip().lower().replace(" ", "")
    tokens = {"0": 0.0, "pi/4": 0.25 * math.pi, "pi/2": HALF_PI}
    if t in tokens:
        return tokens[t]
    val = float(t)
    if not 0.0 <= val <= HALF_PI + 1e-9:
        raise ValueError(f"theta must lie in [0, pi/2], got {text}")
    return min(val, HALF_PI)


@dataclass(frozen=True)
class EstimatorConfig:
    """One benchmark estimator.

    ``kind`` is ``mm``, ``gamma`` (original Gamma kernel), ``gamma-mod``
    (modified Gamma kernel), ``lognormal`` or ``oracle`` (the true pdf).
    An ``mm`` config uses a fixed ``eta`` when given and the plug-in rule
    with exponent ``c`` otherwise.
    """

    kind: str
    label: str
    xi: float = 1.0
    theta: float = 0.25 * math.pi
    c: float = 1.5
    eta: float = None

    def estimate(self, sample, xs, density=None):
        if self.kind == "mm":
            eta = self.eta
            if eta is None:
                eta = plugin_eta(sample, SelectorConfig(c=self.c))
            return evaluate(fit(sample, KernelShape(self.xi, self.theta), eta), xs)
        if self.kind in ("gamma", "gamma-mod"):
            b = gamma_reference_bandwidth(sample)
            return chen_gamma_kde(sample, b, xs, modified=self.kind == "gamma-mod")
        if self.kind == "lognormal":
            return lognormal_kde(sample, log_normal_reference_bandwidth(sample), xs)
        if self.kind == "oracle":
            return density.pdf(xs)
        raise ValueError(f"unknown estimator kind {self.kind!r}")


def parse_estimator(label):
    """Parse ``mm:XI:THETA:cC`` / ``mm:XI:THETA:etaE``, ``gamma``, ``gamma-mod``,
    ``lognormal`` or ``oracle``."""
    text = label.strip()
    parts = text.split(":")
    kind = parts[0].lower()
    if kind in ("gamma", "gamma-mod", "lognormal", "oracle") and len(parts) == 1:
        return EstimatorConfig(kind, text)
    if kind != "mm" or len(parts) not in (3, 4):
        raise ValueError(f"unknown estimator label {label!r}")
    xi = float(parts[1])
    if not xi > 0:
        raise ValueError(f"xi must be positive in {label!r}")
    theta = parse_theta(parts[2])
    c, eta = 1.5, None
    if len(parts) == 4:
        tail = parts[3].lower()
        if tail.startswith("eta"):
            eta = float(tail[3:])
        elif tail.startswith("c"):
            c = float(tail[1:])
        else:
            raise ValueError(f"last field of {label!r} must be cVALUE or etaVALUE")
    return EstimatorConfig("mm", text, xi, theta, c, eta)


# --- Monte Carlo ------------------------------------------------------------------

@dataclass(frozen=True)
class BenchResult:
    """MISE of one estimator on one density; ``mise`` is the mean of the ISEs."""

    density_id: int
    estimator_label: str
    n: int
    M: int
    mise: float
    per_replicate_ise: tuple = field(repr=False)
    seed: int
    failures: int = 0


def replicate_rng(seed, density_id, replicate):
    return np.random.default_rng(np.random.SeedSequence([seed, density_id, replicate]))


def _ise_block(density_id, config, n, seed, indices):
    d = get_density(density_id)
    xs = d.grid()
    truth = d.pdf(xs)
    out = []
    for r in indices:
        x = d.sampler(replicate_rng(seed, density_id, r), n)
        try:
            est = config.estimate(Sample(x), xs, d)
        except DegenerateSampleError:
            out.append(math.nan)
            continue
        out.append(float(np.mean((est - truth) ** 2)))
    return out


def _run(density_id, config, n, M, seed, workers):
    if workers <= 1 or M < 2:
        return _ise_block(density_id, config, n, seed, range(M))
    blocks = np.array_split(np.arange(M), min(workers, M))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futs = [pool.submit(_ise_block, density_id, config, n, seed, [int(i) for i in b])
                for b in blocks]
        return [v for f in futs for v in f.result()]


def mise(density_id, config, n, M, seed, workers=1):
    """Average grid ISE of ``config`` over ``M`` replicates of size ``n``.

    Replicates where the selector reports a degenerate sample are dropped;
    more than 5% of them aborts with ``RuntimeError``.
    """
    if n < 10 or M < 1:
        raise ValueError("need n >= 10 and M >= 1")
    if isinstance(config, str):
        config = parse_estimator(config)
    ise = _run(density_id, config, n, M, seed, workers)
    failed = sum(math.isnan(v) for v in ise)
    if failed > MAX_FAILURE_RATE * M:
        raise RuntimeError(f"{failed} of {M} replicates failed for {config.label}")
    kept = tuple(v for v in ise if not math.isnan(v))
    return BenchResult(density_id, config.label, n, M, math.fsum(kept) / len(kept), kept,
                       seed, failed)


@dataclass(frozen=True)
class BenchTable:
    results: tuple
    baseline: str = None

    def relative(self, result):
        """MISE of ``result`` over the baseline MISE on the same density."""
        base = self.lookup(result.density_id, self.baseline)
        return result.mise / base.mise

    def lookup(self, density_id, label):
        for r in self.results:
            if r.density_id == density_id and r.estimator_label == label:
                return r
        raise KeyError((density_id, label))

    def to_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        head = ["density", "estimator", "n", "M", "mise"]
        w.writerow(head + (["relative"] if self.baseline else []))
        for r in self.results:
            row = [r.density_id, r.estimator_label, r.n, r.M, format(r.mise, ".17g")]
            if self.baseline:
                row.append(format(self.relative(r), ".17g"))
            w.writerow(row)

    def to_text(self):
        """Estimators as rows, densities as columns, relative MISE when a baseline is set."""
        dens = sorted({r.density_id for r in self.results})
        labels = list(dict.fromkeys(r.estimator_label for r in self.results))
        width = max(len(s) for s in labels + ["estimator"])
        lines = [f"{'estimator':<{width}}" + "".join(f"{'Dens ' + str(d):>12}" for d in dens)]
        for lab in labels:
            cells = []
            for d in dens:
                r = self.lookup(d, lab)
                v = self.relative(r) if self.baseline else r.mise
                cells.append(f"{v:12.4f}" if self.baseline else f"{v:12.4e}")
            lines.append(f"{lab:<{width}}" + "".join(cells))
        return "\n".join(lines) + "\n"


def bench_table(configs, densities, n, M, seed, baseline=None, workers=1):
    """Full factorial of estimators x densities; ``baseline`` names a label."""
    configs = [parse_estimator(c) if isinstance(c, str) else c for c in configs]
    if not configs or not densities:
        raise ValueError("need at least one estimator and one density")
    labels = [c.label for c in configs]
    if baseline is not None and baseline not in labels:
        raise ValueError(f"baseline {baseline!r} is not among the estimators {labels}")
    for d in densities:
        get_density(d)
    results = tuple(mise(d, c, n, M, seed, workers) for d in densities for c in configs)
    return BenchTable(results, baseline)
