"""Command-line interface: ``mmkde fit | mellin | bench``.

Every output file starts with a reproducibility header naming the tool
version and the full flag set; for JSON the header is stored under the
``"header"`` key instead of a comment line.  Outputs are written to a
temporary file and renamed into place, so a failed run leaves nothing behind.
"""

import argparse
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .estimator import DensityGrid, evaluate, fit
from .meijer import KernelShape
from .mellin import Sample, analytic_mellin, mellin_line
from .selector import SelectorConfig, select
from .simlab import bench_table, parse_estimator, parse_theta

PROG = "mmkde"


class InputError(ValueError):
    """Malformed data file."""


def read_sample(path):
    """Read one column of positive numbers; an initial text header is skipped.

    Blank lines and lines starting with ``#`` are ignored.  Errors name the
    1-based line number.
    """
    values = []
    seen_data = False
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = [f.strip() for f in line.split(",")]
            if len(fields) != 1:
                raise InputError(f"{path}:{lineno}: expected one column, found {len(fields)}")
            try:
                v = float(fields[0])
            except ValueError:
                if not seen_data and not values:
                    seen_data = True  # header line
                    continue
                raise InputError(f"{path}:{lineno}: not a number: {fields[0]!r}") from None
            seen_data = True
            if not (math.isfinite(v) and v > 0):
                raise InputError(f"{path}:{lineno}: observation must be positive and finite, got {fields[0]}")
            values.append(v)
    if len(values) < 2:
        raise InputError(f"{path}: need at least 2 observations, found {len(values)}")
    return Sample(values)


_NOT_IN_HEADER = ("func", "output", "workers")  # do not change the written results


def _header(args):
    flags = " ".join(f"--{k.replace('_', '-')}={v}" for k, v in sorted(vars(args).items())
                     if k not in _NOT_IN_HEADER)
    return f"{PROG} {__version__} {flags}"


class _Outputs:
    """Collect output files in temporaries and publish them together."""

    def __init__(self):
        self._pending = []

    def open(self, path):
        d = os.path.dirname(os.path.abspath(path))
        fd, tmp = tempfile.mkstemp(prefix=".mmkde-", dir=d)
        fh = os.fdopen(fd, "w", encoding="utf-8", newline="")
        self._pending.append((tmp, path, fh))
        return fh

    def commit(self):
        for _, _, fh in self._pending:
            fh.close()
        for tmp, path, _ in self._pending:
            os.replace(tmp, path)
        self._pending = []

    def discard(self):
        for tmp, _, fh in self._pending:
            fh.close()
            if os.path.exists(tmp):
                os.remove(tmp)
        self._pending = []


def _sidecar_path(path):
    return path + ".meta.json"


def cmd_fit(args, out):
    s = read_sample(args.input)
    shape = KernelShape(args.xi, args.theta)
    meta = {"xi": shape.xi, "theta": shape.theta, "n": s.n}
    if args.eta is not None:
        eta = args.eta
        meta.update(eta=eta, c=None, selector="manual", T0=None)
    else:
        sel = select(s, SelectorConfig(c=args.c))
        eta = sel.eta
        meta.update(eta=eta, c=args.c, selector="plugin", T0=sel.t0)
    lo = args.grid_min if args.grid_min is not None else float(np.min(s.values)) / 100
    hi = args.grid_max if args.grid_max is not None else float(np.quantile(s.values, 0.999))
    if not 0 <= lo < hi:
        raise ValueError(f"grid bounds must satisfy 0 <= min < max, got [{lo}, {hi}]")
    xs = np.linspace(lo, hi, args.grid_count)
    grid = DensityGrid(xs, evaluate(fit(s, shape, eta), xs))
    header = _header(args)
    fh = out.open(args.output)
    if args.format == "json":
        grid.to_json(fh, meta={"header": header, **meta})
    else:
        fh.write(f"# {header}\n")
        grid.to_csv(fh)
    with out.open(_sidecar_path(args.output)) as side:
        json.dump({"header": header, **meta}, side, indent=1)
        side.write("\n")


def _parse_analytic(text):
    name, _, rest = text.partition(":")
    if not name or not rest:
        raise ValueError(f"--analytic expects NAME:P1[,P2...], got {text!r}")
    return name, tuple(float(p) for p in rest.split(","))


def cmd_mellin(args, out):
    s = read_sample(args.input)
    line = mellin_line(s, args.c, omega_max=args.omega_max, step=args.step)
    extra = {}
    if args.analytic:
        name, params = _parse_analytic(args.analytic)
        extra["analytic_abs"] = np.abs(analytic_mellin(name, params, args.c + 1j * line.omegas))
    fh = out.open(args.output)
    fh.write(f"# {_header(args)}\n")
    line.to_csv(fh, extra)


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def cmd_bench(args, out):
    configs = [parse_estimator(t) for t in args.estimators.split(",") if t.strip()]
    table = bench_table(configs, args.densities, args.n, args.M, args.seed,
                        baseline=args.relative, workers=args.workers)
    fh = out.open(args.output)
    fh.write(f"# {_header(args)}\n")
    if args.format == "text":
        fh.write(table.to_text())
    else:
        table.to_csv(fh)


def _positive(kind):
    def conv(text):
        v = kind(text)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    return conv


def _theta(text):
    try:
        return parse_theta(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser():
    p = argparse.ArgumentParser(prog=PROG, description="Mellin-Meijer kernel density estimation")
    p.add_argument("--version", action="version", version=f"{PROG} {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="estimate a density on a grid")
    f.add_argument("--input", required=True)
    f.add_argument("--output", required=True)
    f.add_argument("--xi", type=_positive(float), default=1.0)
    f.add_argument("--theta", type=_theta, default=0.25 * math.pi,
                   help="radians or 0, pi/4, pi/2 (default pi/4)")
    f.add_argument("--eta", type=_positive(float), help="smoothing parameter; skips the selector")
    f.add_argument("--c", type=_positive(float), help="selector weight exponent (default 1.5)")
    f.add_argument("--grid-min", type=float)
    f.add_argument("--grid-max", type=float)
    f.add_argument("--grid-count", type=int, default=512)
    f.add_argument("--format", choices=("csv", "json"), default="csv")
    f.set_defaults(func=cmd_fit)

    m = sub.add_parser("mellin", help="empirical Mellin transform along Re(z) = c")
    m.add_argument("--input", required=True)
    m.add_argument("--output", required=True)
    m.add_argument("--c", type=float, default=1.5)
    m.add_argument("--omega-max", type=_positive(float), default=200.0)
    m.add_argument("--step", type=_positive(float), default=0.01)
    m.add_argument("--analytic", help="add |M(f; c+iw)| for NAME:P1[,P2...], e.g. exp:1")
    m.set_defaults(func=cmd_mellin)

    b = sub.add_parser("bench", help="Monte Carlo MISE table")
    b.add_argument("--output", required=True)
    b.add_argument("--densities", type=_int_list, required=True, help="e.g. 2,4,8")
    b.add_argument("--estimators", required=True,
                   help="comma-separated labels: mm:XI:THETA:cC, mm:XI:THETA:etaE, gamma, "
                        "gamma-mod, lognormal")
    b.add_argument("--n", type=int, default=100)
    b.add_argument("--M", type=int, default=100)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--relative", metavar="LABEL", help="report MISE relative to this estimator")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--format", choices=("csv", "text"), default="csv")
    b.set_defaults(func=cmd_bench)
    return p


def _validate(p, args):
    if args.command == "fit":
        if args.eta is not None and args.c is not None:
            p.error("--eta and --c are mutually exclusive")
        if args.c is None:
            args.c = 1.5
        if args.grid_count < 2:
            p.error("--grid-count must be at least 2")
    if args.command == "bench":
        if args.n < 10 or args.M < 1 or args.workers < 1:
            p.error("need --n >= 10, --M >= 1 and --workers >= 1")
        labels = [t.strip() for t in args.estimators.split(",") if t.strip()]
        if args.relative is not None and args.relative not in labels:
            p.error(f"--relative {args.relative!r} is not one of --estimators")


def main(argv=None):
    p = build_parser()
    args = p.parse_args(argv)
    _validate(p, args)
    out = _Outputs()
    try:
        args.func(args, out)
        out.commit()
    except (OSError, ValueError, KeyError, RuntimeError) as exc:
        out.discard()
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"{PROG}: error: {msg}", file=sys.stderr)
        return 1
    except BaseException:
        out.discard()
        raise
    return 0


if __name__ == "__main__":
    sys.exit(main())
