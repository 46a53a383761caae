"""Command-line front end: ``rosdist <command> [options]``.

Every command writes one table, as CSV (default) or JSON, to standard
output or ``--out``.  Exit status is 0 on success, 2 for invalid input and
3 when a computation fails to converge.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .cumulants import cumulant_set
from .dist import Rosenblatt, auto_model, get_spectrum
from .errors import ConvergenceError, DomainError
from .levy import LevyModel, levy_density
from .params import check_D
from .spectrum import SpectrumCache, converge_spectrum, leading_eigenvalues

EXIT_USAGE = 2
EXIT_CONVERGENCE = 3

TABLE1_D = (0.1, 0.2, 0.3, 0.4)
TABLE2_N = (2, 3, 4, 5, 6)
TABLE2_M = (10, 20, 30, 50)
TABLE3_D = (0.1, 0.2, 0.3, 0.4, 0.45)
TABLE3_Q = (0.01, 0.025, 0.05, 0.10, 0.25, 0.50, 0.75, 0.90, 0.95, 0.975, 0.99)
# (D, q) cells whose printed reference values break quantile monotonicity
SUSPECT_CELLS = ((0.3, 0.025), (0.45, 0.10))

_TABLE_ALIASES = {"paper1": "table1", "paper2": "table2", "paper3": "table3"}


class UsageError(Exception):
    pass


# --- argument parsing --------------------------------------------------------


def _floats(text):
    """Comma list ``a,b,c`` or linear range ``start:stop:count``."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ":" in part:
                a, b, n = part.split(":")
                out.extend(np.linspace(float(a), float(b), int(n)).tolist())
            else:
                out.append(float(part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number list: {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _int_or_auto(text):
    if text == "auto":
        return "auto"
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'auto', got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rosdist", description="Rosenblatt distribution numerics.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="write to this file instead of standard output")
    common.add_argument("--digits", type=int, default=6, help="significant digits (default 6)")
    common.add_argument("--cache-dir", help="directory for converged spectra")
    common.add_argument("--grid", type=_int_or_auto, default="auto", help="Nystrom panels J, or 'auto'")

    dist = argparse.ArgumentParser(add_help=False)
    dist.add_argument("--terms", type=_int_or_auto, default=50, help="explicit chi-square terms M, or 'auto'")
    dist.add_argument("--edgeworth", type=int, default=6, help="Edgeworth order N")

    s = sub.add_parser("eig", parents=[common], help="leading expansion weights")
    s.add_argument("--d", type=_floats, required=True)
    s.add_argument("--count", type=int, default=10)
    s.add_argument("--unscaled", action="store_true", help="eigenvalues of K_D without the sigma factor")

    s = sub.add_parser("cum", parents=[common], help="c_k, cumulants and moments")
    s.add_argument("--d", type=_floats, required=True)
    s.add_argument("--count", type=int, default=8, help="highest order K")

    for name in ("cdf", "pdf"):
        s = sub.add_parser(name, parents=[common, dist], help=f"{name.upper()} on a grid")
        s.add_argument("--d", type=_floats, required=True)
        s.add_argument("--x", type=_floats, required=True)

    s = sub.add_parser("quantile", parents=[common, dist], help="quantiles")
    s.add_argument("--d", type=_floats, required=True)
    s.add_argument("--q", type=_floats, required=True)

    s = sub.add_parser("levy", parents=[common], help="Levy density on a grid")
    s.add_argument("--d", type=_floats, required=True)
    s.add_argument("--x", type=_floats, required=True, help="points u > 0")
    s.add_argument("--count", type=int, default=50, help="explicit eigenvalues")

    s = sub.add_parser("table", parents=[common, dist], help="regenerate a reference table")
    s.add_argument("kind", choices=("table1", "table2", "table3", *_TABLE_ALIASES))
    return p


# --- computations ----------------------------------------------------------------


def _threads():
    raw = os.environ.get("ROSDIST_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"ROSDIST_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise UsageError("ROSDIST_THREADS must be >= 1")
    return n


def _fanout(fn, items):
    items = list(items)
    n = min(_threads(), len(items))
    if n <= 1:
        return [fn(v) for v in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def _cache(args):
    return SpectrumCache(args.cache_dir) if args.cache_dir else None


def _spectrum(args, D, count):
    D = check_D(D)
    if args.grid == "auto":
        cache = _cache(args)
        if cache is None:
            return get_spectrum(D, count)
        return converge_spectrum(D, max(count, 50), cache=cache)
    return leading_eigenvalues(D, max(count, 50), args.grid)


def _check_count(n, label="--count"):
    if n < 1:
        raise UsageError(f"{label} must be positive")


def _model(args, D, terms=None):
    terms = args.terms if terms is None else terms
    if args.edgeworth < 2:
        raise UsageError("--edgeworth must be >= 2")
    if terms == "auto":
        return auto_model(D, args.edgeworth, args.cache_dir)
    if terms < 4:
        raise UsageError("--terms must be >= 4")
    spec = _spectrum(args, D, terms)
    return Rosenblatt(D, terms, args.edgeworth, spectrum=spec)


def _dlabel(D):
    return f"D = {D:g}"


def cmd_eig(args):
    _check_count(args.count)

    def one(D):
        if args.grid == "auto":
            spec = converge_spectrum(check_D(D), args.count, cache=_cache(args))
            J = spec.J_used
        else:
            J = args.grid
            spec = leading_eigenvalues(D, args.count, J)
        if args.unscaled:
            spec = leading_eigenvalues(D, args.count, J, scaled=False)
        return spec.lambdas[: args.count]

    cols = {"n": list(range(1, args.count + 1))}
    for D, lam in zip(args.d, _fanout(one, args.d)):
        cols[_dlabel(D)] = lam.tolist()
    return cols, {}


def cmd_cum(args):
    if args.count < 2:
        raise UsageError("--count must be >= 2")
    J = None if args.grid == "auto" else args.grid
    cols = {"D": [], "k": [], "c_k": [], "kappa_k": [], "mu_k": []}
    for D, cs in zip(args.d, _fanout(lambda D: cumulant_set(D, args.count, J), args.d)):
        for k in range(1, args.count + 1):
            cols["D"].append(D)
            cols["k"].append(k)
            cols["c_k"].append(cs.c_of(k) if k >= 2 else None)
            cols["kappa_k"].append(cs.kappa[k - 1])
            cols["mu_k"].append(cs.mu[k - 1])
    return cols, {}


def _grid_cmd(args, what):
    x = np.asarray(args.x)
    cols = {"D": [], "x": [], what: []}
    meta = {}

    def one(D):
        m = _model(args, D)
        return m, (m.cdf(x) if what == "cdf" else m.pdf(x))

    for D, (m, vals) in zip(args.d, _fanout(one, args.d)):
        cols["D"].extend([D] * x.size)
        cols["x"].extend(x.tolist())
        cols[what].extend(np.atleast_1d(vals).tolist())
        meta[_dlabel(D)] = {"terms": m.terms, "edgeworth": m.N, "convolution_error": m.convolution_error}
    return cols, {"models": meta}


def cmd_cdf(args):
    return _grid_cmd(args, "cdf")


def cmd_pdf(args):
    return _grid_cmd(args, "pdf")


def cmd_quantile(args):
    for q in args.q:
        if not 0.0 < q < 1.0:
            raise UsageError(f"quantile levels must lie in (0, 1), got {q}")
    cols = {"D": [], "q": [], "quantile": []}

    def one(D):
        m = _model(args, D)
        return [m.quantile(q) for q in args.q]

    for D, xs in zip(args.d, _fanout(one, args.d)):
        cols["D"].extend([D] * len(args.q))
        cols["q"].extend(args.q)
        cols["quantile"].extend(xs)
    return cols, {}


def cmd_levy(args):
    _check_count(args.count)
    u = np.asarray(args.x)
    if np.any(u <= 0):
        raise UsageError("Levy density points must be positive")
    cols = {"D": [], "u": [], "nu": []}
    for D in args.d:
        spec = _spectrum(args, D, args.count)
        vals = levy_density(LevyModel(spec), u)
        cols["D"].extend([D] * u.size)
        cols["u"].extend(u.tolist())
        cols["nu"].extend(np.atleast_1d(vals).tolist())
    return cols, {}


def emit_table(kind, args):
    """Columns for one of the three reference tables, plus trailing comment lines."""
    kind = _TABLE_ALIASES.get(kind, kind)
    if kind == "table1":
        args.d, args.count, args.unscaled = list(TABLE1_D), 10, False
        cols, _ = cmd_eig(args)
        return cols, []
    if kind == "table2":
        cols = {"N": list(TABLE2_N)}
        for M in TABLE2_M:
            vals = []
            for N in TABLE2_N:
                args.edgeworth = N
                vals.append(float(_model(args, 0.3, terms=M).cdf(0.0)))
            cols[f"M = {M}"] = vals
        return cols, []
    if kind == "table3":
        cols = {"Quantile": list(TABLE3_Q)}

        def one(D):
            m = _model(args, D)
            return [m.quantile(q) for q in TABLE3_Q]

        for D, xs in zip(TABLE3_D, _fanout(one, TABLE3_D)):
            cols[_dlabel(D)] = xs
        cells = "; ".join(f"D = {D:g} at q = {q:g}" for D, q in SUSPECT_CELLS)
        note = f"all values computed here; the published reference entries for {cells} violate monotonicity in q"
        return cols, [note]
    raise UsageError(f"unknown table {kind!r}")


def cmd_table(args):
    cols, notes = emit_table(args.kind, args)
    return cols, {"notes": notes}


COMMANDS = {
    "eig": cmd_eig,
    "cum": cmd_cum,
    "cdf": cmd_cdf,
    "pdf": cmd_pdf,
    "quantile": cmd_quantile,
    "levy": cmd_levy,
    "table": cmd_table,
}


# --- output ----------------------------------------------------------------------


def _fmt(v, digits):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.{digits}g}"


def _json_value(v, digits):
    if v is None or isinstance(v, (int, np.integer)):
        return None if v is None else int(v)
    return float(_fmt(v, digits))


def render(cols, meta, args) -> str:
    digits = args.digits
    if args.format == "json":
        config = dict(vars(args))
        doc = {
            "meta": {"version": __version__, "config": config, **{k: v for k, v in meta.items() if v}},
            "data": {k: [_json_value(v, digits) for v in vals] for k, vals in cols.items()},
        }
        return json.dumps(doc, indent=1, default=float) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    names = list(cols)
    w.writerow(names)
    for row in zip(*(cols[n] for n in names)):
        w.writerow([_fmt(v, digits) for v in row])
    for note in meta.get("notes", []):
        buf.write(f"# {note}\n")
    return buf.getvalue()


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if not 1 <= args.digits <= 17:
            raise UsageError("--digits must lie in 1..17")
        cols, meta = COMMANDS[args.command](args)
        text = render(cols, meta, args)
    except (UsageError, DomainError) as exc:
        print(f"rosdist: error: {exc}", file=stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"rosdist: convergence failure: {exc}", file=stderr)
        if exc.report:
            print(json.dumps(exc.report, default=str)[:4000], file=stderr)
        return EXIT_CONVERGENCE
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return 0


def main(argv=None):
    sys.exit(run(argv))
