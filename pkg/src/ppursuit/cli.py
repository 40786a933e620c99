"""Command-line front end: ``ppursuit <subcommand> ...``.

Exit status is 0 on success, 2 for usage errors (argparse) and 1 for data
errors, which are reported as a single ``ppursuit: error: ...`` line.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .betas import cmd_betas, cmd_rolling
from .comoments import TrimSpec
from .grid import GridConfig
from .indices import DEFAULT_OMEGA, CapiWeights, IndexSpec
from .ingest import RETURN_METHODS, ReturnsPanel, align, load_ohlc_csv, read_panel_csv
from .pursuit import PursuitModel, fit, predict, transform
from .skewt_sim import CSV_COLUMNS, SimSetting, run_simulation

__all__ = ["build_parser", "main"]


class DataError(Exception):
    """Problem with input data or files (exit status 1)."""


# -- small helpers -----------------------------------------------------------

def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _orders(text: str) -> list[int]:
    vals = _ints(text)
    if not vals or any(v not in (2, 3, 4) for v in vals):
        raise argparse.ArgumentTypeError("orders must be drawn from 2,3,4")
    return vals


def _index_spec(text: str) -> IndexSpec:
    try:
        return IndexSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _alpha(text: str) -> float:
    try:
        return TrimSpec.of(float(text)).alpha
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to a temporary file next to ``path``, then rename it."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".ppursuit-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(text: str, out: str | None) -> None:
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _table_text(header, rows) -> str:
    cells = [list(map(str, header))] + [
        [f"{v:.3f}" if isinstance(v, float) else str(v) for v in r] for r in rows
    ]
    widths = [max(len(r[j]) for r in cells) for j in range(len(header))]
    lines = []
    for i, r in enumerate(cells):
        lines.append("  ".join(c.ljust(widths[0]) if j == 0 else c.rjust(widths[j])
                               for j, c in enumerate(r)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * wd for wd in widths))
    return "\n".join(lines) + "\n"


def _full(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else v


def _grid_cfg(args) -> GridConfig:
    return GridConfig(n_angles=args.grid_angles, max_sweeps=args.max_sweeps, tol=args.tol)


def _returns_panel(path: str, index_col: str, method: str) -> ReturnsPanel:
    dates, M, names, y = read_panel_csv(path, index_col)
    if method != "none":
        if M.shape[0] < 3:
            raise DataError("panel needs at least three rows")
        if method == "diff":
            M, y = np.diff(M, axis=0), np.diff(y)
        elif method in ("simple", "log"):
            if np.any(M <= 0) or np.any(y <= 0):
                raise DataError(f"{method} returns need positive prices")
            if method == "simple":
                M, y = np.diff(M, axis=0) / M[:-1], np.diff(y) / y[:-1]
            else:
                M, y = np.diff(np.log(M), axis=0), np.diff(np.log(y))
        dates = dates[1:]
    return ReturnsPanel(tuple(dates), M, names, y, index_col)


def _read_matrix(path: str):
    """Numeric CSV with a header; a leading ``Date`` column is kept as labels."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if any(c.strip() for c in r)]
    if len(rows) < 2:
        raise DataError(f"{path}: no data rows")
    header = [h.strip() for h in rows[0]]
    start = 1 if header[0].lower() == "date" else 0
    labels, vals = [], []
    for i, r in enumerate(rows[1:], start=1):
        if len(r) != len(header):
            raise DataError(f"{path}: row {i}: expected {len(header)} fields, got {len(r)}")
        try:
            vals.append([float(c) for c in r[start:]])
        except ValueError as exc:
            raise DataError(f"{path}: row {i}: {exc}") from None
        labels.append(r[0] if start else str(i))
    M = np.array(vals, dtype=float)
    if not np.all(np.isfinite(M)):
        raise DataError(f"{path}: non-finite value")
    return header[start:], M, labels, header[0] if start else None


# -- subcommands ---------------------------------------------------------------

def run_panel(args) -> None:
    series = [load_ohlc_csv(p) for p in args.csv]
    market = load_ohlc_csv(args.index, args.index_name) if args.index else None
    names = [s.symbol for s in series] + ([market.symbol] if market else [])
    if len(set(names)) != len(names):
        raise DataError("duplicate symbol names")
    if args.returns == "none":
        common = set(series[0].dates)
        for s in series[1:] + ([market] if market else []):
            common &= set(s.dates)
        dates = sorted(common)
        if not dates:
            raise DataError("empty date intersection")
        adjusted = args.price_field == "adj"
        cols = [s.subset(dates).prices(adjusted) for s in series]
        if market:
            cols.append(market.subset(dates).prices(adjusted))
        rows = [[d.isoformat(), *(repr(float(c[i])) for c in cols)] for i, d in enumerate(dates)]
        _emit(_csv_text(["Date", *names], rows), args.out)
        return
    panel = align(series, market, args.returns, args.price_field == "adj")
    rows = []
    for i, d in enumerate(panel.dates):
        r = [d.isoformat(), *(repr(float(v)) for v in panel.matrix[i])]
        if panel.y is not None:
            r.append(repr(float(panel.y[i])))
        rows.append(r)
    _emit(_csv_text(["Date", *names], rows), args.out)


def run_betas(args) -> None:
    panel = _returns_panel(args.panel, args.index_col, args.returns)
    omega = CapiWeights(tuple(args.omega))
    rep = cmd_betas(panel, omega, TrimSpec.of(args.trim), args.orders, args.scaled, _grid_cfg(args))
    header = rep.header()
    rows = [[s, b, *ws] for s, b, ws in rep.rows()]
    if args.format == "json":
        text = json.dumps(rep.to_dict(), indent=2) + "\n"
    elif args.format == "csv":
        text = _csv_text(header, [[_full(v) for v in r] for r in rows])
    else:
        text = _table_text(header, rows)
    _emit(text, args.out)


def run_rolling(args) -> None:
    panel = _returns_panel(args.panel, args.index_col, args.returns)
    omega = CapiWeights(tuple(args.omega))
    rep = cmd_rolling(panel, omega, TrimSpec.of(args.trim), args.window, args.scaled,
                      _grid_cfg(args), args.min_rows)
    if args.format == "json":
        text = json.dumps(rep.to_dict(), indent=2) + "\n"
    elif args.format == "csv":
        W = rep.weight_matrix
        header = ["symbol", *rep.window_labels, "mean", "std"]
        rows = [[s, *(_full(v) for v in W[:, j]), _full(rep.mean[j]), _full(rep.sd[j])]
                for j, s in enumerate(rep.symbols)]
        text = _csv_text(header, rows)
    else:
        rows = [[s, float(rep.mean[j]), float(rep.sd[j])] for j, s in enumerate(rep.symbols)]
        text = _table_text(["symbol", "mean", "std"], rows)
        text += f"windows: {len(rep.window_labels)}"
        if rep.skipped:
            text += f"; skipped: {', '.join(rep.skipped)}"
        text += "\n"
    _emit(text, args.out)


def run_fit(args) -> None:
    names, M, _, _ = _read_matrix(args.x)
    y = None
    if args.y_col is not None:
        if args.y_col not in names:
            raise DataError(f"{args.x}: no column named {args.y_col!r}")
        j = names.index(args.y_col)
        y = M[:, j]
        M = np.delete(M, j, axis=1)
        names = names[:j] + names[j + 1:]
    model = fit(M, y, args.index, args.components, _grid_cfg(args), args.seed, names)
    _emit(model.to_json() + "\n", args.model_out)


def run_predict(args) -> None:
    with open(args.model) as fh:
        try:
            model = PursuitModel.from_json(fh.read())
        except (KeyError, TypeError, json.JSONDecodeError) as exc:
            raise DataError(f"{args.model}: not a model file ({exc})") from None
    names, M, labels, label_name = _read_matrix(args.x)
    if model.column_names is not None:
        missing = [c for c in model.column_names if c not in names]
        if missing:
            raise DataError(f"{args.x}: missing columns {', '.join(missing)}")
        M = M[:, [names.index(c) for c in model.column_names]]
    if args.scores or model.gamma is None:
        vals = transform(model, M)
        header = [f"t{i + 1}" for i in range(model.h)]
    else:
        vals = predict(model, M)[:, None]
        header = ["prediction"]
    rows = [[lab, *(repr(float(v)) for v in row)] for lab, row in zip(labels, vals)]
    _emit(_csv_text([label_name or "row", *header], rows), args.out)


def run_simulate(args, parser) -> None:
    cells = itertools.product(args.sigma_eps, args.nu, args.phi, args.omega_offdiag, args.trim)
    rows = []
    for sig, nu, phi, off, trim in cells:
        target = "none" if phi == 0 else args.contam
        if phi != 0 and target == "none":
            parser.error("--phi > 0 needs --contam latent or x")
        setting = SimSetting(sigma_eps=sig, nu=nu, phi=phi, omega_offdiag=off,
                             contam_target=target, n=args.n, trim_alpha=trim,
                             n_runs=args.runs, slant=tuple(args.slant),
                             grid=_grid_cfg(args))
        summary = run_simulation(setting, seed=args.seed, threads=args.threads)
        rows.append(summary.to_row())
    text = _csv_text(CSV_COLUMNS, [[_full(r[c]) for c in CSV_COLUMNS] for r in rows])
    _emit(text, args.out)


# -- parser --------------------------------------------------------------------

def _add_grid(p, angles=90, tol=1e-6) -> None:
    g = p.add_argument_group("grid search")
    g.add_argument("--grid-angles", type=int, default=angles, help="grid points per scan (default %(default)s)")
    g.add_argument("--max-sweeps", type=int, default=25, help="sweeps over all coordinates (default %(default)s)")
    g.add_argument("--tol", type=float, default=tol, help="convergence tolerance (default %(default)s)")


def _add_report(p) -> None:
    p.add_argument("--panel", required=True, help="wide CSV: Date, one column per security, index column")
    p.add_argument("--index-col", required=True, help="name of the market index column")
    p.add_argument("--trim", type=_alpha, default=0.0, help="total trimming fraction (default 0)")
    p.add_argument("--returns", choices=(*RETURN_METHODS, "none"), default="diff",
                   help="convert prices to returns; 'none' if the panel already holds returns "
                        "(default %(default)s)")
    p.add_argument("--scaled", action="store_true", help="use scale-free co-moments")
    p.add_argument("--format", choices=("table", "csv", "json"), default="table")
    p.add_argument("--out", help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ppursuit", description="Co-moment projection pursuit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("panel", help="align Yahoo-format price files into a wide CSV")
    p.add_argument("csv", nargs="+", help="one daily OHLC file per security (symbol = file stem)")
    p.add_argument("--index", help="daily OHLC file of the market index")
    p.add_argument("--index-name", help="column name for the index (default: file stem)")
    p.add_argument("--price-field", choices=("adj", "close"), default="adj")
    p.add_argument("--returns", choices=(*RETURN_METHODS, "none"), default="none",
                   help="write returns instead of prices (default: prices)")
    p.add_argument("--out", help="output file (default stdout)")

    p = sub.add_parser("betas", help="classical betas and CAPI weights per maximum order")
    _add_report(p)
    p.add_argument("--omega", type=_floats, default=list(DEFAULT_OMEGA), help="six CAPI weights")
    p.add_argument("--orders", type=_orders, default=[2, 3, 4], help="maximum orders (default 2,3,4)")
    _add_grid(p)

    p = sub.add_parser("rolling", help="CAPI weights per calendar month with mean and std")
    _add_report(p)
    p.add_argument("--window", choices=("monthly",), default="monthly")
    p.add_argument("--omega", type=_floats, default=[1.0, 0.5, 0.5], help="CAPI weights (default 1,.5,.5)")
    p.add_argument("--min-rows", type=int, default=15, help="skip windows with fewer rows")
    _add_grid(p)

    p = sub.add_parser("fit", help="fit a projection pursuit model")
    p.add_argument("--x", required=True, help="numeric CSV with header")
    p.add_argument("--y-col", help="dependent column (omit for unsupervised indices)")
    p.add_argument("--index", type=_index_spec, default=IndexSpec(), help="index spec, e.g. capi:trim=0.1")
    p.add_argument("--components", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model-out", help="model JSON (default stdout)")
    _add_grid(p)

    p = sub.add_parser("predict", help="apply a fitted model to new rows")
    p.add_argument("--model", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--scores", action="store_true", help="write component scores instead of predictions")
    p.add_argument("--out", help="output CSV (default stdout)")

    p = sub.add_parser("simulate", help="skew-t simulation study")
    p.add_argument("--nu", type=_floats, default=[50.0], help="degrees of freedom (comma list)")
    p.add_argument("--phi", type=_floats, default=[0.0], help="contamination fraction (comma list)")
    p.add_argument("--contam", choices=("none", "latent", "x"), default="none")
    p.add_argument("--omega-offdiag", type=_floats, default=[0.0])
    p.add_argument("--sigma-eps", type=_floats, default=[0.001])
    p.add_argument("--trim", type=_floats, default=[0.0])
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--n", type=int, default=1000, help="observations per replicate")
    p.add_argument("--slant", type=_floats, default=[-5.0, 5.0], help="skew-t slant vector")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=None, help="worker threads (default PPURSUIT_THREADS)")
    p.add_argument("--out", help="output CSV (default stdout)")
    _add_grid(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "panel": run_panel,
        "betas": run_betas,
        "rolling": run_rolling,
        "fit": run_fit,
        "predict": run_predict,
        "simulate": lambda a: run_simulate(a, parser),
    }
    try:
        handlers[args.command](args)
    except (DataError, ValueError, RuntimeError, OSError, ArithmeticError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"ppursuit: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
