"""Command-line entry point: ``mfpp {ml,moments,simulate,lrd,srd} ...``.

Exit codes: 0 success, 1 invalid input, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .errors import InsufficientData, MfppError, NumericalError
from .estimation import SimOptions, lrd_report, srd_report
from .moments import moment_report
from .params import MfppConfig, MixedStableParams
from .simulation import KINDS, SimGrid, simulate_ensemble, with_lag
from .special import ml3

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse would print usage and exit(2); we want a one-line message and exit 1
    def error(self, message):
        raise _UsageError(message)


# ------------------------------------------------------------------ parsing

def _process_flags(p):
    p.add_argument("--alpha1", type=float, default=0.9)
    p.add_argument("--alpha2", type=float, default=0.5)
    p.add_argument("--c1", type=float, default=0.5)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=1.0)


def _grid_flags(p, t_min=0.1, t_max=100.0, points=20, spacing="log"):
    p.add_argument("--t-min", type=float, default=t_min)
    p.add_argument("--t-max", type=float, default=t_max)
    p.add_argument("--points", type=int, default=points)
    p.add_argument("--spacing", choices=("linear", "log"), default=spacing)


def _sim_flags(p, paths):
    p.add_argument("--ds", type=float, default=None)
    p.add_argument("--paths", type=int, default=paths)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--threads", type=int, default=1)


def _output_flags(p, fmt="csv"):
    p.add_argument("--out", default=None, help="output path (stdout when omitted)")
    p.add_argument("--format", choices=("csv", "json"), default=fmt)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mfpp", description="Mixed fractional Poisson process toolkit")
    parser.add_argument("--version", action="version", version=f"mfpp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ml", help="evaluate a (three-parameter) Mittag-Leffler function")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--x", type=float, required=True)
    _output_flags(p, "json")

    p = sub.add_parser("moments", help="tabulate analytic moments on a time grid")
    _process_flags(p)
    _grid_flags(p)
    p.add_argument("--s", type=float, default=None, help="add Cov(Y(s), Y(t)) columns")
    _output_flags(p)

    p = sub.add_parser("simulate", help="Monte Carlo ensemble of paths")
    _process_flags(p)
    _grid_flags(p, t_min=1.0, t_max=10.0, points=10, spacing="linear")
    _sim_flags(p, paths=1000)
    p.add_argument("--kind", choices=KINDS, default="mfpp")
    p.add_argument("--summary", default=None, help="also write a binary .npz summary")
    _output_flags(p)

    for name, help_ in (("lrd", "fit the MFPP correlation decay"), ("srd", "fit the MFPN correlation decay")):
        p = sub.add_parser(name, help=help_)
        _process_flags(p)
        _sim_flags(p, paths=200_000)
        p.add_argument("--s", type=float, default=1.0)
        p.add_argument("--window", type=float, nargs=2, default=(50.0, 500.0), metavar=("LO", "HI"))
        p.add_argument("--fit-points", type=int, default=8)
        p.add_argument("--tolerance", type=float, default=None)
        _output_flags(p, "json")
    return parser


def _config(args) -> MfppConfig:
    return MfppConfig(MixedStableParams.from_c1(args.alpha1, args.alpha2, args.c1), args.lam, args.delta)


def _grid(args) -> np.ndarray:
    if args.points < 1:
        raise _UsageError("--points must be at least 1")
    if not (0 < args.t_min <= args.t_max) or (args.points > 1 and args.t_min == args.t_max):
        raise _UsageError("need 0 < --t-min < --t-max")
    if args.points == 1:
        return np.array([args.t_min])
    if args.spacing == "log":
        return np.geomspace(args.t_min, args.t_max, args.points)
    return np.linspace(args.t_min, args.t_max, args.points)


def _check_seed(seed):
    if not (0 <= seed < 2**64):
        raise _UsageError("--seed must be a 64-bit unsigned integer")


# ------------------------------------------------------------------ output

def _metadata(command, args, extra=None) -> dict:
    """Everything that determines the result. ``--threads`` is left out on purpose."""
    meta = {"tool": "mfpp", "version": __version__, "command": command}
    for key in ("alpha1", "alpha2", "c1", "lam", "delta", "t_min", "t_max", "points",
                "spacing", "ds", "paths", "seed", "kind", "s", "window", "fit_points",
                "tolerance", "alpha", "beta", "gamma", "x"):
        if hasattr(args, key):
            val = getattr(args, key)
            meta[key] = list(val) if isinstance(val, tuple) else val
    if "c1" in meta:
        meta["c2"] = 1.0 - meta["c1"]
    if extra:
        meta.update(extra)
    return meta


def _num(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _csv_text(meta, header, rows, comments=()) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(meta, sort_keys=False) + "\n")
    for line in comments:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(v) for v in row])
    return buf.getvalue()


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def _json_clean(o):
    if isinstance(o, float) and not math.isfinite(o):
        return None
    if isinstance(o, dict):
        return {k: _json_clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_json_clean(v) for v in o]
    return o


def _json_text(meta, body: dict) -> str:
    doc = {"metadata": meta, **body}
    return json.dumps(_json_clean(doc), default=_json_default, indent=2) + "\n"


def write_atomic(path, data, mode="w"):
    """Write to a sibling temp file, then rename over ``path``."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, mode) as fh:
            if callable(data):
                data(fh)
            else:
                fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(args, text, stdout):
    if args.out is None:
        stdout.write(text)
    else:
        write_atomic(args.out, text)


# ------------------------------------------------------------------ commands

def _cmd_ml(args, stdout):
    res = ml3(args.alpha, args.beta, args.gamma, args.x)
    meta = _metadata("ml", args)
    body = {"value": res.value, "est_abs_error": res.est_abs_error, "regime": res.regime.value}
    if args.format == "csv":
        text = _csv_text(meta, ["value", "est_abs_error", "regime"], [[res.value, res.est_abs_error, res.regime.value]])
    else:
        text = _json_text(meta, body)
    if args.out is None:
        stdout.write(f"{res.value!r} {res.regime.value}\n")
    else:
        write_atomic(args.out, text)


def _cmd_moments(args, stdout):
    cfg = _config(args)
    report = moment_report(cfg, _grid(args), s=args.s)
    names, rows = report.to_rows()
    meta = _metadata("moments", args)
    if args.format == "csv":
        text = _csv_text(meta, names, ([r[n] for n in names] for r in rows))
    else:
        text = _json_text(meta, {"rows": rows})
    _emit(args, text, stdout)


def ensemble_summary(ens) -> dict:
    """Per-time mean/variance and, for count paths, the count histogram."""
    vals = ens.values
    out = {
        "t": np.asarray(ens.times, dtype=float),
        "mean": vals.mean(axis=0),
        "var": vals.var(axis=0, ddof=1) if vals.shape[0] > 1 else np.zeros(vals.shape[1]),
        "n_paths": np.int64(vals.shape[0]),
    }
    if np.issubdtype(vals.dtype, np.integer):
        top = int(vals.max()) + 1 if vals.size else 1
        out["counts"] = np.stack([np.bincount(col, minlength=top) for col in vals.T])
    return out


def _cmd_simulate(args, stdout):
    _check_seed(args.seed)
    if args.paths < 1:
        raise _UsageError("--paths must be at least 1")
    cfg = _config(args)
    t = _grid(args)
    points = None
    if args.kind == "mfpn":
        points = t
        t = with_lag(t, cfg.delta)
    grid = SimGrid.build(cfg.params, t, ds=args.ds)
    ens = simulate_ensemble(cfg, grid, args.paths, args.seed, args.kind, args.threads, t_points=points)
    meta = _metadata("simulate", args, {"ds_used": grid.ds, "s_cap": grid.s_cap})
    times = ens.times
    if args.format == "csv":
        rows = ((r, times[j], ens.values[r, j]) for r in range(ens.n_paths) for j in range(times.size))
        text = _csv_text(meta, ["replicate", "t", "value"], rows)
    else:
        text = _json_text(meta, {"t": times, "values": ens.values})
    _emit(args, text, stdout)
    if args.summary:
        summary = ensemble_summary(ens)
        summary["metadata"] = np.array(json.dumps(meta))
        write_atomic(args.summary, lambda fh: np.savez_compressed(fh, **summary), mode="wb")


def _cmd_dependence(args, stdout):
    _check_seed(args.seed)
    if args.paths < 2:
        raise _UsageError("--paths must be at least 2")
    cfg = _config(args)
    opts = SimOptions(n_paths=args.paths, seed=args.seed, s=args.s, window=tuple(args.window),
                      n_points=args.fit_points, ds=args.ds, threads=args.threads,
                      tolerance=args.tolerance)
    report = (lrd_report if args.command == "lrd" else srd_report)(cfg, opts)
    meta = _metadata(args.command, args, {"ds_used": report.grid.ds, "s_cap": report.grid.s_cap})
    if args.format == "json":
        text = _json_text(meta, report.to_dict())
    else:
        fit = report.fit.to_dict()
        c = report.curve
        comments = [f"{k}={fit[k]!r}" for k in fit]
        rows = zip(c.t_points, c.corr, c.stderr, c.valid.astype(int))
        text = _csv_text(meta, ["t", "corr", "stderr", "valid"], rows, comments)
    _emit(args, text, stdout)


_COMMANDS = {"ml": _cmd_ml, "moments": _cmd_moments, "simulate": _cmd_simulate,
             "lrd": _cmd_dependence, "srd": _cmd_dependence}


def run(argv=None, stdout=None, stderr=None) -> int:
    """Run one command; returns the process exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        _COMMANDS[args.command](args, stdout)
    except _UsageError as exc:
        stderr.write(f"mfpp: error: {exc}\n")
        return EXIT_INVALID
    except (NumericalError, OverflowError, InsufficientData) as exc:
        stderr.write(f"mfpp: numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except (MfppError, ValueError) as exc:
        stderr.write(f"mfpp: error: {' '.join(str(exc).split())}\n")
        return EXIT_INVALID
    except OSError as exc:
        stderr.write(f"mfpp: error: {exc}\n")
        return EXIT_INVALID
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
