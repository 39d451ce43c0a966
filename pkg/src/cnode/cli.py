"""Command-line front end: ``cnode {vgc,ltv,szego,simulate}``.

Exit codes: 0 success, 2 usage or invalid input, 3 numeric/convergence
failure.  Errors are also written to stderr as one JSON object.  Option
values resolve as command-line flags > ``--config`` JSON > defaults; the
config file may hold flat keys or a section per subcommand.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import ltv, montecarlo, spectral, weyl
from .exceptions import ConvergenceError, InvalidInputError, NumericError
from .io import load_channel, write_json
from .quadrature import QuadratureConfig
from .symbols import GaussianSymbol, WeylSymbolModel, load_symbol
from .tables import SweepTable

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

DEFAULTS = {
    "common": {"output": None, "format": "csv", "quiet": False},
    "vgc": {"noise": None, "budget": None, "snr": None, "snr_db": None},
    "ltv": {"gaussian": None, "symbol": None, "t_axis": None, "omega_axis": None,
            "r": 1.0, "noise_psd": 1.0, "snr": None, "snr_db": None,
            "closed_form": False, "tol": 1e-8, "truncation_radius": None,
            "max_refinement": 200},
    "szego": {"gaussian": None, "symbol": None, "t_axis": None, "omega_axis": None,
              "snr": None, "r": None, "noise_psd": 1.0, "n_points": None,
              "extent": None, "tol": 1e-8},
    "simulate": {"noise": None, "snr": None, "trials": None, "seed": 0,
                 "input_mode": "capacity_achieving", "coefficients": None,
                 "dump_samples": None, "format": "json"},
}


class UsageError(InvalidInputError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _report_error("usage", message, EXIT_USAGE)
        self.print_usage(sys.stderr)
        sys.exit(EXIT_USAGE)


def _report_error(kind, message, code):
    sys.stderr.write(json.dumps({"error": kind, "message": str(message),
                                 "exit_code": code}) + "\n")


def parse_range(text) -> np.ndarray:
    """``start:stop:step`` (stop inclusive), a comma list, or a single value."""
    if isinstance(text, (int, float)):
        return np.array([float(text)])
    if isinstance(text, (list, tuple)):
        return np.asarray(text, dtype=float)
    text = str(text).strip()
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3:
                raise ValueError
            start, stop, step = parts
            if step <= 0 or stop < start:
                raise ValueError
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            return start + step * np.arange(n)
        return np.array([float(p) for p in text.split(",") if p.strip()])
    except ValueError:
        raise UsageError(f"bad range {text!r}; expected start:stop:step or a,b,c") from None


def _common(p):
    p.add_argument("--output", "-o", default=argparse.SUPPRESS, help="output path (default stdout)")
    p.add_argument("--format", choices=["csv", "json"], default=argparse.SUPPRESS)
    p.add_argument("--quiet", "-q", action="store_true", default=argparse.SUPPRESS)
    p.add_argument("--config", default=argparse.SUPPRESS, help="JSON file with option values")


def _symbol_opts(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--gaussian", type=float, metavar="GAMMA", default=argparse.SUPPRESS,
                   help="Gaussian symbol with shear gamma")
    g.add_argument("--symbol", default=argparse.SUPPRESS,
                   help="symbol file (JSON, or CSV grid with --t-axis/--omega-axis)")
    p.add_argument("--t-axis", default=argparse.SUPPRESS)
    p.add_argument("--omega-axis", default=argparse.SUPPRESS)
    p.add_argument("--noise-psd", type=float, default=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cnode", description=__doc__.splitlines()[0])
    _common(parser)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("vgc", help="vector Gaussian channel: waterfilling or snr sweep")
    _common(p)
    p.add_argument("--matrix", default=argparse.SUPPRESS, help="CSV or JSON channel matrix")
    p.add_argument("--noise", type=float, default=argparse.SUPPRESS, help="noise variance")
    p.add_argument("--budget", type=float, default=argparse.SUPPRESS, help="input energy S")
    p.add_argument("--snr", default=argparse.SUPPRESS, help="linear snr range")
    p.add_argument("--snr-db", default=argparse.SUPPRESS, help="snr range in dB")

    p = sub.add_parser("ltv", help="continuous-time channel integrals over an snr sweep")
    _common(p)
    _symbol_opts(p)
    p.add_argument("--r", type=float, default=argparse.SUPPRESS, help="spreading factor")
    p.add_argument("--snr", default=argparse.SUPPRESS)
    p.add_argument("--snr-db", default=argparse.SUPPRESS)
    p.add_argument("--closed-form", action="store_true", default=argparse.SUPPRESS,
                   help="add exact Gaussian-symbol columns and relative errors")
    p.add_argument("--tol", type=float, default=argparse.SUPPRESS)
    p.add_argument("--truncation-radius", type=float, default=argparse.SUPPRESS)
    p.add_argument("--max-refinement", type=int, default=argparse.SUPPRESS)

    p = sub.add_parser("szego", help="eigenvalue count versus phase-space area")
    _common(p)
    _symbol_opts(p)
    p.add_argument("--snr", type=float, default=argparse.SUPPRESS)
    p.add_argument("--r", default=argparse.SUPPRESS, help="comma list of spreads")
    p.add_argument("--n-points", default=argparse.SUPPRESS, help="grid size (or comma list)")
    p.add_argument("--extent", default=argparse.SUPPRESS, help="grid half-width (or comma list)")
    p.add_argument("--tol", type=float, default=argparse.SUPPRESS)

    p = sub.add_parser("simulate", help="Monte-Carlo matched-filter receiver")
    _common(p)
    p.add_argument("--matrix", default=argparse.SUPPRESS)
    p.add_argument("--noise", type=float, default=argparse.SUPPRESS)
    p.add_argument("--snr", type=float, default=argparse.SUPPRESS)
    p.add_argument("--trials", type=int, default=argparse.SUPPRESS)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    p.add_argument("--input-mode", choices=["capacity_achieving", "fixed_coefficients"],
                   default=argparse.SUPPRESS)
    p.add_argument("--coefficients", default=argparse.SUPPRESS,
                   help="comma list of a_k for fixed_coefficients")
    p.add_argument("--dump-samples", default=argparse.SUPPRESS,
                   help="write raw detection errors to this CSV")
    return parser


def resolve_options(command: str, flags: dict) -> dict:
    """Merge defaults, the optional ``--config`` file and explicit flags."""
    opts = dict(DEFAULTS["common"])
    opts.update(DEFAULTS[command])
    cfg_path = flags.get("config")
    if cfg_path:
        try:
            cfg = json.loads(Path(cfg_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {cfg_path}: {exc}") from None
        section = dict(cfg.get(command, {})) if isinstance(cfg.get(command), dict) else {}
        flat = {k: v for k, v in cfg.items() if not isinstance(v, dict)}
        flat.update(section)
        opts.update({k.replace("-", "_"): v for k, v in flat.items()})
    opts.update({k: v for k, v in flags.items() if k not in ("command", "config")})
    return opts


def _snr_axis(opts):
    lin, db = opts.get("snr"), opts.get("snr_db")
    if lin is not None and db is not None:
        raise UsageError("give either --snr or --snr-db, not both")
    if lin is not None:
        snr = parse_range(lin)
        axis = "snr"
    elif db is not None:
        snr = 10.0 ** (parse_range(db) / 10.0)
        axis = "snr_db"
    else:
        return None, None
    if snr.size == 0 or np.any(snr <= 0):
        raise UsageError("snr values must be positive")
    return snr, axis


def _db(snr):
    return 10.0 * math.log10(snr)


def _emit(opts, table=None, record=None):
    fmt = opts.get("format") or "csv"
    if table is None:
        if fmt == "json":
            text = write_json(record)
        else:
            flat = {}
            for k, v in record.items():
                if isinstance(v, list):
                    flat.update({f"{k}_{i}": x for i, x in enumerate(v)})
                else:
                    flat[k] = v
            t = SweepTable(next(iter(flat)), list(flat))
            t.append(**flat)
            text = t.to_csv()
    else:
        text = table.to_json() if fmt == "json" else table.to_csv()
    out = opts.get("output")
    if out:
        Path(out).write_text(text, newline="")
        if not opts.get("quiet"):
            n = len(table) if table is not None else 1
            sys.stderr.write(f"wrote {n} row(s) to {out}\n")
    else:
        sys.stdout.write(text)


def _channel(opts):
    if not opts.get("matrix"):
        raise UsageError("--matrix is required")
    return load_channel(opts["matrix"], opts.get("noise"))


def cmd_vgc(opts) -> SweepTable:
    channel = _channel(opts)
    spec = spectral.spectrum(channel)
    snr, axis = _snr_axis(opts)
    budget = opts.get("budget")
    if (budget is None) == (snr is None):
        raise UsageError("vgc needs exactly one of --budget or --snr/--snr-db")
    if budget is not None:
        sol = spectral.waterfill(spec, float(budget))
        rep = spectral.mmse(spec, sol.snr)
        powers = {f"power_{k}": float(p) for k, p in enumerate(sol.powers)}
        table = SweepTable("budget", ["budget", "water_level", "active_count", "snr", "snr_db",
                                      "capacity", "node", "mmse", "fisher_term", *powers])
        table.append(budget=sol.budget, water_level=sol.water_level,
                     active_count=sol.active_count, snr=sol.snr, snr_db=_db(sol.snr),
                     capacity=spectral.capacity_from_snr(spec, sol.snr),
                     node=rep.node, mmse=rep.mmse, fisher_term=rep.fisher_term, **powers)
        return table

    table = SweepTable(axis, ["snr", "snr_db", "capacity", "node", "mmse", "fisher_term",
                              "active_count", "dC_dsnr_numeric", "dC_dsnr_analytic",
                              "jump_adjacent", "infeasible"])
    if axis == "snr_db":
        table.columns = ["snr_db", "snr"] + table.columns[2:]
    for s in snr:
        s = float(s)
        feasible = spectral.is_feasible(spec, s)
        rep = spectral.mmse(spec, s)
        row = dict(snr=s, snr_db=_db(s), node=rep.node, mmse=rep.mmse,
                   fisher_term=rep.fisher_term, active_count=rep.active_count,
                   infeasible=not feasible)
        if feasible:
            row["capacity"] = spectral.capacity_from_snr(spec, s)
            try:
                chk = spectral.capacity_derivative_check(spec, s)
            except InvalidInputError:
                # On the feasibility edge itself a subchannel switches on.
                row.update(dC_dsnr_analytic=0.5 * rep.node, jump_adjacent=True)
            else:
                row.update(dC_dsnr_numeric=chk.numeric, dC_dsnr_analytic=chk.analytic,
                           jump_adjacent=chk.jump_adjacent)
        else:
            row.update(capacity=0.0, dC_dsnr_analytic=0.0, jump_adjacent=False)
        table.append(**row)
    return table


def _model(opts):
    theta2 = float(opts.get("noise_psd") or 1.0)
    if opts.get("symbol"):
        sym = load_symbol(opts["symbol"], opts.get("t_axis"), opts.get("omega_axis"))
    else:
        sym = GaussianSymbol(1.0 if opts.get("gaussian") is None else float(opts["gaussian"]))
    return sym, theta2


def _relerr(q, e):
    return abs(q - e) / abs(e) if e != 0 else abs(q - e)


def cmd_ltv(opts) -> SweepTable:
    sym, theta2 = _model(opts)
    model = WeylSymbolModel(sym, float(opts["r"]), theta2)
    snr, axis = _snr_axis(opts)
    if snr is None:
        raise UsageError("ltv needs --snr or --snr-db")
    quad = QuadratureConfig(truncation_radius=opts.get("truncation_radius"),
                            tolerance=float(opts["tol"]),
                            max_refinement=int(opts["max_refinement"]))
    closed = bool(opts.get("closed_form"))
    if closed and not isinstance(sym, GaussianSymbol):
        raise UsageError("--closed-form is only available for Gaussian symbols")
    cols = ["snr", "snr_db", "capacity", "count", "node", "mmse", "gap", "water_level"]
    if axis == "snr_db":
        cols[:2] = ["snr_db", "snr"]
    if closed:
        cols += ["capacity_exact", "count_exact", "node_exact", "mmse_exact",
                 "capacity_relerr", "node_relerr", "mmse_relerr"]
    table = SweepTable(axis, cols)
    table.meta.update(symbol=sym.to_dict(), spread=model.spread, noise_psd=theta2,
                      tolerance=quad.tolerance)
    for s in snr:
        s = float(s)
        try:
            rep = ltv.continuous_report(model, s, quad)
        except ConvergenceError as exc:
            raise ConvergenceError(f"quadrature failed at snr={s!r}: {exc}") from exc
        row = dict(snr=s, snr_db=_db(s), capacity=rep.capacity, count=rep.count,
                   node=rep.node, mmse=rep.mmse, gap=rep.node - rep.mmse,
                   water_level=rep.water_level)
        if closed:
            ex = ltv.gaussian_closed_form(s, model.spread, theta2)
            row.update(capacity_exact=ex["capacity"], count_exact=ex["count"],
                       node_exact=ex["node"], mmse_exact=ex["mmse"],
                       capacity_relerr=_relerr(rep.capacity, ex["capacity"]),
                       node_relerr=_relerr(rep.node, ex["node"]),
                       mmse_relerr=_relerr(rep.mmse, ex["mmse"]))
        table.append(**row)
    return table


def _int_or_list(text, cast):
    if text is None:
        return None
    if isinstance(text, (int, float)):
        return cast(text)
    if isinstance(text, list):
        return [cast(x) for x in text]
    vals = [cast(float(x)) for x in str(text).split(",") if x.strip()]
    return vals[0] if len(vals) == 1 else vals


def cmd_szego(opts) -> SweepTable:
    sym, theta2 = _model(opts)
    if opts.get("snr") is None or opts.get("r") in (None, ""):
        raise UsageError("szego needs --snr and --r")
    r_values = parse_range(opts["r"])
    n_points = _int_or_list(opts.get("n_points"), int)
    extent = _int_or_list(opts.get("extent"), float)
    for opt in (n_points, extent):
        if isinstance(opt, list) and len(opt) != r_values.size:
            raise UsageError("grid override lists must have one entry per r")
    quad = QuadratureConfig(tolerance=float(opts["tol"]))
    model = WeylSymbolModel(sym, float(r_values[0]) if r_values.size else 1.0, theta2)
    return weyl.szego_convergence_study(model, float(opts["snr"]), r_values, quad,
                                        n_points=n_points, extent=extent)


def cmd_simulate(opts) -> dict:
    channel = _channel(opts)
    if opts.get("trials") is None or int(opts["trials"]) < 1:
        raise UsageError("--trials must be a positive integer")
    if opts.get("snr") is None:
        raise UsageError("--snr is required")
    coeffs = opts.get("coefficients")
    if isinstance(coeffs, str):
        coeffs = [float(x) for x in coeffs.split(",") if x.strip()]
    config = montecarlo.SimConfig(int(opts["trials"]), int(opts["seed"]), float(opts["snr"]),
                                  opts["input_mode"], coeffs)
    keep = bool(opts.get("dump_samples"))
    report = montecarlo.simulate_matched_filter(channel, config, keep_samples=keep)
    if keep:
        report.dump_samples(opts["dump_samples"])
    record = report.to_dict()
    record["config"] = config.to_dict()
    return record


COMMANDS = {"vgc": cmd_vgc, "ltv": cmd_ltv, "szego": cmd_szego, "simulate": cmd_simulate}


def main(argv=None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    command = args["command"]
    try:
        opts = resolve_options(command, args)
        result = COMMANDS[command](opts)
        if isinstance(result, SweepTable):
            _emit(opts, table=result)
        elif opts["format"] == "json":
            _emit(opts, record=result)
        else:
            _emit(opts, record={k: v for k, v in result.items() if k != "config"})
    except (InvalidInputError, OSError) as exc:
        _report_error(type(exc).__name__, exc, EXIT_USAGE)
        return EXIT_USAGE
    except (ConvergenceError, NumericError, np.linalg.LinAlgError) as exc:
        _report_error(type(exc).__name__, exc, EXIT_NUMERIC)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
