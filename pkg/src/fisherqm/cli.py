"""Command-line interface.

Subcommands:
  returns   prices CSV -> log-return CSV
  solve     potential JSON -> ground-state CSV (x,psi,p) + JSON sidecar
  info      density CSV -> Fisher information, variance, Cramer-Rao product, peak
  fit       returns CSV -> FitReport JSON for one family
  compare   returns CSV -> AIC-ranked FitReports

Exit codes: 0 ok, 1 usage, 2 bad data, 3 numerical failure. On failure a JSON
object {"error", "message", "exit_code"} is printed to stderr.

Examples:
  fisherqm returns --prices spx.csv --column close -o r.csv
  fisherqm solve --potential '{"type":"oscillator","omega":1}' -o gs.csv
  fisherqm info --density gs.csv -o info.json
  fisherqm fit --model laplace --input r.csv -o laplace.json
  fisherqm compare --input r.csv --models gaussian,laplace,anharmonic,square_well -o cmp.json
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import grid as gridmod
from . import io
from .eigensolver import delta_ground_state, ground_state, default_grid
from .errors import DataError, FisherQMError, NumericalError
from .fitting import FAMILIES, ReturnSeries, compare_models, fit, log_returns
from .grid import Grid
from .potentials import DeltaPotential, potential_from_json, potential_to_json

log = logging.getLogger("fisherqm")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="fisherqm",
        description="Extremal Fisher-information densities for financial log returns",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="Examples:" + __doc__.split("Examples:")[1],
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("returns", help="compute log returns from a prices CSV")
    p.add_argument("--prices", required=True, help="CSV with a header row, chronological rows")
    p.add_argument("--column", default=None, help="price column name (case-insensitive)")
    p.add_argument("--interval", default="", help="label for the sampling interval, e.g. 1d")
    p.add_argument("-o", "--output", required=True, help="output .csv")

    p = sub.add_parser("solve", help="ground state of a potential")
    p.add_argument("--potential", required=True, help="potential JSON file or inline JSON object")
    p.add_argument("--grid", default=None, help="xmin,xmax,n (n odd); default depends on the potential")
    p.add_argument("--no-richardson", action="store_true", help="report the raw three-point eigenpair")
    p.add_argument("-o", "--output", required=True, help="output .csv (+ .json sidecar) or .json")

    p = sub.add_parser("info", help="information diagnostics of a density CSV")
    p.add_argument("--density", required=True, help="CSV with header x,value (or x,psi,p)")
    p.add_argument("-o", "--output", default=None, help="output .json or .csv (default: stdout JSON)")

    p = sub.add_parser("fit", help="fit one model family")
    p.add_argument("--model", required=True, choices=FAMILIES)
    p.add_argument("--input", required=True, help="returns CSV (header log_return)")
    p.add_argument("--source", choices=("paper", "oracle"), default="oracle",
                   help="anharmonic bracket: printed closed form or recomputed (default)")
    p.add_argument("--seed", type=int, default=None, help="recorded in the report")
    p.add_argument("-o", "--output", default=None, help="output .json or .csv (default: stdout JSON)")

    p = sub.add_parser("compare", help="fit several families and rank them by AIC")
    p.add_argument("--input", required=True, help="returns CSV (header log_return)")
    p.add_argument("--models", default=",".join(FAMILIES), help="comma-separated families")
    p.add_argument("--source", choices=("paper", "oracle"), default="oracle")
    p.add_argument("--seed", type=int, default=None, help="recorded in the reports")
    p.add_argument("--workers", type=int, default=1, help="fit families in parallel threads")
    p.add_argument("-o", "--output", default=None, help="output .json or .csv (default: stdout JSON)")
    return parser


def _parse_grid(text: str) -> Grid:
    try:
        xmin, xmax, n = text.split(",")
        return Grid(float(xmin), float(xmax), int(n))
    except ValueError:
        raise UsageError(f"--grid expects xmin,xmax,n, got {text!r}") from None


def _load_spec(text: str) -> dict:
    if text.lstrip().startswith("{"):
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataError(f"inline potential JSON is invalid: {exc}") from None
    return io.read_json(text)


def _suffix(path, allowed) -> str:
    suf = Path(path).suffix.lower()
    if suf not in allowed:
        raise UsageError(f"output {path!r} must end in one of {', '.join(allowed)}")
    return suf


def _check_output(output):
    if output is not None:
        _suffix(output, (".json", ".csv"))


def _emit(obj: dict, output, flat_rows=None):
    if output is None:
        sys.stdout.write(io.dumps(obj))
        return
    if _suffix(output, (".json", ".csv")) == ".json":
        io.write_json(output, obj)
    else:
        header, rows = flat_rows(obj)
        lines = [",".join(header)] + [",".join(_cell(v) for v in r) for r in rows]
        io.atomic_write(output, "\n".join(lines) + "\n")


def _cell(v) -> str:
    if isinstance(v, float):
        return format(v, f".{io.CSV_DIGITS}g")
    text = str(v)
    return f'"{text}"' if "," in text else text


def cmd_returns(args):
    r = log_returns(io.read_prices_csv(args.prices, args.column), args.interval, args.prices)
    _suffix(args.output, (".csv",))
    io.write_returns_csv(args.output, r.values)
    log.info("wrote %d log returns to %s", len(r), args.output)


def cmd_solve(args):
    _suffix(args.output, (".csv", ".json"))
    pot = potential_from_json(_load_spec(args.potential))
    grid = _parse_grid(args.grid) if args.grid else None
    if isinstance(pot, DeltaPotential):
        dgs = delta_ground_state(pot)
        if grid is None:
            grid = Grid.symmetric(12.0 / pot.strength, 4001)
        amp = dgs.on_grid(grid).normalized()
        header = {"energy": dgs.energy, "residual": 0.0, "method": "closed form"}
    else:
        gs = ground_state(pot, grid or default_grid(pot), richardson=not args.no_richardson)
        amp, grid = gs.amplitude, gs.grid
        header = {
            "energy": gs.energy,
            "residual": gs.residual,
            "raw_energy": gs.raw_energy,
            "method": "three-point tridiagonal" + (" + Richardson" if gs.extrapolated else ""),
        }
    header.update(grid=grid.as_dict(), potential=potential_to_json(pot))
    out = Path(args.output)
    if _suffix(out, (".csv", ".json")) == ".csv":
        io.write_ground_state_csv(out, grid.nodes, amp.values)
        io.write_json(out.with_suffix(".json"), header)
    else:
        header.update({"x": grid.nodes, "psi": amp.values, "p": amp.values**2})
        io.write_json(out, header)
    log.info("E = %.12g on %s", header["energy"], grid)


def info_report(d: gridmod.DensityOnGrid) -> dict:
    mass = d.mass()
    d = gridmod.normalize(d)
    fi = gridmod.fisher_information(gridmod.amplitude_from_density(d))
    var = gridmod.variance(d)
    return {
        "mass_before_normalization": mass,
        "mean": gridmod.mean(d),
        "variance": var,
        "fisher_info": fi,
        "cramer_rao_product": var * fi,
        "peak_height": gridmod.peak_height(d),
        "grid": d.grid.as_dict(),
    }


def cmd_info(args):
    _check_output(args.output)
    rep = info_report(io.read_density_csv(args.density))
    _emit(rep, args.output, lambda o: (["quantity", "value"],
                                       [[k, v] for k, v in o.items() if not isinstance(v, dict)]))


def _read_returns(path) -> ReturnSeries:
    return ReturnSeries(io.read_returns_csv(path), source=str(path))


def _report_rows(reports):
    keys = ["model", "nll", "aic", "bic", "ks_stat", "fisher_info", "variance", "cramer_rao_product", "n"]
    pkeys = sorted({k for r in reports for k in r["params"]})
    rows = [[r[k] for k in keys] + [r["params"].get(k, "") for k in pkeys] for r in reports]
    return keys + pkeys, rows


def cmd_fit(args):
    _check_output(args.output)
    kw = {"source": args.source} if args.model == "anharmonic" else {}
    rep = fit(_read_returns(args.input), args.model, seed=args.seed, **kw).to_dict()
    _emit(rep, args.output, lambda o: _report_rows([o]))


def cmd_compare(args):
    _check_output(args.output)
    families = [f.strip() for f in args.models.split(",") if f.strip()]
    cmp = compare_models(_read_returns(args.input), families, seed=args.seed,
                         max_workers=args.workers, source=args.source)
    out = cmp.to_dict()
    if args.seed is not None:
        out["seed"] = args.seed
    _emit(out, args.output, lambda o: _report_rows(o["reports"]))


_COMMANDS = {
    "returns": cmd_returns,
    "solve": cmd_solve,
    "info": cmd_info,
    "fit": cmd_fit,
    "compare": cmd_compare,
}


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}) + "\n")
    return code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail("UsageError", str(exc), EXIT_USAGE)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _COMMANDS[args.command](args)
    except UsageError as exc:
        return _fail("UsageError", str(exc), EXIT_USAGE)
    except NumericalError as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_NUMERICAL)
    except (DataError, FisherQMError) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_DATA)
    except OSError as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_DATA)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
