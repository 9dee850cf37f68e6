"""Command-line entry point: ``sgi-sim {run,estimate,sweep,oracle-check}``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 oracle check failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

from .config import PRESETS, ConfigError, load_scenario
from .density import CoherenceTrace, RegimeError
from .model import ParameterError
from .quadrature import QuadratureError
from . import scenario

log = logging.getLogger("sgi_sim")

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ORACLE = 4

UNITS = {
    "t": "s",
    "z_plus": "m",
    "z_minus": "m",
    "sigma_tilde": "m",
    "h": "1 (dimensionless)",
    "coherence": "1 (dimensionless)",
    "sx": "1 (normalised to <S_x>(0) = 1)",
    "temperature": "K",
    "ring_width": "m",
    "beam_velocity": "m/s",
    "eta_scale": "1",
    "gamma_scale": "1",
    "tau": "s (inf: h stays above 1/e up to t_max)",
    "coherence_final": "1, at t = T_exp",
    "h_final": "1, at t = T_exp",
    "achieved": "relative error",
    "tolerance": "relative error",
}


def fmt(x) -> str:
    """17 significant digits; booleans and infinities spelled out."""
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return str(x).lower()
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return format(x, ".16e")


def write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def write_units(out: Path, columns):
    units_path = out / "units.txt"
    known = {}
    if units_path.exists():
        for line in units_path.read_text().splitlines():
            if ": " in line:
                k, v = line.split(": ", 1)
                known[k] = v
    for c in columns:
        if c in UNITS:
            known[c] = UNITS[c]
    units_path.write_text("".join(f"{k}: {known[k]}\n" for k in sorted(known)))


def _out_dir(args, sc) -> Path:
    out = Path(args.out or sc.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args, sc) -> int:
    trace: CoherenceTrace = scenario.run(sc)
    out = _out_dir(args, sc)
    write_csv(out / "trace.csv", CoherenceTrace.COLUMNS, trace.rows())
    write_units(out, CoherenceTrace.COLUMNS)
    for d in trace.diagnostics:
        print(d, file=sys.stderr)
    if args.svg or sc.svg:
        from .plotting import plot_trace

        plot_trace(trace, out / "trace.svg")
    tau = trace.decoherence_time
    print(f"wrote {out / 'trace.csv'} ({len(trace.times)} rows)")
    print(f"final coherence {trace.coherence[-1]:.6f}, h {trace.h[-1]:.6f}, tau {'inf' if tau is None else f'{tau:.4e} s'}")
    return 0


def cmd_estimate(args, sc) -> int:
    rows = scenario.estimate(sc)
    width = max(len(r[0]) for r in rows)
    for name, value, unit in rows:
        print(f"{name:<{width}}  {fmt(value):>24}  {unit}")
    if args.out:
        out = _out_dir(args, sc)
        write_csv(out / "estimate.csv", ("name", "value", "unit"), rows)
    return 0


def cmd_sweep(args, sc) -> int:
    spec = scenario.SweepSpec.from_config(sc.sweep, args.axis or ())
    header, rows = scenario.sweep(sc, spec, workers=args.workers)
    out = _out_dir(args, sc)
    write_csv(out / "sweep.csv", header, rows)
    write_units(out, header)
    if (args.svg or sc.svg) and len(spec.axes) == 1:
        from .plotting import plot_sweep

        plot_sweep(header, rows, out / "sweep.svg")
    print(f"wrote {out / 'sweep.csv'} ({len(rows)} rows)")
    return 0


def cmd_oracle_check(args, sc) -> int:
    results = scenario.oracle_checks(sc)
    out = _out_dir(args, sc)
    header = ("check", "achieved", "tolerance", "status", "note")
    write_csv(out / "oracle.csv", header, [(r.name, r.achieved, r.tolerance, r.status, r.note) for r in results])
    write_units(out, header)
    for r in results:
        print(f"{r.status.upper():4}  {r.name:<24} {r.achieved:.3e} (tol {r.tolerance:.1e})  {r.note}")
    failed = [r for r in results if r.status == "fail"]
    return EXIT_ORACLE if failed else 0


COMMANDS = {"run": cmd_run, "estimate": cmd_estimate, "sweep": cmd_sweep, "oracle-check": cmd_oracle_check}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario file layered on top of the preset")
    common.add_argument("--preset", choices=PRESETS, help="base preset (default paper-squid)")
    common.add_argument("--out", help="output directory (default from config, else ./out)")
    common.add_argument("--samples", type=int, help="override the sample count")
    common.add_argument("--svg", action="store_true", help="also write an SVG figure")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="sgi-sim", description="Dissipative Stern-Gerlach interferometer simulator")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="coherence trace over one passage")
    sub.add_parser("estimate", parents=[common], help="derived bath parameters")
    sw = sub.add_parser("sweep", parents=[common], help="tau and final coherence over a parameter grid")
    sw.add_argument("--axis", action="append", metavar="NAME=VALUES", help="e.g. temperature=log:0.01:10:13 (repeatable, max 2)")
    sw.add_argument("--workers", type=int, default=4)
    sub.add_parser("oracle-check", parents=[common], help="compare the pipeline against brute-force references")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        sc = load_scenario(args.preset, args.config)
        if args.samples is not None:
            if args.samples < 2:
                raise ConfigError("--samples must be >= 2", source="command line")
            sc = replace(sc, samples=args.samples)
        return COMMANDS[args.command](args, sc)
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, RegimeError, ArithmeticError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
