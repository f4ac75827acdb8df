"""Command-line front end: compute, sweep, figure, verify."""
from __future__ import annotations

import argparse
import sys

from .errors import DriftUnstable, InvalidParams, MalformedCM
from .laser import LaserParams, gain_coefficient
from .sweep import COLUMNS, DEFAULT_KAPPA, PRESETS, SweepSpec, _format_rows, evaluate, run_figure, run_sweep

EXIT_OK, EXIT_VERIFY_FAILED, EXIT_INVALID = 0, 1, 2


def _add_laser_args(p):
    p.add_argument("--kappa-khz", type=float, default=DEFAULT_KAPPA, help="cavity damping (kHz)")
    gain = p.add_mutually_exclusive_group()
    gain.add_argument("--gain-khz", type=float, help="linear gain coefficient A (kHz); default 200")
    gain.add_argument("--rate-khz", type=float, help="atom injection rate r (kHz)")
    p.add_argument("--coupling-khz", type=float, help="atom-field coupling (kHz), with --rate-khz")
    p.add_argument("--gamma-khz", type=float, help="atomic decay rate (kHz), with --rate-khz")
    p.add_argument("--eta", type=float, default=0.35, help="population inversion in [0, 1]")
    p.add_argument("--nth", type=float, default=5.0, help="mean thermal photon number")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cascade-renyi",
        description="Renyi-2 entanglement and discord of a two-mode cascade laser.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="report all measures at one parameter point")
    _add_laser_args(p)
    p.add_argument("--output", metavar="PATH", help="CSV destination (default stdout)")

    p = sub.add_parser("sweep", help="sweep one parameter, write CSV")
    _add_laser_args(p)
    p.add_argument("--sweep", choices=("eta", "nth", "gain"), required=True)
    p.add_argument("--from", dest="lo", type=float, required=True)
    p.add_argument("--to", dest="hi", type=float, required=True)
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--log", action="store_true", help="geometric spacing")
    p.add_argument("--output", metavar="PATH", help="CSV destination (default stdout)")

    p = sub.add_parser("figure", help="reproduce a figure preset as CSV")
    p.add_argument("--preset", choices=sorted(PRESETS), required=True)
    p.add_argument("--output", metavar="PATH", help="CSV destination (default stdout)")
    p.add_argument("--emit-plot-script", metavar="PATH", help="also write a gnuplot script")

    p = sub.add_parser("verify", help="check closed forms against numerical oracles")
    p.add_argument("--dense", action="store_true", help="larger sample sizes")
    return parser


def _resolve_gain(args, parser):
    atomic = (args.rate_khz, args.coupling_khz, args.gamma_khz)
    if args.gain_khz is not None:
        if args.coupling_khz is not None or args.gamma_khz is not None:
            parser.error("--gain-khz cannot be combined with --coupling-khz/--gamma-khz")
        return args.gain_khz
    if any(v is not None for v in atomic):
        if any(v is None for v in atomic):
            parser.error("--rate-khz, --coupling-khz and --gamma-khz must be given together")
        return gain_coefficient(*atomic)
    return 200.0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            from .verification import run_verify

            code, _ = run_verify(dense=args.dense)
            return code
        if args.command == "figure":
            run_figure(args.preset, args.output, args.emit_plot_script)
            return EXIT_OK
        params = LaserParams(args.kappa_khz, _resolve_gain(args, parser), args.eta, args.nth)
        if args.command == "compute":
            cols = evaluate(params)
            lines = [",".join(COLUMNS)] + _format_rows(cols, COLUMNS)
            if args.output:
                with open(args.output, "w") as fh:
                    fh.write("\n".join(lines) + "\n")
            else:
                print("\n".join(lines))
            return EXIT_OK
        spec = SweepSpec(args.sweep, args.lo, args.hi, args.points,
                         "log" if args.log else "linear", params, output=args.output)
        run_sweep(spec)
        return EXIT_OK
    except (InvalidParams, MalformedCM, DriftUnstable) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
