"""Command-line entry point ``qrtherm``."""

import argparse
import logging
import math
import os
import sys

from . import oracles, sweep
from .dme import BathSpec
from .point import temperatures
from .spectrum import DEFAULT_NMAX, ModelParams, solve

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


def _number(text):
    try:
        return sweep.parse_number(text)
    except sweep.ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _write_or_print(text, path):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_sweep(cfg, records, out, fmt, timing):
    cols = sweep.columns_for(cfg)
    if out:
        sweep.write_records(records, out, cols, fmt, timing)
        if cfg.argmax_theta:
            trace = sweep.argmax_theta_trace(records)
            tcols = ["lambda", "T_R", "T_Q", "theta_rad", "J_over_alpha_omega0"]
            sweep.write_records(trace, f"{out}.argmax.{fmt}", tcols, fmt)
    else:
        sys.stdout.write(sweep.serialize_records(records, cols, fmt, timing))


def _check_writable(path):
    if not path:
        return None
    target = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(target) or not os.access(target, os.W_OK):
        return f"cannot write to {path}"
    return None


def _finish(records, strict):
    bad = [r for r in records if not r["converged"]]
    if bad:
        logging.warning("%d of %d records not converged", len(bad), len(records))
    return EXIT_NUMERIC if (strict and bad) else EXIT_OK


def cmd_sweep(args):
    try:
        cfg = sweep.load_config(args.config)
    except (sweep.ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    fmt = args.format or cfg.out_format
    out = args.out or cfg.out_path
    problem = _check_writable(out)
    if problem:
        print(f"I/O error: {problem}", file=sys.stderr)
        return EXIT_IO
    records = sweep.run_sweep(cfg, jobs=args.jobs)
    try:
        _emit_sweep(cfg, records, out, fmt, args.timing)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return _finish(records, args.strict)


def cmd_preset(args):
    cfg = sweep.preset(args.figure_id, resolution=args.resolution)
    fmt = args.format or "csv"
    problem = _check_writable(args.out)
    if problem:
        print(f"I/O error: {problem}", file=sys.stderr)
        return EXIT_IO
    records = sweep.run_sweep(cfg, jobs=args.jobs)
    try:
        _emit_sweep(cfg, records, args.out, fmt, args.timing)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return _finish(records, args.strict)


def cmd_point(args):
    axes = {
        "theta": sweep.Axis.fixed("theta", args.theta),
        "lambda": sweep.Axis.fixed("lambda", args.lam),
        "dT": sweep.Axis.fixed("dT", args.dT),
        "T_mean": sweep.Axis.fixed("T_mean", args.T_mean),
    }
    try:
        cfg = sweep.SweepConfig(epsilon=args.epsilon, n_max=args.nmax, axes=axes,
                                alpha=args.alpha, omega_c=args.omega_c,
                                outputs=("current", "g2", "g2_approx"))
    except (sweep.ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rec = sweep.compute_record(next(cfg.points()), cfg)
    for col in sweep.CSV_COLUMNS:
        print(f"{col:>20s}  {sweep.format_value(rec.get(col))}")
    if "error" in rec:
        print(f"{'error':>20s}  {rec['error']}")
        return EXIT_NUMERIC
    return _finish([rec], args.strict)


def cmd_eig(args):
    try:
        params = ModelParams(epsilon=args.epsilon, lam=args.lam, theta=args.theta, n_max=args.nmax)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    eig = solve(params)
    for k, e in enumerate(eig.energies[: args.levels]):
        print(f"{k:4d}  {e:.12g}")
    return EXIT_OK


def cmd_oracle(args):
    which = args.which
    lines = []
    try:
        if which in ("jx", "jz", "populations"):
            t_r, t_q = args.T_R, args.T_Q
            if t_r is None or t_q is None:
                t_r, t_q = temperatures(args.T_mean, args.dT)
            theta = 0.0 if which == "jx" or args.limit == "theta0" else math.pi / 2
            params = ModelParams(epsilon=args.epsilon, lam=args.lam, theta=theta,
                                 n_max=max(args.nmax, 5))
            bath_r = BathSpec("R", args.alpha, args.omega_c, t_r)
            bath_q = BathSpec("Q", args.alpha, args.omega_c, t_q)
            if which == "populations":
                table = oracles.zeroth_populations(params, bath_r, bath_q, args.limit)
                lines.append("n,branch,population")
                for (n, branch), p in table.entries.items():
                    lines.append(f"{n},{branch},{p:.12g}")
            else:
                fn = oracles.jx_weak if which == "jx" else oracles.jz_weak
                res = fn(params, bath_r, bath_q)
                lines.append("quantity,value")
                lines.append(f"total,{res.total:.12g}")
                lines.append(f"total_over_alpha_omega0,{res.total / args.alpha:.12g}")
                lines.append(f"prefactor,{res.prefactor:.12g}")
                for name, val in res.components.items():
                    lines.append(f"{name},{val:.12g}")
        elif which in ("overlap_exact", "overlap_2nd"):
            if args.n is None or args.n_prime is None or args.g is None:
                raise ValueError(f"{which} needs --n, --n-prime and --g")
            fn = (oracles.sigma_x_overlap_exact if which == "overlap_exact"
                  else oracles.sigma_x_overlap_second_order)
            lines.append("n,n_prime,g,value")
            lines.append(f"{args.n},{args.n_prime},{args.g:.12g},{fn(args.n, args.n_prime, args.g):.12g}")
    except ValueError as exc:
        print(f"invalid arguments: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        _write_or_print("\n".join(lines) + "\n", args.out)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _model_args(p, with_nmax=True):
    p.add_argument("--epsilon", type=_number, default=1.5, help="qubit splitting (units of omega0)")
    p.add_argument("--lambda", dest="lam", type=_number, default=0.01, help="coupling strength")
    if with_nmax:
        p.add_argument("--nmax", type=int, default=None, help="Fock truncation (default: auto)")


def _run_args(p):
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--format", choices=sweep.FORMATS, default=None)
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: all CPUs)")
    p.add_argument("--strict", action="store_true", help="exit 2 if any record is unconverged")
    p.add_argument("--timing", action="store_true",
                   help="write wall_time_ms (makes output run-dependent)")


def build_parser():
    parser = argparse.ArgumentParser(prog="qrtherm", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run a sweep from a YAML config")
    p.add_argument("--config", required=True)
    _run_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("preset", help="run a figure-reproduction sweep")
    p.add_argument("figure_id", choices=sweep.PRESETS)
    p.add_argument("--resolution", type=int, default=60, help="points per grid axis")
    _run_args(p)
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("point", help="evaluate a single parameter point")
    p.add_argument("--theta", type=_number, required=True)
    p.add_argument("--dT", type=_number, required=True)
    p.add_argument("--T-mean", dest="T_mean", type=_number, default=1.0)
    p.add_argument("--alpha", type=_number, default=0.001)
    p.add_argument("--omega-c", dest="omega_c", type=_number, default=10.0)
    p.add_argument("--strict", action="store_true")
    _model_args(p)
    p.set_defaults(func=cmd_point)

    p = sub.add_parser("eig", help="print the lowest energies")
    p.add_argument("--theta", type=_number, required=True)
    p.add_argument("--levels", type=int, default=10)
    _model_args(p, with_nmax=False)
    p.add_argument("--nmax", type=int, default=DEFAULT_NMAX)
    p.set_defaults(func=cmd_eig)

    p = sub.add_parser("oracle", help="evaluate a closed-form weak-coupling expression")
    p.add_argument("which", choices=("jx", "jz", "overlap_exact", "overlap_2nd", "populations"))
    _model_args(p, with_nmax=False)
    p.add_argument("--nmax", type=int, default=DEFAULT_NMAX)
    p.add_argument("--T-R", dest="T_R", type=_number, default=None)
    p.add_argument("--T-Q", dest="T_Q", type=_number, default=None)
    p.add_argument("--dT", type=_number, default=1.0)
    p.add_argument("--T-mean", dest="T_mean", type=_number, default=1.0)
    p.add_argument("--alpha", type=_number, default=0.001)
    p.add_argument("--omega-c", dest="omega_c", type=_number, default=10.0)
    p.add_argument("--limit", choices=("theta0", "theta90"), default="theta0")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--n-prime", dest="n_prime", type=int, default=None)
    p.add_argument("--g", type=_number, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
