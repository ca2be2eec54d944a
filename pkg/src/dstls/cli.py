"""Command-line entry point: ``dstls {gen-trips,match,estimate,eval,print-config}``.

Exit status: 0 on success, 1 on runtime errors, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import config as config_mod
from .battery import CellTrace
from .etre import match_all, parse_etre
from .evaluation import (
    build_pmap,
    l_tls_from_segments,
    make_trip,
    run_monte_carlo,
    selector_for,
    write_results_csv,
    write_segments_csv,
)
from .pipeline import ds_tls_run, rls_run, tls_fixed_run
from .signal import (
    SampledSignal,
    add_gaussian_noise,
    derive_seed,
    load_signal_csv,
    save_signal_csv,
    write_csv_columns,
)

log = logging.getLogger("dstls")


def _load_config(path) -> config_mod.Config:
    return config_mod.load(path) if path else config_mod.Config()


def cmd_print_config(args) -> int:
    sys.stdout.write(_load_config(args.config).dumps())
    return 0


def cmd_gen_trips(args) -> int:
    cfg = _load_config(args.config)
    if args.trips is not None:
        cfg.harness.trips = args.trips
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pmap = build_pmap(cfg)
    manifest = {"trip": [], "seed": [], "n_transitions": [], "samples": []}
    for tid in range(cfg.harness.trips):
        trip = make_trip(cfg, tid, pmap)
        save_signal_csv(out / f"trip{tid:03d}.csv", trip.speed, "v")
        trip.truth.to_csv(out / f"trip{tid:03d}_cells.csv")
        manifest["trip"].append(tid)
        manifest["seed"].append(trip.seed)
        manifest["n_transitions"].append(trip.n_transitions)
        manifest["samples"].append(len(trip.truth))
    write_csv_columns(out / "manifest.csv", manifest)
    return 0


def _read_expr(args):
    if args.expr is not None:
        return parse_etre(args.expr)
    text = Path(args.expr_file).read_text(encoding="utf-8")
    text = "\n".join(line.split("#", 1)[0] for line in text.splitlines())
    return parse_etre(text.replace("\n", " "))


def cmd_match(args) -> int:
    expr = _read_expr(args)
    speed = load_signal_csv(args.speed, args.column)
    out = sys.stdout
    for m in sorted(match_all(expr, speed)):
        out.write(f"{m.begin},{m.end},{speed.t0 + m.begin * speed.period:g},{speed.t0 + m.end * speed.period:g}\n")
    return 0


def cmd_estimate(args) -> int:
    cfg = _load_config(args.config)
    pmap = build_pmap(cfg)
    trace = CellTrace.from_csv(args.trip)
    cur, volt = trace.current, trace.terminal_voltage
    if args.noise_seed is not None:
        ms = cfg.harness.master_seed
        cur = add_gaussian_noise(SampledSignal(0, trace.period, cur), cfg.noise.sigma_i,
                                 derive_seed(ms, args.noise_seed, 0, 1)).values
        volt = add_gaussian_noise(SampledSignal(0, trace.period, volt), cfg.noise.sigma_v,
                                  derive_seed(ms, args.noise_seed, 0, 2)).values
    d = args.d if args.d is not None else cfg.etre.d[0]
    sel = selector_for(cfg, d)
    method = args.method.lower()
    if method == "rls":
        est = rls_run(cur, volt, trace.soc, pmap, cfg.rls.lam, cfg.rls.theta0, cfg.rls.p0)
    elif method == "ds-tls" or (method == "tls" and args.l_tls is None):
        if not args.speed:
            raise ValueError(f"--speed is required for method {method}")
        speed = load_signal_csv(args.speed, "v")
        if len(speed) != len(trace):
            raise ValueError(f"speed has {len(speed)} samples, cell trace {len(trace)}")
        est = ds_tls_run(speed, cur, volt, trace.soc, pmap, sel, cfg.rls.theta0)
        if method == "tls":
            l_tls = l_tls_from_segments(est.selected_segments[1:])
            est = tls_fixed_run(cur, volt, trace.soc, pmap, l_tls, cfg.rls.theta0)
    else:
        est = tls_fixed_run(cur, volt, trace.soc, pmap, args.l_tls, cfg.rls.theta0)
    th = est.theta_hat
    columns = {
        "t": trace.times,
        "theta1_hat": th[:, 0],
        "theta2_hat": th[:, 1],
        "theta3_hat": th[:, 2],
        "updated": est.updated.astype(int),
    }
    write_csv_columns(args.out or sys.stdout, columns)
    if args.segments_out:
        write_segments_csv(args.segments_out, est.selected_segments)
    return 0


def cmd_eval(args) -> int:
    cfg = _load_config(args.config)
    if args.trips is not None:
        cfg.harness.trips = args.trips
    if args.trials is not None:
        cfg.harness.trials = args.trials
    rows = run_monte_carlo(cfg, args.segments_dir)
    write_results_csv(args.out, rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dstls", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("print-config", help="print the fully resolved configuration")
    s.add_argument("--config")
    s.set_defaults(func=cmd_print_config)

    s = sub.add_parser("gen-trips", help="write synthetic trips (speed and cell CSVs) plus a manifest")
    s.add_argument("--config")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--trips", type=int)
    s.set_defaults(func=cmd_gen_trips)

    s = sub.add_parser("match", help="print every match of an expression in a speed CSV")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--expr-file")
    g.add_argument("--expr")
    s.add_argument("--speed", required=True)
    s.add_argument("--column", default="v")
    s.set_defaults(func=cmd_match)

    s = sub.add_parser("estimate", help="run one estimator on a cell-trace CSV")
    s.add_argument("--method", required=True, type=str.lower, choices=["rls", "tls", "ds-tls"])
    s.add_argument("--trip", required=True, help="cell-trace CSV")
    s.add_argument("--speed", help="speed CSV (needed for ds-tls, and for tls without --l-tls)")
    s.add_argument("--config")
    s.add_argument("--d", type=float, help="tube duration in seconds (default: first etre.d)")
    s.add_argument("--l-tls", type=int, help="fixed TLS block length in samples")
    s.add_argument("--noise-seed", type=int, help="add configured measurement noise with this seed")
    s.add_argument("--out", help="estimate CSV (default: stdout)")
    s.add_argument("--segments-out")
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("eval", help="Monte Carlo comparison; writes the results table")
    s.add_argument("--config")
    s.add_argument("--out", required=True)
    s.add_argument("--segments-dir")
    s.add_argument("--trips", type=int)
    s.add_argument("--trials", type=int)
    s.set_defaults(func=cmd_eval)
    return p


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except BrokenPipeError:
        return 0
    except config_mod.ConfigError as exc:
        print(f"dstls: config error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"dstls: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
