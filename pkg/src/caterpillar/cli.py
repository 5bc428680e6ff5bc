"""Command-line entry points: run, sweep, verify, synth, resonance.

Exit codes: 0 success, 1 validation error, 2 acceptance failure. Report
commands write CSV tables and render a PNG figure next to each one.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import resonance as resonance_mod
from .config import ConfigError, ScenarioConfig, load_config
from .harness import (EVENTS_HEADER, METRICS_HEADER, Q_CURVE_HEADER,
                      R_GRID_HEADER, format_csv, run_scenario, sweep_q_curve,
                      sweep_r_grid, write_csv)
from .revcomp import is_bijective, serialize_circuit, synthesize
from .verify import DEFAULT_SEED, verify_all


def _out_path(out_dir: str, name: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    return os.path.join(out_dir, name)


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.cycles is not None:
            cfg.max_cycles = args.cycles
        cfg.validate()
        rows, events, summary = run_scenario(cfg)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    metrics_path = _out_path(args.out, "metrics.csv")
    write_csv(metrics_path, METRICS_HEADER, rows)
    write_csv(_out_path(args.out, "events.csv"), EVENTS_HEADER, events)
    if not args.no_plot:
        from .plots import plot_metrics
        plot_metrics(rows, _out_path(args.out, "metrics.png"))
    print(f"status: {summary.status}")
    print(f"cycles: {summary.cycles}")
    print(f"net_energy: {summary.net_energy:.6f}")
    print(f"metrics: {metrics_path}")
    return 0


def cmd_sweep(args) -> int:
    if args.kind == "q-curve":
        qs = [round(q, 4) for q in np.arange(0.5, 1.0 + 1e-9, args.step)]
        rows = sweep_q_curve(qs, args.samples, args.seed)
        path = _out_path(args.out, "q_curve.csv")
        write_csv(path, Q_CURVE_HEADER, rows)
        if not args.no_plot:
            from .plots import plot_q_curve
            plot_q_curve(rows, _out_path(args.out, "q_curve.png"))
    else:
        rs = [round(r, 4) for r in np.arange(0.5, 0.99 + 1e-9, args.step)]
        rows = sweep_r_grid(args.q, rs, args.samples, args.seed)
        path = _out_path(args.out, "r_grid.csv")
        write_csv(path, R_GRID_HEADER, rows)
        if not args.no_plot:
            from .plots import plot_r_grid
            plot_r_grid(rows, _out_path(args.out, "r_grid.png"), args.q)
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def cmd_verify(args) -> int:
    results = verify_all(args.seed)
    if args.out:
        rows = [(r.number, r.name, "pass" if r.passed else "fail", r.measured)
                for r in results]
        write_csv(_out_path(args.out, "verify_report.csv"),
                  ("criterion", "name", "status", "measured"), rows)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 2 if failed else 0


def cmd_synth(args) -> int:
    try:
        if args.table == "-":
            table = json.load(sys.stdin)
        else:
            with open(args.table, "r", encoding="utf-8") as fh:
                table = json.load(fh)
        if not isinstance(table, list) or not is_bijective(table):
            print("error: input must be a JSON permutation table", file=sys.stderr)
            return 1
        circuit = synthesize(table)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    text = serialize_circuit(circuit)
    if args.out_file:
        with open(args.out_file, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_resonance(args) -> int:
    try:
        policy = resonance_mod.VelocityPolicy(args.policy, alpha=args.alpha)
        force = resonance_mod.sine_force(args.samples, args.dt,
                                         amplitude=args.amplitude)
        trace = resonance_mod.simulate(force, policy, args.gamma, args.e0)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    rows = list(zip(trace.times.tolist(), trace.energy.tolist()))
    path = _out_path(args.out, "energy_trace.csv")
    write_csv(path, ("t", "E"), rows)
    if not args.no_plot:
        from .plots import plot_energy_trace
        plot_energy_trace(trace, _out_path(args.out, "energy_trace.png"),
                          label=args.policy)
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="caterpillar",
        description="Energy-budgeted learning agents on tapes and lattices")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario config")
    p_run.add_argument("--config", required=True, help="scenario JSON path")
    p_run.add_argument("--seed", type=int, default=None, help="override config seed")
    p_run.add_argument("--cycles", type=int, default=None, help="override max cycles")
    p_run.add_argument("--out", default="out", help="output directory")
    p_run.add_argument("--no-plot", action="store_true")
    p_run.set_defaults(fn=cmd_run)

    p_sweep = sub.add_parser("sweep", help="engine gain sweeps")
    p_sweep.add_argument("--kind", choices=("q-curve", "r-grid"), default="q-curve")
    p_sweep.add_argument("--q", type=float, default=0.8, help="fixed Q for r-grid")
    p_sweep.add_argument("--step", type=float, default=0.01)
    p_sweep.add_argument("--samples", type=int, default=200_000)
    p_sweep.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_sweep.add_argument("--out", default="out")
    p_sweep.add_argument("--no-plot", action="store_true")
    p_sweep.set_defaults(fn=cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the acceptance suite")
    p_verify.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_verify.add_argument("--out", default=None, help="optional report directory")
    p_verify.set_defaults(fn=cmd_verify)

    p_synth = sub.add_parser("synth", help="permutation table in, circuit text out")
    p_synth.add_argument("table", help="JSON permutation table path, or - for stdin")
    p_synth.add_argument("--out-file", default=None)
    p_synth.set_defaults(fn=cmd_synth)

    p_res = sub.add_parser("resonance", help="analog reference energy trace")
    p_res.add_argument("--policy", choices=("matched", "scaled", "antiphase"),
                       default="matched")
    p_res.add_argument("--gamma", type=float, default=0.5)
    p_res.add_argument("--alpha", type=float, default=0.5)
    p_res.add_argument("--amplitude", type=float, default=1.0)
    p_res.add_argument("--dt", type=float, default=0.01)
    p_res.add_argument("--samples", type=int, default=10_000)
    p_res.add_argument("--e0", type=float, default=0.0)
    p_res.add_argument("--out", default="out")
    p_res.add_argument("--no-plot", action="store_true")
    p_res.set_defaults(fn=cmd_resonance)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
