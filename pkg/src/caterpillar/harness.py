"""Scenario execution: build a world from a config, run it, emit CSVs.

Output is deterministic: float columns are written with repr (shortest
round-trip form), rows are ordered by cycle, and all randomness flows
through the named seed streams, so a re-run with the same config is
byte-identical.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass

import numpy as np

from .agent import AgentConfig, AGPolicy, Caterpillar, CellSource, Lattice2D, Tape1D
from .config import ScenarioConfig, build_rule, seed_history
from .controller import SplitterConfig
from .predictor import CircuitModel, TableModel
from .revcomp import ReversibleCircuit, random_circuit
from .streams import stream
from .thermo import clamp_stop, empirical_gain, expected_gain, landauer_bit

METRICS_HEADER = ("cycle", "ea_balance", "extracted", "moved", "mutations",
                  "zero_fraction", "mode", "x", "y")
EVENTS_HEADER = ("cycle", "event", "rate")

STREAM_LABELS = ("env", "cells", "noise", "extract", "mutation", "ag")


def build_world(cfg: ScenarioConfig):
    """Create the tape or lattice with its hidden cell source."""
    env = cfg.environment
    rng_env = stream(cfg.seed, "env")
    rng_noise = stream(cfg.seed, "noise")
    if env.kind == "noise":
        source = CellSource("iid", env.width, rng_cells=stream(cfg.seed, "cells"))
    elif env.kind == "constant":
        source = CellSource("constant", env.width, value=env.value,
                            noise_q=env.noise_q, rng_noise=rng_noise)
    else:
        rule = build_rule(env, rng_env)
        source = CellSource("series", env.width, ts=rule,
                            seed_history=seed_history(env, rng_env),
                            noise_q=env.noise_q, rng_noise=rng_noise)
    if cfg.agent.topology == "lattice":
        return Lattice2D(source)
    return Tape1D(source)


def build_model(cfg: ScenarioConfig):
    env, pred = cfg.environment, cfg.predictor
    if pred.variant == "table":
        return TableModel(env.order, env.width, target_len=1,
                          window=pred.confidence_window, eps=cfg.thermo.eps,
                          min_fill=pred.confidence_min_fill)
    rng = stream(cfg.seed, "mutation.init")
    if pred.initial_gates:
        circuit = random_circuit(env.width * env.order, pred.initial_gates, rng)
    else:
        circuit = ReversibleCircuit(env.width * env.order)
    return CircuitModel(circuit, env.order, env.width, target_len=1,
                        window=pred.confidence_window, eps=cfg.thermo.eps,
                        min_fill=pred.confidence_min_fill)


def build_agent(cfg: ScenarioConfig) -> Caterpillar:
    theta_halt, theta_resume = cfg.thresholds()
    splitter = SplitterConfig(beta_a=cfg.splitter.beta_a,
                              theta_halt=theta_halt, theta_resume=theta_resume,
                              lam=cfg.splitter.lam,
                              rate_window=cfg.splitter.rate_window)
    policy = AGPolicy("forward") if cfg.agent.topology == "tape" else \
        AGPolicy(cfg.agent.policy, tuple(cfg.agent.turns))
    agent_cfg = AgentConfig(
        k=cfg.environment.order, width=cfg.environment.width,
        kT=cfg.thermo.kT, eps=cfg.thermo.eps,
        c_move=cfg.thermo.c_move, c_mut=cfg.thermo.c_mut,
        endowment=cfg.thermo.endowment,
        confidence_window=cfg.predictor.confidence_window,
        replay_window=cfg.predictor.replay_window,
        initial_grant=cfg.splitter.initial_grant,
        splitter=splitter, policy=policy)
    rngs = {label: stream(cfg.seed, label) for label in ("extract", "mutation", "ag")}
    return Caterpillar(agent_cfg, build_model(cfg), build_world(cfg), rngs)


@dataclass
class RunSummary:
    status: str
    cycles: int
    net_energy: float
    final_balance: float


def run_scenario(cfg: ScenarioConfig) -> tuple[list, list, RunSummary]:
    """Run one episode; returns (metric rows, event rows, summary)."""
    cfg.validate()
    agent = build_agent(cfg)
    shifts = []
    env = cfg.environment
    if env.shift_cycle is not None:
        shifts.append((env.shift_cycle, build_rule(env, stream(cfg.seed, "env.shift"),
                                                   shifted=True)))
    result = agent.run_episode(cfg.max_cycles, shifts)
    rows = []
    for rep in result.reports:
        x, y = rep.position
        mutations = 1 if rep.mutated else 0
        rows.append((rep.cycle, rep.ea_balance, rep.extracted, rep.moved,
                     mutations, rep.zero_fraction, rep.mode, x, y))
    events = list(result.events)
    summary = RunSummary(result.status, result.cycles, result.net_energy,
                         result.final_balance)
    return rows, events, summary


def format_csv(header, rows) -> str:
    """Render rows with repr-formatted floats for byte-stable output."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def write_csv(path: str, header, rows) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_csv(header, rows))


# ---------------------------------------------------------------------------
# Sweeps over the engine formulas
# ---------------------------------------------------------------------------

Q_CURVE_HEADER = ("q", "r", "analytic_gain", "empirical_gain", "stderr")
R_GRID_HEADER = ("r", "empirical_gain")


def sweep_q_curve(qs, n: int, seed: int, kT: float = 1.0,
                  eps: float = 1e-9) -> list[tuple]:
    """Empirical vs analytic mean gain with the matched engine R = Q."""
    rng = stream(seed, "sweep.q")
    rows = []
    for q in qs:
        r = clamp_stop(q, eps)
        analytic = expected_gain(q, r, kT)
        mean, se = empirical_gain(q, r, n, rng, kT)
        rows.append((float(q), float(r), analytic, mean, se))
    return rows


def sweep_r_grid(q: float, rs, n: int, seed: int, kT: float = 1.0,
                 eps: float = 1e-9) -> list[tuple]:
    """Empirical mean gain across stop positions at fixed data quality."""
    rng = stream(seed, "sweep.r")
    rows = []
    for r in rs:
        mean, _ = empirical_gain(q, clamp_stop(r, eps), n, rng, kT)
        rows.append((float(r), mean))
    return rows


def landauer_reference(kT: float = 1.0) -> float:
    return landauer_bit(kT)
