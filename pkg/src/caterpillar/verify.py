"""Built-in acceptance suite: every quantitative claim, runnable at desk scale.

Each criterion is a standalone function returning a CriterionResult; the
runner prints one pass/fail line per criterion with the measured values.
All randomness is drawn from streams named after the criterion, so the
whole report is reproducible from one seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import dynsys, resonance
from .agent import Caterpillar
from .config import ScenarioConfig, EnvironmentSpec, PredictorSpec, SplitterSpec, ThermoSpec
from .controller import LearningState, mutation_step
from .dynsys import (Trajectory, apply_noise, canonical_check, conjugate_map,
                     generate_trajectory, lift_timeseries, linear_rule,
                     permutation_map, permutation_rule, polar_transform,
                     rotation_map, step_map, step_timeseries, table_transform,
                     xor_rule, NoiseChannel)
from .harness import build_agent, format_csv, METRICS_HEADER, run_scenario, \
    sweep_q_curve, sweep_r_grid
from .predictor import CircuitModel, TableModel, predict, residual
from .revcomp import (MutationWeights, ReversibleCircuit, invert_circuit,
                      is_bijective, random_circuit, synthesize, truth_table)
from .streams import stream
from .thermo import (LN2, EnergyLedger, binary_entropy, clamp_stop,
                     empirical_gain, expected_gain, optimal_engine)

DEFAULT_SEED = 20240214


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: str


# ---------------------------------------------------------------------------
# Engine formula criteria
# ---------------------------------------------------------------------------

def criterion_1_gain_curve(seed: int) -> CriterionResult:
    """Empirical gain matches kT(ln2 - H(Q)) on the Q grid at R=Q."""
    qs = [round(0.50 + 0.05 * i, 2) for i in range(11)]
    rows = sweep_q_curve(qs, 200_000, seed)
    worst = 0.0
    ok = True
    for q, r, analytic, mean, se in rows:
        tol = max(0.01 * abs(analytic), 3 * se)
        err = abs(mean - analytic)
        worst = max(worst, err - tol)
        ok = ok and err <= tol
    return CriterionResult(1, "gain-curve", ok,
                           f"worst excess over tolerance {worst:+.2e}")


def criterion_2_landauer_endpoint(seed: int) -> CriterionResult:
    """Noise-free gain equals kT ln 2 up to the diaphragm clamp."""
    _, gain = optimal_engine(1.0)
    err = abs(gain - LN2)
    return CriterionResult(2, "landauer-endpoint", err <= 1e-6,
                           f"gain {gain:.9f}, |err| {err:.2e}")


def criterion_3_zero_endpoint(seed: int) -> CriterionResult:
    """At Q = 1/2 the extractable energy vanishes."""
    mean, se = empirical_gain(0.5, 0.5, 200_000, stream(seed, "verify.c3"))
    return CriterionResult(3, "zero-endpoint", abs(mean) <= 3 * se,
                           f"mean {mean:.2e}, 3 se {3 * se:.2e}")


def criterion_4_optimal_stop(seed: int) -> CriterionResult:
    """The empirical gain peaks at R = Q on a fine stop grid."""
    q = 0.8
    rs = [round(0.50 + 0.01 * i, 2) for i in range(50)]
    rows = sweep_r_grid(q, rs, 100_000, seed)
    best = max(rows, key=lambda row: row[1])[0]
    return CriterionResult(4, "optimal-stop", abs(best - q) <= 0.03 + 1e-12,
                           f"argmax R {best:.2f} vs Q {q}")


# ---------------------------------------------------------------------------
# Dynamical-system criteria
# ---------------------------------------------------------------------------

def criterion_5_covariance(seed: int) -> CriterionResult:
    """Conjugated table maps commute with the transform on every state."""
    rng = stream(seed, "verify.c5")
    mismatches = 0
    checked = 0
    for dim, width in ((2, 3), (1, 8)):
        size = 1 << (dim * width)
        fmap = permutation_map([int(v) for v in rng.permutation(size)], dim, width)
        xf = table_transform([int(v) for v in rng.permutation(size)], dim, width)
        phi = conjugate_map(fmap, xf)
        for packed in range(size):
            x = dynsys.unpack_state(packed, dim, width)
            if xf.forward(step_map(fmap, x)) != step_map(phi, xf.forward(x)):
                mismatches += 1
            checked += 1
    return CriterionResult(5, "covariance", mismatches == 0,
                           f"{checked - mismatches}/{checked} states exact")


def criterion_6_canonical_rotation(seed: int) -> CriterionResult:
    """Polar coordinates make the rotation's radius constant and time tick."""
    omega = math.pi / 2
    traj = generate_trajectory(rotation_map(omega), (1.0, 0.0), 1000)
    report = canonical_check(polar_transform(omega), traj, tol=1e-9)
    ok = report.constant[0] and report.time_uniform
    return CriterionResult(6, "canonical-rotation", ok,
                           f"radius drift {report.drift[0]:.2e}, "
                           f"time deviation {report.time_deviation:.2e}")


def criterion_7_lifting(seed: int) -> CriterionResult:
    """Recurrence and lifted-map streams agree exactly for 100 steps."""
    rng = stream(seed, "verify.c7")
    ok = True
    for ts in (xor_rule(2, 8), linear_rule([1, 1, 1], 0, 8)):
        seed_hist = [int(v) for v in rng.integers(0, 256, size=ts.order)]
        window = list(seed_hist)
        scalar = []
        for _ in range(100):
            nxt = step_timeseries(ts, tuple(window))
            scalar.append(nxt)
            window = window[1:] + [nxt]
        lifted = lift_timeseries(ts)
        traj = generate_trajectory(lifted, tuple(reversed(seed_hist)), 100)
        lifted_stream = [s[0] for s in traj.states[1:]]
        ok = ok and scalar == lifted_stream
    return CriterionResult(7, "timeseries-lifting", ok,
                           "streams identical" if ok else "streams diverge")


def criterion_8_reversible_suite(seed: int) -> CriterionResult:
    """Random circuits are bijective and invertible; synthesis is exact."""
    rng = stream(seed, "verify.c8")
    failures = 0
    for _ in range(1000):
        width = int(rng.integers(1, 11))
        circuit = random_circuit(width, int(rng.integers(0, 31)), rng)
        table = truth_table(circuit)
        if not is_bijective(table):
            failures += 1
            continue
        inv = truth_table(invert_circuit(circuit))
        if not (inv[table] == np.arange(table.size)).all():
            failures += 1
    synth_failures = 0
    for _ in range(50):
        n = int(rng.integers(2, 7))
        perm = [int(v) for v in rng.permutation(1 << n)]
        if truth_table(synthesize(perm)).tolist() != perm:
            synth_failures += 1
    ok = failures == 0 and synth_failures == 0
    return CriterionResult(8, "reversible-suite", ok,
                           f"{failures} circuit failures, {synth_failures} synth failures")


# ---------------------------------------------------------------------------
# Predictor and learning criteria
# ---------------------------------------------------------------------------

def _exact_table(table: list[int], width: int) -> TableModel:
    model = TableModel(1, width, target_len=1)
    for x, y in enumerate(table):
        model.update((x,), (y,))
    return model


def criterion_9_residual(seed: int) -> CriterionResult:
    """Exact model: all-zero residuals when noise-free, rate Q under noise."""
    rng = stream(seed, "verify.c9")
    width = 8
    table = [int(v) for v in rng.permutation(256)]
    model = _exact_table(table, width)
    x = int(rng.integers(0, 256))
    nonzero = 0
    for _ in range(10_000):
        nxt = table[x]
        if residual(model, (nxt,), (x,)).z[0] != 0:
            nonzero += 1
        x = nxt
    channel = NoiseChannel(0.9, width)
    zero_bits = 0
    for _ in range(10_000):
        nxt = table[x]
        observed = apply_noise(channel, nxt, rng)
        z = residual(model, (observed,), (x,)).z[0]
        zero_bits += width - bin(z).count("1")
        x = nxt
    n_bits = 10_000 * width
    rate = zero_bits / n_bits
    se = math.sqrt(0.9 * 0.1 / n_bits)
    ok = nonzero == 0 and abs(rate - 0.9) <= 3 * se
    return CriterionResult(9, "residual", ok,
                           f"{nonzero} nonzero clean residuals, "
                           f"noisy zero-rate {rate:.4f} (target 0.9 +- {3 * se:.4f})")


def search_permutation_circuit(seed: int, width: int = 3,
                               budget: int = 50_000) -> tuple[bool, int]:
    """Hill-climb a circuit onto a hidden permutation's orbit.

    Pairs (x, perm(x)) along the orbit of a random start are the fixed
    evaluation window; returns (reached zero residual, mutations used).
    """
    rng = stream(seed, "verify.c10")
    table = [int(v) for v in rng.permutation(1 << width)]
    x0 = int(rng.integers(0, 1 << width))
    orbit = [x0]
    x = table[x0]
    while x != x0:
        orbit.append(x)
        x = table[x]
    pairs = [((x,), table[x]) for x in orbit]

    def evaluate(model) -> float:
        zero_bits = 0
        for ctx, tgt in pairs:
            z = tgt ^ model.predict_vector(ctx)[0]
            zero_bits += width - bin(z).count("1")
        return zero_bits / (width * len(pairs))

    model = CircuitModel(ReversibleCircuit(width), 1, width, target_len=1)
    state = LearningState()
    ledger = EnergyLedger()
    weights = MutationWeights(insert=1.0, delete=1.2, replace=1.0, move=0.3)
    if evaluate(model) == 1.0:
        return True, 0
    for step_idx in range(1, budget + 1):
        model, _ = mutation_step(state, model, rng, 0.0, evaluate, ledger, weights)
        if state.best_rate == 1.0:
            return True, step_idx
    return False, budget


def criterion_10_convergence(seed: int) -> CriterionResult:
    """Circuit search finds hidden 3-bit permutations; tables converge in one pass."""
    wins = 0
    counts = []
    for i in range(10):
        ok, used = search_permutation_circuit(seed + i)
        wins += ok
        counts.append(used)
    width, order = 6, 2
    rule = linear_rule([3, 5], 1, width)
    model = TableModel(order, width, target_len=1)
    contexts = [(a, b) for a in range(1 << width) for b in range(1 << width)]
    for ctx in contexts:
        model.update(ctx, (step_timeseries(rule, ctx),))
    table_exact = all(model.predict_vector(ctx)[0] == step_timeseries(rule, ctx)
                      for ctx in contexts)
    ok = wins >= 9 and table_exact
    return CriterionResult(10, "learning-convergence", ok,
                           f"{wins}/10 circuit searches converged "
                           f"(median {sorted(counts)[5]} mutations), "
                           f"table exact: {table_exact}")


# ---------------------------------------------------------------------------
# Agent criteria
# ---------------------------------------------------------------------------

def _constant_config(seed: int, cycles: int, c_move: float = 1.0) -> ScenarioConfig:
    return ScenarioConfig(
        seed=seed, max_cycles=cycles,
        environment=EnvironmentSpec(kind="constant", width=8, order=1, value=170),
        thermo=ThermoSpec(c_move=c_move, endowment=50.0))


def criterion_11_economics(seed: int) -> CriterionResult:
    """Steady net gain per cycle on a constant tape: 8 ln 2 - c_move."""
    cfg = _constant_config(seed, 1500)
    rows, _, summary = run_scenario(cfg)
    steady = [r[2] - r[3] for r in rows[500:]]
    mean = sum(steady) / len(steady)
    target = 8 * LN2 - 1.0
    ok = summary.status == "completed" and abs(mean - target) <= 0.01 * target
    return CriterionResult(11, "caterpillar-economics", ok,
                           f"net {mean:.4f} kT/cycle vs {target:.4f} "
                           f"({summary.status})")


def criterion_12_regime_shift(seed: int) -> CriterionResult:
    """After a map swap the agent resumes searching and re-earns its rate."""
    recovered = 0
    shift_cycle = 500
    for i in range(10):
        cfg = ScenarioConfig(
            seed=seed + i, max_cycles=shift_cycle + 20_000,
            environment=EnvironmentSpec(kind="permutation", width=3, order=1,
                                        shift_cycle=shift_cycle,
                                        shift_kind="permutation"),
            thermo=ThermoSpec(c_move=0.1, endowment=50.0),
            splitter=SplitterSpec(rate_window=64))
        rows, events, summary = run_scenario(cfg)
        if summary.status != "completed":
            continue
        window = 64
        pre = [r[2] for r in rows[shift_cycle - window:shift_cycle]]
        pre_rate = sum(pre) / len(pre)
        resumed = any(ev[0] >= shift_cycle and ev[1] == "resume" for ev in events)
        post = [r[2] for r in rows[shift_cycle:]]
        means = np.convolve(post, np.ones(window) / window, mode="valid")
        if resumed and means.size and means.max() >= 0.8 * pre_rate:
            recovered += 1
    return CriterionResult(12, "regime-shift", recovered >= 7,
                           f"{recovered}/10 seeds recovered to 80% rate")


def criterion_13_resonance(seed: int) -> CriterionResult:
    """Matched velocity holds energy flat; antiphase only dissipates."""
    force = resonance.sine_force(10_000, dt=0.01, amplitude=1.0, omega=1.0)
    matched = resonance.simulate(force, resonance.VelocityPolicy("matched"), 0.5)
    worst = float(np.abs(matched.increments()).max())
    anti = resonance.simulate(force, resonance.VelocityPolicy("antiphase"), 0.1, e0=10.0)
    monotone = bool((anti.increments() <= 0).all())
    ok = worst <= 1e-12 and monotone
    return CriterionResult(13, "resonance", ok,
                           f"matched max |dE| {worst:.2e}, antiphase monotone {monotone}")


def criterion_14_trail_entropy(seed: int) -> CriterionResult:
    """A constant tape leaves a trail of nearly full per-bit entropy."""
    cfg = _constant_config(seed, 10_500)
    agent = build_agent(cfg)
    result = agent.run_episode(cfg.max_cycles)
    world = agent.world
    words = np.array([world.cells[i] for i in sorted(world.consumed)])
    entropies = []
    for bit in range(8):
        p = float(((words >> bit) & 1).mean())
        h = 0.0 if p in (0.0, 1.0) else -(p * math.log2(p) + (1 - p) * math.log2(1 - p))
        entropies.append(h)
    worst = min(entropies)
    ok = result.status == "completed" and len(words) >= 10_000 and worst >= 0.99
    return CriterionResult(14, "trail-entropy", ok,
                           f"{len(words)} cells, min per-bit entropy {worst:.4f} bits")


def criterion_15_determinism(seed: int) -> CriterionResult:
    """Identical config and seed produce byte-identical metrics."""
    cfg_doc = {
        "seed": seed,
        "max_cycles": 400,
        "environment": {"kind": "permutation", "width": 4, "order": 1,
                        "noise_q": 0.9},
        "thermo": {"c_move": 0.05, "endowment": 30.0},
        "predictor": {"variant": "circuit", "initial_gates": 4},
        "splitter": {"initial_grant": 100.0},
        "agent": {"topology": "lattice", "policy": "random"},
    }
    outputs = []
    for _ in range(2):
        rows, events, _ = run_scenario(ScenarioConfig.from_dict(cfg_doc))
        outputs.append(format_csv(METRICS_HEADER, rows)
                       + format_csv(("cycle", "event", "rate"), events))
    ok = outputs[0] == outputs[1] and len(outputs[0]) > 0
    return CriterionResult(15, "determinism", ok,
                           f"{len(outputs[0])} bytes, identical: {ok}")


ALL_CRITERIA = (
    criterion_1_gain_curve,
    criterion_2_landauer_endpoint,
    criterion_3_zero_endpoint,
    criterion_4_optimal_stop,
    criterion_5_covariance,
    criterion_6_canonical_rotation,
    criterion_7_lifting,
    criterion_8_reversible_suite,
    criterion_9_residual,
    criterion_10_convergence,
    criterion_11_economics,
    criterion_12_regime_shift,
    criterion_13_resonance,
    criterion_14_trail_entropy,
    criterion_15_determinism,
)


def verify_all(seed: int = DEFAULT_SEED, echo=print) -> list[CriterionResult]:
    results = []
    for fn in ALL_CRITERIA:
        result = fn(seed)
        results.append(result)
        status = "PASS" if result.passed else "FAIL"
        echo(f"[{result.number:2d}] {status}  {result.name:<24} {result.measured}")
    return results
