"""Scenario configuration: one JSON tree drives a whole reproducible run.

Validation errors always name the offending key. The seed is mandatory;
every stochastic element of a run draws from a named stream derived from
it, so identical configs give byte-identical outputs.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .dynsys import (TimeSeriesMap, constant_rule, linear_rule,
                     permutation_rule, xor_rule)
from .thermo import LN2, binary_entropy

ENV_KINDS = ("constant", "noise", "counter", "affine", "xor", "permutation")


class ConfigError(ValueError):
    """Invalid scenario configuration; the message names the bad key."""


@dataclass
class EnvironmentSpec:
    """Hidden data source: rule kind, dimensions, observation noise, shifts."""

    kind: str = "constant"
    width: int = 8
    order: int = 1
    value: int = 0
    coeffs: list = field(default_factory=lambda: [1])
    offset: int = 1
    table: list | None = None
    seed_history: list | None = None
    noise_q: float = 1.0
    shift_cycle: int | None = None
    shift_kind: str | None = None
    shift_table: list | None = None

    def validate(self) -> None:
        if self.kind not in ENV_KINDS:
            raise ConfigError(f"environment.kind must be one of {ENV_KINDS}")
        if self.width < 1 or self.width > 16:
            raise ConfigError("environment.width must lie in [1, 16]")
        if self.order < 1:
            raise ConfigError("environment.order must be >= 1")
        if not 0.5 <= self.noise_q <= 1.0:
            raise ConfigError("environment.noise_q must lie in [0.5, 1]")
        if self.kind == "permutation":
            if self.order != 1:
                raise ConfigError("environment.order must be 1 for permutation rules")
            if self.table is not None and len(self.table) != (1 << self.width):
                raise ConfigError("environment.table must cover the full word space")
        if self.kind == "affine" and len(self.coeffs) != self.order:
            raise ConfigError("environment.coeffs must have one entry per order")
        if self.seed_history is not None and len(self.seed_history) != self.order:
            raise ConfigError("environment.seed_history must hold order words")
        if self.shift_cycle is not None:
            if self.shift_cycle < 0:
                raise ConfigError("environment.shift_cycle must be >= 0")
            if self.shift_kind not in (None, "permutation"):
                raise ConfigError("environment.shift_kind supports only 'permutation'")
            if self.shift_table is not None and len(self.shift_table) != (1 << self.width):
                raise ConfigError("environment.shift_table must cover the full word space")


@dataclass
class ThermoSpec:
    kT: float = 1.0
    eps: float = 1e-9
    c_move: float = 1.0
    c_mut: float = 0.1 * LN2
    endowment: float = 50.0

    def validate(self) -> None:
        if self.kT <= 0:
            raise ConfigError("thermo.kT must be > 0")
        if not 0 < self.eps < 0.5:
            raise ConfigError("thermo.eps must lie in (0, 0.5)")
        for key in ("c_move", "c_mut", "endowment"):
            if getattr(self, key) < 0:
                raise ConfigError(f"thermo.{key} must be >= 0")


@dataclass
class SplitterSpec:
    beta_a: float = 0.2
    lam: float = 1.0
    theta_halt: float | None = None     # None: 0.8 of the analytic optimum
    theta_resume: float | None = None   # None: 0.4 of the analytic optimum
    rate_window: int = 64
    initial_grant: float = 0.0

    def validate(self) -> None:
        if self.beta_a < 0:
            raise ConfigError("splitter.beta_a must be >= 0")
        if self.rate_window < 1:
            raise ConfigError("splitter.rate_window must be >= 1")
        if self.initial_grant < 0:
            raise ConfigError("splitter.initial_grant must be >= 0")
        if (self.theta_halt is None) != (self.theta_resume is None):
            raise ConfigError("splitter.theta_halt and splitter.theta_resume "
                              "must be set together")
        if self.theta_halt is not None and not 0 <= self.theta_resume < self.theta_halt:
            raise ConfigError("splitter.theta_resume must satisfy "
                              "0 <= theta_resume < theta_halt")


@dataclass
class PredictorSpec:
    variant: str = "table"
    confidence_window: int = 256
    confidence_min_fill: int = 32
    replay_window: int = 128
    initial_gates: int = 0

    def validate(self) -> None:
        if self.variant not in ("table", "circuit"):
            raise ConfigError("predictor.variant must be 'table' or 'circuit'")
        if self.confidence_window < 1:
            raise ConfigError("predictor.confidence_window must be >= 1")
        if not 1 <= self.confidence_min_fill <= self.confidence_window:
            raise ConfigError("predictor.confidence_min_fill must lie in "
                              "[1, confidence_window]")
        if self.replay_window < 1:
            raise ConfigError("predictor.replay_window must be >= 1")
        if self.initial_gates < 0:
            raise ConfigError("predictor.initial_gates must be >= 0")


@dataclass
class AgentSpec:
    topology: str = "tape"
    policy: str = "straight"
    turns: list = field(default_factory=list)

    def validate(self) -> None:
        if self.topology not in ("tape", "lattice"):
            raise ConfigError("agent.topology must be 'tape' or 'lattice'")
        if self.policy not in ("straight", "round_robin", "random", "scripted"):
            raise ConfigError("agent.policy must be straight, round_robin, "
                              "random, or scripted")
        for t in self.turns:
            if t not in ("straight", "left", "right"):
                raise ConfigError("agent.turns entries must be straight/left/right")


@dataclass
class ScenarioConfig:
    """Everything a run needs; seed is mandatory."""

    seed: int
    max_cycles: int = 1000
    environment: EnvironmentSpec = field(default_factory=EnvironmentSpec)
    thermo: ThermoSpec = field(default_factory=ThermoSpec)
    splitter: SplitterSpec = field(default_factory=SplitterSpec)
    predictor: PredictorSpec = field(default_factory=PredictorSpec)
    agent: AgentSpec = field(default_factory=AgentSpec)

    def validate(self) -> None:
        if self.seed is None or self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if self.max_cycles < 0:
            raise ConfigError("max_cycles must be >= 0")
        self.environment.validate()
        self.thermo.validate()
        self.splitter.validate()
        self.predictor.validate()
        self.agent.validate()
        if self.predictor.variant == "circuit" and self.environment.order != 1:
            raise ConfigError("predictor.variant 'circuit' requires environment.order 1")

    def thresholds(self) -> tuple[float, float]:
        """Resolved hysteresis thresholds.

        Defaults scale the analytic optimum width * kT * (ln 2 - H(Q)) at
        the configured noise level by 0.8 and 0.4; a tiny floor keeps the
        hysteresis band valid even for unlearnable data (Q = 1/2).
        """
        sp = self.splitter
        if sp.theta_halt is not None:
            return sp.theta_halt, sp.theta_resume
        optimum = (self.environment.width * self.thermo.kT
                   * (LN2 - binary_entropy(self.environment.noise_q)))
        if optimum <= 1e-6:
            return 1e-6, 0.0
        return 0.8 * optimum, 0.4 * optimum

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioConfig":
        def build(klass, sub: dict, prefix: str):
            allowed = set(klass.__dataclass_fields__)
            for key in sub:
                if key not in allowed:
                    raise ConfigError(f"unknown key {prefix}.{key}")
            return klass(**sub)

        known = {"seed", "max_cycles", "environment", "thermo", "splitter",
                 "predictor", "agent"}
        for key in doc:
            if key not in known:
                raise ConfigError(f"unknown key {key}")
        if "seed" not in doc:
            raise ConfigError("seed is required")
        cfg = cls(
            seed=doc["seed"],
            max_cycles=doc.get("max_cycles", 1000),
            environment=build(EnvironmentSpec, doc.get("environment", {}), "environment"),
            thermo=build(ThermoSpec, doc.get("thermo", {}), "thermo"),
            splitter=build(SplitterSpec, doc.get("splitter", {}), "splitter"),
            predictor=build(PredictorSpec, doc.get("predictor", {}), "predictor"),
            agent=build(AgentSpec, doc.get("agent", {}), "agent"),
        )
        cfg.validate()
        return cfg


def load_config(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return ScenarioConfig.from_dict(doc)


def dump_config(cfg: ScenarioConfig, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def build_rule(env: EnvironmentSpec, rng: np.random.Generator,
               shifted: bool = False) -> TimeSeriesMap:
    """Instantiate the hidden recurrence named by the spec.

    Permutation rules without an explicit table draw one from the env
    stream, so hidden environments are reproducible from the seed alone.
    """
    kind = env.shift_kind if shifted else env.kind
    if shifted and kind is None:
        kind = env.kind
    table = env.shift_table if shifted else env.table
    if kind == "constant":
        return constant_rule(env.value, env.order, env.width)
    if kind == "counter":
        # x(t) = x(t - 1) + offset; only the newest history entry counts
        return linear_rule([0] * (env.order - 1) + [1], env.offset, env.width)
    if kind == "affine":
        return linear_rule(env.coeffs, env.offset, env.width)
    if kind == "xor":
        return xor_rule(env.order, env.width)
    if kind == "permutation":
        if table is None:
            table = [int(v) for v in rng.permutation(1 << env.width)]
        return permutation_rule(table, env.width)
    raise ConfigError(f"environment.kind {kind!r} is not a recurrence")


def seed_history(env: EnvironmentSpec, rng: np.random.Generator) -> list[int]:
    if env.seed_history is not None:
        return [int(v) % (1 << env.width) for v in env.seed_history]
    return [int(v) for v in rng.integers(0, 1 << env.width, size=env.order)]
