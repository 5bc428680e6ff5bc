"""Analog reference model: energy pumped by moving with an external force.

A driven coordinate gains energy at rate F * v and loses gamma * v**2 to
friction. Matching the velocity to the force (v = F / gamma) makes the two
terms cancel exactly; any positive fraction of that velocity accumulates
energy, and moving against the force only dissipates. This is the analog
counterpart of aligning internal engines with external data, kept here as
a sign-structure demonstrator with plain explicit-Euler accumulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class ForceSignal:
    """External force sampled on a uniform grid."""

    values: np.ndarray
    dt: float
    t0: float = 0.0

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if not np.isfinite(self.values).all():
            raise ValueError("force values must be finite")

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self.values))


def sine_force(samples: int, dt: float, amplitude: float = 1.0,
               omega: float = 1.0) -> ForceSignal:
    t = dt * np.arange(samples)
    return ForceSignal(amplitude * np.sin(omega * t), dt)


@dataclass
class VelocityPolicy:
    """How the internal coordinate answers the force.

    matched   v = F / gamma (stationary energy)
    scaled    v = alpha * F
    antiphase v = -F
    """

    kind: str
    alpha: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("matched", "scaled", "antiphase"):
            raise ValueError(f"unknown policy kind {self.kind!r}")


def energy_rate(f: float, v: float) -> float:
    """Frictionless pumping rate dE/dt = F v."""
    return f * v


def damped_energy_rate(f: float, v: float, gamma: float) -> float:
    """Pumping rate with dissipation, F v - gamma v**2."""
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    return f * v - gamma * v * v


def velocity(policy: VelocityPolicy, f: float, gamma: float) -> float:
    if policy.kind == "matched":
        if gamma <= 0:
            raise ValueError("matched policy needs gamma > 0")
        return f / gamma
    if policy.kind == "scaled":
        return policy.alpha * f
    return -f


@dataclass
class EnergyTrace:
    """Accumulated energy E(t); one entry per sample plus the starting point."""

    times: np.ndarray
    energy: np.ndarray

    def increments(self) -> np.ndarray:
        return np.diff(self.energy)


def simulate(force: ForceSignal, policy: VelocityPolicy, gamma: float,
             e0: float = 0.0) -> EnergyTrace:
    """Explicit Euler: E_{n+1} = E_n + dt (F_n v_n - gamma v_n**2)."""
    if len(force.values) == 0:
        raise ValueError("force signal is empty")
    energy = np.empty(len(force.values) + 1)
    energy[0] = e0
    e = e0
    for i, f in enumerate(force.values):
        v = velocity(policy, float(f), gamma)
        e += force.dt * damped_energy_rate(float(f), v, gamma)
        energy[i + 1] = e
    times = force.t0 + force.dt * np.arange(len(force.values) + 1)
    return EnergyTrace(times, energy)
