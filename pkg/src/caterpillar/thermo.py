"""One-bit engines with a tunable diaphragm stop, and the energy ledger.

Energies are reals in units of kT (kT configurable, default 1), with a
helper view in bits obtained by dividing by ln 2. The engine model: a
cylinder, split in half, holds one atom on the side encoding the stored
bit. A piston enters from the predicted side and the diaphragm is released
to slide to position R. A correct prediction expands the atom's side and
yields kT ln 2R; a wrong one compresses it and costs kT ln 2(1-R). The
average gain kT(Q ln 2R + (1-Q) ln 2(1-R)) is maximized at R = Q, where it
equals kT(ln 2 - H(Q)), reaching the Landauer value kT ln 2 only for
noise-free data.

Extraction spends the cell: its content is re-randomized, which is where
the entropy bought by the harvested work ends up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

LN2 = math.log(2.0)
DEFAULT_EPS = 1e-9


def landauer_bit(kT: float = 1.0) -> float:
    """Energy obtainable from one perfectly predicted bit: kT ln 2."""
    return kT * LN2


def as_bits(energy: float, kT: float = 1.0) -> float:
    """View an energy amount in bits of the Landauer rate."""
    return energy / (kT * LN2)


def binary_entropy(q: float) -> float:
    """Natural-log binary entropy H(q) = -q ln q - (1-q) ln(1-q)."""
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    if q in (0.0, 1.0):
        return 0.0
    return -q * math.log(q) - (1.0 - q) * math.log(1.0 - q)


def clamp_stop(r: float, eps: float = DEFAULT_EPS) -> float:
    """Keep the diaphragm stop inside [eps, 1-eps].

    Excludes the ln 0 divergence a wrong prediction would hit at R = 1;
    under any noise the optimum R = Q < 1 anyway.
    """
    return min(max(r, eps), 1.0 - eps)


@dataclass
class EngineConfig:
    """Diaphragm stop R and the side the piston enters (the predicted bit)."""

    r: float
    predicted_bit: int
    eps: float = DEFAULT_EPS

    def __post_init__(self) -> None:
        if not self.eps <= self.r <= 1.0 - self.eps:
            raise ValueError(f"R={self.r} outside [{self.eps}, {1.0 - self.eps}]")
        if self.predicted_bit not in (0, 1):
            raise ValueError("predicted_bit must be 0 or 1")


@dataclass
class BitCell:
    """One-bit memory cell; the atom sits on side ``bit``."""

    bit: int

    def __post_init__(self) -> None:
        if self.bit not in (0, 1):
            raise ValueError("bit must be 0 or 1")


def extract_bit(cell: BitCell, engine: EngineConfig, rng: np.random.Generator,
                kT: float = 1.0) -> tuple[float, BitCell]:
    """Run one engine stroke on a cell; the spent cell comes back randomized."""
    if cell.bit == engine.predicted_bit:
        energy = kT * math.log(2.0 * engine.r)
    else:
        energy = kT * math.log(2.0 * (1.0 - engine.r))
    return energy, BitCell(int(rng.integers(0, 2)))


def expected_gain(q: float, r: float, kT: float = 1.0) -> float:
    """Average per-bit gain kT(Q ln 2R + (1-Q) ln 2(1-R))."""
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    if not 0.0 < r < 1.0:
        raise ValueError("R must lie strictly inside (0, 1)")
    return kT * (q * math.log(2.0 * r) + (1.0 - q) * math.log(2.0 * (1.0 - r)))


def optimal_engine(q: float, kT: float = 1.0, eps: float = DEFAULT_EPS) -> tuple[float, float]:
    """Best stop position for prediction quality q, and the gain it earns.

    The gain at the (unclamped) optimum R = Q equals kT(ln 2 - H(Q)): zero
    exactly at Q = 1/2 and the full Landauer value at Q = 1.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    r = clamp_stop(q, eps)
    return r, expected_gain(q, r, kT)


def extract_word(actual: int, predicted: int, per_bit_r: "list[float] | tuple[float, ...]",
                 rng: np.random.Generator, width: int, kT: float = 1.0,
                 eps: float = DEFAULT_EPS) -> tuple[float, int]:
    """Run one engine per bit of a word; returns (total energy, randomized word)."""
    if len(per_bit_r) != width:
        raise ValueError(f"need {width} stop positions, got {len(per_bit_r)}")
    energy = 0.0
    for i in range(width):
        r = clamp_stop(per_bit_r[i], eps)
        if (actual >> i) & 1 == (predicted >> i) & 1:
            energy += kT * math.log(2.0 * r)
        else:
            energy += kT * math.log(2.0 * (1.0 - r))
    return energy, int(rng.integers(0, 1 << width))


def empirical_gain(q: float, r: float, n: int, rng: np.random.Generator,
                   kT: float = 1.0) -> tuple[float, float]:
    """Monte-Carlo mean and standard error of the per-bit gain at (Q, R)."""
    if n < 2:
        raise ValueError("need at least 2 samples")
    correct = rng.random(n) < q
    energies = np.where(correct, kT * math.log(2.0 * r), kT * math.log(2.0 * (1.0 - r)))
    return float(energies.mean()), float(energies.std(ddof=1) / math.sqrt(n))


@dataclass
class EnergyLedger:
    """Signed energy account; balance always equals endowment plus entry sum."""

    endowment: float = 0.0
    entries: list = field(default_factory=list)
    balance: float = 0.0

    def __post_init__(self) -> None:
        self.balance = self.endowment

    def record(self, tag: str, amount: float) -> None:
        self.entries.append((tag, float(amount)))
        self.balance += float(amount)

    def credit(self, tag: str, amount: float) -> None:
        self.record(tag, amount)

    def debit(self, tag: str, amount: float) -> None:
        self.record(tag, -float(amount))

    def total(self, tag: str) -> float:
        return sum(a for t, a in self.entries if t == tag)

    def audit(self, rel_tol: float = 1e-9) -> bool:
        expect = self.endowment + sum(a for _, a in self.entries)
        return math.isclose(self.balance, expect, rel_tol=rel_tol, abs_tol=1e-12)
