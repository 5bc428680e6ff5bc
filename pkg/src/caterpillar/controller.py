"""Two-channel energy splitter and the stochastic rewiring controller.

Extracted energy is split per cycle: up to a constant bandwidth beta_A is
earmarked as the mutation allowance (channel A), while channel B is a pure
control signal, the windowed mean extraction rate scaled by lambda. When
the B signal reaches theta_halt the search freezes; it resumes only after
the signal falls below theta_resume, so the mode cannot flap inside the
hysteresis band.

All energy sits in one ledger; channel A is an allowance that caps how
much of it mutations may burn, never a second store. Search itself is
greedy: pay c_mut, propose one circuit edit, keep the edit if it scores at
least as well as the incumbent on the same evaluation window (ties go to
the challenger so plateaus still drift).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .revcomp import MutationWeights, mutate
from .thermo import EnergyLedger


class ContractViolation(RuntimeError):
    """Raised when a mutation is requested while the search is frozen."""


@dataclass
class SplitterConfig:
    """Splitter bandwidths and the freeze/resume hysteresis thresholds."""

    beta_a: float
    theta_halt: float
    theta_resume: float
    lam: float = 1.0
    rate_window: int = 64

    def __post_init__(self) -> None:
        if self.beta_a < 0:
            raise ValueError("beta_a must be >= 0")
        if not 0.0 <= self.theta_resume < self.theta_halt:
            raise ValueError("need 0 <= theta_resume < theta_halt")
        if self.rate_window < 1:
            raise ValueError("rate_window must be >= 1")


@dataclass
class LearningState:
    """Search mode, mutation allowance, and the audit counters."""

    mode: str = "searching"
    budget: float = 0.0
    best_rate: float = float("-inf")
    mutation_count: int = 0
    income_total: float = 0.0
    spend_total: float = 0.0
    rate_history: deque = field(default_factory=deque)


def grant(state: LearningState, amount: float) -> None:
    """Seed the mutation allowance (counts as channel-A income)."""
    if amount < 0:
        raise ValueError("grant must be >= 0")
    state.budget += amount
    state.income_total += amount


def split_energy(state: LearningState, extracted: float, cfg: SplitterConfig,
                 ledger: EnergyLedger) -> tuple[float, float]:
    """Book one cycle's extraction; returns (channel-A income, B-signal rate).

    The full amount (losses included) lands in the ledger; the channel-A
    slice min(beta_a, max(extracted, 0)) only raises the allowance.
    """
    ledger.credit("extract", extracted)
    a = min(cfg.beta_a, max(extracted, 0.0))
    state.budget += a
    state.income_total += a
    if len(state.rate_history) >= cfg.rate_window:
        state.rate_history.popleft()
    state.rate_history.append(extracted)
    b_rate = cfg.lam * (sum(state.rate_history) / len(state.rate_history))
    return a, b_rate


def control_step(state: LearningState, b_rate: float, cfg: SplitterConfig) -> str:
    """Hysteresis gate: freeze at theta_halt, resume below theta_resume."""
    if state.mode == "searching" and b_rate >= cfg.theta_halt:
        state.mode = "frozen"
    elif state.mode == "frozen" and b_rate < cfg.theta_resume:
        state.mode = "searching"
    return state.mode


def mutation_step(state: LearningState, model, rng: np.random.Generator,
                  c_mut: float, evaluate: Callable, ledger: EnergyLedger,
                  weights: MutationWeights | None = None):
    """Pay for one circuit edit and keep it if it scores at least as well.

    No-op when the allowance cannot cover c_mut. Both incumbent and
    challenger are scored on the same window so the comparison stays fair
    as the window moves. Returns (model, spend).
    """
    if state.mode != "searching":
        raise ContractViolation("mutation requested while frozen")
    if state.budget < c_mut:
        return model, 0.0
    state.budget -= c_mut
    state.spend_total += c_mut
    if c_mut:
        ledger.debit("mutate", c_mut)
    state.mutation_count += 1

    challenger = model.with_circuit(mutate(model.circuit, rng, weights))
    incumbent_rate = evaluate(model)
    challenger_rate = evaluate(challenger)
    if challenger_rate >= incumbent_rate:
        state.best_rate = challenger_rate
        return challenger, c_mut
    state.best_rate = incumbent_rate
    return model, c_mut
