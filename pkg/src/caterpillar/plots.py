"""Figure rendering for the report paths; every CSV gets a PNG neighbor."""

from __future__ import annotations

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .thermo import LN2


def _save(fig, path: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fig.savefig(path, dpi=130, bbox_inches="tight")
    plt.close(fig)


def plot_metrics(rows, path: str) -> None:
    """Accumulator balance and residual quality over the episode."""
    if not rows:
        return
    cycles = [r[0] for r in rows]
    balance = [r[1] for r in rows]
    zero_fraction = [r[5] for r in rows]
    searching = [r[6] == "searching" for r in rows]

    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    ax1.plot(cycles, balance, color="tab:green", lw=1.0)
    ax1.set_ylabel("EA balance [kT]")
    ax1.grid(alpha=0.3)
    ax2.plot(cycles, zero_fraction, color="tab:purple", lw=0.8)
    ax2.set_ylabel("residual zero fraction")
    ax2.set_xlabel("cycle")
    ax2.set_ylim(-0.05, 1.05)
    ax2.grid(alpha=0.3)
    if any(searching):
        ax2.fill_between(cycles, -0.05, 1.05, where=searching,
                         color="tab:orange", alpha=0.15, label="searching")
        ax2.legend(loc="lower right")
    fig.suptitle("episode metrics")
    _save(fig, path)


def plot_q_curve(rows, path: str, kT: float = 1.0) -> None:
    """Empirical per-bit gain at R=Q against the analytic curve."""
    qs = np.array([r[0] for r in rows])
    analytic = np.array([r[2] for r in rows])
    empirical = np.array([r[3] for r in rows])
    stderr = np.array([r[4] for r in rows])

    fig, ax = plt.subplots(figsize=(7, 5))
    ax.plot(qs, analytic, color="tab:blue", label="analytic kT(ln2 - H(Q))")
    ax.errorbar(qs, empirical, yerr=3 * stderr, fmt="o", ms=4,
                color="tab:red", label="empirical (3 se)")
    ax.axhline(kT * LN2, color="gray", ls=":", lw=1, label="Landauer kT ln2")
    ax.set_xlabel("prediction quality Q")
    ax.set_ylabel("mean gain per bit [kT]")
    ax.legend()
    ax.grid(alpha=0.3)
    _save(fig, path)


def plot_r_grid(rows, path: str, q: float) -> None:
    """Gain across diaphragm stops at fixed Q; the peak should sit at R=Q."""
    rs = np.array([r[0] for r in rows])
    empirical = np.array([r[1] for r in rows])

    fig, ax = plt.subplots(figsize=(7, 5))
    ax.plot(rs, empirical, "o-", ms=3, color="tab:red", label="empirical")
    ax.axvline(q, color="tab:blue", ls="--", lw=1, label=f"R = Q = {q}")
    ax.set_xlabel("diaphragm stop R")
    ax.set_ylabel("mean gain per bit [kT]")
    ax.legend()
    ax.grid(alpha=0.3)
    _save(fig, path)


def plot_energy_trace(trace, path: str, label: str = "") -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(trace.times, trace.energy, color="tab:green", lw=1.0, label=label or None)
    ax.set_xlabel("t")
    ax.set_ylabel("E")
    if label:
        ax.legend()
    ax.grid(alpha=0.3)
    _save(fig, path)
