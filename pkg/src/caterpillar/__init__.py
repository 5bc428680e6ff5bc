"""Self-propelled learning agents that survive on correctly predicted data.

The library simulates a digital agent whose only energy source is the
information it predicts correctly: hidden dynamical systems write words
onto tapes and lattices, a reversible transform reduces them to a noisy
zero signal, and a tunable one-bit engine converts each correct bit into
kT ln 2 of usable energy. A two-channel controller spends part of that
income on rewiring the agent's own predictor circuit.
"""

__version__ = "0.1.0"
