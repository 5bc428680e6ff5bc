"""Reversible-circuit engine over an n-line bit register.

Every supported gate (NOT, CNOT, Toffoli, Fredkin, swap, multi-controlled
NOT with per-control polarity) is an involution, so a circuit is inverted
by reversing its gate list and any gate list induces a bijection on n-bit
words. Synthesis decomposes a permutation into transpositions and realizes
each transposition as a Gray-code sandwich of multi-controlled NOTs:
correct on every input, no attempt at minimal gate counts.

Circuit application never touches the energy ledger; rewiring costs are
charged by the controller, not by running the gates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

X_KINDS = ("NOT", "CNOT", "TOFFOLI", "MCX")
SWAP_KINDS = ("SWAP", "FREDKIN")

MAX_TABLE_LINES = 20   # is_bijective refuses tables beyond 2**20 entries
MAX_SYNTH_LINES = 8


@dataclass
class Gate:
    """One self-inverse gate: flip the target(s) when all controls match.

    ``polarities`` parallels ``controls``; True fires on a set control bit.
    X-kind gates carry one target line, swap kinds two.
    """

    kind: str
    controls: tuple[int, ...] = ()
    polarities: tuple[bool, ...] = ()
    targets: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.kind in X_KINDS:
            if len(self.targets) != 1:
                raise ValueError(f"{self.kind} takes exactly one target")
        elif self.kind in SWAP_KINDS:
            if len(self.targets) != 2:
                raise ValueError(f"{self.kind} takes exactly two targets")
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.polarities) != len(self.controls):
            raise ValueError("polarities must parallel controls")
        lines = self.controls + self.targets
        if any(i < 0 for i in lines):
            raise ValueError("line indices must be non-negative")
        if len(set(lines)) != len(lines):
            raise ValueError("gate lines must be distinct")
        self.ctrl_mask = 0
        self.ctrl_val = 0
        for line, pol in zip(self.controls, self.polarities):
            self.ctrl_mask |= 1 << line
            if pol:
                self.ctrl_val |= 1 << line
        if self.kind in X_KINDS:
            self.flip_mask = 1 << self.targets[0]
        else:
            self.flip_mask = (1 << self.targets[0]) | (1 << self.targets[1])

    @property
    def is_swap(self) -> bool:
        return self.kind in SWAP_KINDS

    @property
    def max_line(self) -> int:
        return max(self.controls + self.targets)


def not_gate(target: int) -> Gate:
    return Gate("NOT", targets=(target,))


def cnot(control: int, target: int) -> Gate:
    return Gate("CNOT", (control,), (True,), (target,))


def toffoli(c1: int, c2: int, target: int) -> Gate:
    return Gate("TOFFOLI", (c1, c2), (True, True), (target,))


def fredkin(control: int, a: int, b: int) -> Gate:
    return Gate("FREDKIN", (control,), (True,), (a, b))


def swap_gate(a: int, b: int) -> Gate:
    return Gate("SWAP", targets=(a, b))


def mcx(controls: Sequence[int], target: int,
        polarities: Sequence[bool] | None = None) -> Gate:
    if polarities is None:
        polarities = [True] * len(controls)
    return Gate("MCX", tuple(controls), tuple(bool(p) for p in polarities), (target,))


def apply_gate(gate: Gate, reg: int) -> int:
    """Standard gate semantics on a packed register."""
    if reg & gate.ctrl_mask != gate.ctrl_val:
        return reg
    if gate.is_swap:
        a, b = gate.targets
        if ((reg >> a) ^ (reg >> b)) & 1:
            return reg ^ gate.flip_mask
        return reg
    return reg ^ gate.flip_mask


@dataclass
class ReversibleCircuit:
    """Ordered gate list over ``width`` register lines, applied left to right."""

    width: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self) -> None:
        if self.width < 1:
            raise ValueError("width must be >= 1")
        self.gates = tuple(self.gates)
        for g in self.gates:
            if g.max_line >= self.width:
                raise ValueError(f"gate {g.kind} uses line {g.max_line}, width {self.width}")

    def __len__(self) -> int:
        return len(self.gates)


def apply_circuit(circuit: ReversibleCircuit, reg: int) -> int:
    if not 0 <= reg < (1 << circuit.width):
        raise ValueError(f"register value {reg} outside width {circuit.width}")
    for g in circuit.gates:
        reg = apply_gate(g, reg)
    return reg


def truth_table(circuit: ReversibleCircuit) -> np.ndarray:
    """Circuit as a permutation array over all 2**width inputs (vectorized)."""
    words = np.arange(1 << circuit.width, dtype=np.int64)
    for g in circuit.gates:
        sel = (words & g.ctrl_mask) == g.ctrl_val
        if g.is_swap:
            a, b = g.targets
            sel = sel & (((words >> a) ^ (words >> b)) & 1).astype(bool)
        words = np.where(sel, words ^ g.flip_mask, words)
    return words


def is_bijective(table: Sequence[int]) -> bool:
    """True iff the explicit function table is a permutation."""
    size = len(table)
    if size > (1 << MAX_TABLE_LINES):
        raise ValueError(f"refusing tables beyond 2**{MAX_TABLE_LINES} entries")
    arr = np.asarray(table, dtype=np.int64)
    if arr.min(initial=0) < 0 or arr.max(initial=-1) >= size:
        return False
    return bool((np.bincount(arr, minlength=size) == 1).all())


def invert_circuit(circuit: ReversibleCircuit) -> ReversibleCircuit:
    """Reverse the gate order; every supported gate is its own inverse."""
    return ReversibleCircuit(circuit.width, tuple(reversed(circuit.gates)))


# ---------------------------------------------------------------------------
# Synthesis
# ---------------------------------------------------------------------------

def _adjacent_transposition(u: int, v: int, n: int) -> Gate:
    """MCX exchanging two words at Hamming distance 1 and fixing all others."""
    diff = u ^ v
    bit = diff.bit_length() - 1
    controls = tuple(i for i in range(n) if i != bit)
    polarities = tuple(bool((u >> i) & 1) for i in controls)
    return mcx(controls, bit, polarities)


def _transposition(a: int, b: int, n: int) -> list[Gate]:
    """Gate list exchanging words a and b, identity elsewhere.

    Walk a Gray-code path from a to b, swap the last edge, then unwind:
    T(v0,v1) ... T(vk-2,vk-1) T(vk-1,vk) T(vk-2,vk-1) ... T(v0,v1).
    """
    path = [a]
    x = a
    diff = a ^ b
    bit = 0
    while diff:
        if diff & 1:
            x ^= 1 << bit
            path.append(x)
        diff >>= 1
        bit += 1
    steps = [_adjacent_transposition(path[i], path[i + 1], n)
             for i in range(len(path) - 1)]
    return steps[:-1] + [steps[-1]] + steps[-2::-1]


def synthesize(perm: Sequence[int]) -> ReversibleCircuit:
    """Exact circuit for a permutation of n-bit words (n <= 8).

    The permutation is split into cycles, each cycle into transpositions
    (c0 c1), (c0 c2), ... applied in that order.
    """
    size = len(perm)
    n = size.bit_length() - 1
    if size != (1 << n) or n < 1:
        raise ValueError("table length must be a power of two >= 2")
    if n > MAX_SYNTH_LINES:
        raise ValueError(f"synthesis limited to {MAX_SYNTH_LINES} lines")
    if not is_bijective(perm):
        raise ValueError("table is not a permutation")

    gates: list[Gate] = []
    seen = [False] * size
    for start in range(size):
        if seen[start]:
            continue
        cycle = [start]
        seen[start] = True
        x = int(perm[start])
        while x != start:
            cycle.append(x)
            seen[x] = True
            x = int(perm[x])
        for target in cycle[1:]:
            gates.extend(_transposition(cycle[0], target, n))
    return ReversibleCircuit(n, tuple(gates))


# ---------------------------------------------------------------------------
# Random circuits and mutation
# ---------------------------------------------------------------------------

def random_gate(width: int, rng: np.random.Generator) -> Gate:
    kinds = ["NOT", "MCX"]
    if width >= 2:
        kinds += ["CNOT", "SWAP"]
    if width >= 3:
        kinds += ["TOFFOLI", "FREDKIN"]
    kind = kinds[int(rng.integers(0, len(kinds)))]
    if kind == "NOT":
        return not_gate(int(rng.integers(0, width)))
    if kind == "CNOT":
        c, t = rng.choice(width, size=2, replace=False)
        return cnot(int(c), int(t))
    if kind == "SWAP":
        a, b = rng.choice(width, size=2, replace=False)
        return swap_gate(int(a), int(b))
    if kind == "TOFFOLI":
        c1, c2, t = rng.choice(width, size=3, replace=False)
        return toffoli(int(c1), int(c2), int(t))
    if kind == "FREDKIN":
        c, a, b = rng.choice(width, size=3, replace=False)
        return fredkin(int(c), int(a), int(b))
    n_ctrl = int(rng.integers(0, min(width - 1, 3) + 1))
    lines = rng.choice(width, size=n_ctrl + 1, replace=False)
    polarities = [bool(b) for b in rng.integers(0, 2, size=n_ctrl)]
    return mcx([int(i) for i in lines[:-1]], int(lines[-1]), polarities)


def random_circuit(width: int, n_gates: int, rng: np.random.Generator) -> ReversibleCircuit:
    return ReversibleCircuit(width, tuple(random_gate(width, rng) for _ in range(n_gates)))


@dataclass
class MutationWeights:
    """Relative odds of the four edit moves."""

    insert: float = 1.0
    delete: float = 1.0
    replace: float = 1.0
    move: float = 0.5


def mutate(circuit: ReversibleCircuit, rng: np.random.Generator,
           weights: MutationWeights | None = None) -> ReversibleCircuit:
    """Return a copy with one random edit; the input circuit is untouched.

    Edits that need an existing gate degrade to an insert on an empty
    circuit, so the result is always a valid (hence bijective) circuit.
    """
    w = weights or MutationWeights()
    ops = ("insert", "delete", "replace", "move")
    odds = np.array([w.insert, w.delete, w.replace, w.move], dtype=float)
    if odds.sum() <= 0:
        raise ValueError("mutation weights must not all be zero")
    op = ops[int(rng.choice(4, p=odds / odds.sum()))]
    gates = list(circuit.gates)
    if not gates:
        op = "insert"
    if op == "insert":
        pos = int(rng.integers(0, len(gates) + 1))
        gates.insert(pos, random_gate(circuit.width, rng))
    elif op == "delete":
        gates.pop(int(rng.integers(0, len(gates))))
    elif op == "replace":
        gates[int(rng.integers(0, len(gates)))] = random_gate(circuit.width, rng)
    else:
        src = int(rng.integers(0, len(gates)))
        g = gates.pop(src)
        gates.insert(int(rng.integers(0, len(gates) + 1)), g)
    return ReversibleCircuit(circuit.width, tuple(gates))


# ---------------------------------------------------------------------------
# Text serialization
# ---------------------------------------------------------------------------

def serialize_circuit(circuit: ReversibleCircuit) -> str:
    """One gate per line: KIND then line indices; MCX controls carry +/-."""
    lines = [f"lines {circuit.width}"]
    for g in circuit.gates:
        if g.kind == "MCX":
            ctrls = " ".join(f"{'+' if p else '-'}{c}"
                             for c, p in zip(g.controls, g.polarities))
            body = f"{ctrls} {g.targets[0]}" if ctrls else f"{g.targets[0]}"
            lines.append(f"MCX {body}")
        else:
            idx = " ".join(str(i) for i in g.controls + g.targets)
            lines.append(f"{g.kind} {idx}")
    return "\n".join(lines) + "\n"


def parse_circuit(text: str) -> ReversibleCircuit:
    width = None
    gates: list[Gate] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head, args = parts[0], parts[1:]
        try:
            if head == "lines":
                width = int(args[0])
            elif head == "NOT":
                gates.append(not_gate(int(args[0])))
            elif head == "CNOT":
                gates.append(cnot(int(args[0]), int(args[1])))
            elif head == "TOFFOLI":
                gates.append(toffoli(int(args[0]), int(args[1]), int(args[2])))
            elif head == "FREDKIN":
                gates.append(fredkin(int(args[0]), int(args[1]), int(args[2])))
            elif head == "SWAP":
                gates.append(swap_gate(int(args[0]), int(args[1])))
            elif head == "MCX":
                controls, polarities = [], []
                for tok in args[:-1]:
                    if tok[0] not in "+-":
                        raise ValueError(f"MCX control {tok!r} needs a +/- polarity")
                    controls.append(int(tok[1:]))
                    polarities.append(tok[0] == "+")
                gates.append(mcx(controls, int(args[-1]), polarities))
            else:
                raise ValueError(f"unknown gate kind {head!r}")
        except (IndexError, ValueError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
    if width is None:
        raise ValueError("missing 'lines <n>' header")
    return ReversibleCircuit(width, tuple(gates))
