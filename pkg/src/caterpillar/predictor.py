"""The reversible-transform block: delay latches, residuals, and learners.

The residual z = x XOR predicted(x_prev) is the block's whole output: it
is zero exactly where the prediction is right, and XOR is self-inverse, so
the original word is always reconstructible from the residual, the context
and the model. Residual statistics drive everything downstream: per-bit
confidence sets the engine stops, per-component zero rates split the flow
into an extractable (green) and a noisy (purple) part.

Two learner representations are provided: a counting table (passive,
free to update) and a reversible circuit (the mutable hardware the
controller rewires).
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Sequence

from .dynsys import pack_state, unpack_state
from .revcomp import ReversibleCircuit, apply_circuit, parse_circuit, serialize_circuit

DEFAULT_WINDOW = 256
DEFAULT_TAU = 0.9
CONF_EPS = 1e-9


class DelayLatch:
    """Fixed-depth FIFO: push returns the value stored ``depth`` steps earlier.

    Until the latch has seen ``depth`` values it is warming up and push
    returns None as the not-ready signal.
    """

    def __init__(self, depth: int):
        if depth < 1:
            raise ValueError("depth must be >= 1")
        self.depth = depth
        self._buf: deque = deque()

    @property
    def ready(self) -> bool:
        return len(self._buf) >= self.depth

    def push(self, word: int):
        self._buf.append(word)
        if len(self._buf) <= self.depth:
            return None
        return self._buf.popleft()


def detrend_time(t_now: int, latch: DelayLatch, width: int):
    """Subtract the delayed value mod 2**width; a uniform counter becomes constant.

    Returns None while the latch is warming up.
    """
    delayed = latch.push(t_now)
    if delayed is None:
        return None
    return (t_now - delayed) % (1 << width)


@dataclass
class Residual:
    """Componentwise XOR difference between an observation and its prediction."""

    z: tuple[int, ...]
    t: int = 0


@dataclass
class FlowSplit:
    """Component indices split into near-zero (green) and noisy (purple)."""

    green: frozenset
    purple: frozenset


def split_flows(zero_rates: Sequence[float], tau: float = DEFAULT_TAU) -> FlowSplit:
    """Green components have residual-zero rate >= tau (closed threshold)."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must lie in [0, 1]")
    green = frozenset(i for i, r in enumerate(zero_rates) if r >= tau)
    purple = frozenset(range(len(zero_rates))) - green
    return FlowSplit(green, purple)


@dataclass
class ConfidenceEstimate:
    """Per-bit engine settings: quality Q-hat and whether to predict the flip.

    A bit whose residual is mostly 1 is still predictable; the polarity
    flag flips the engine onto the other side and Q-hat stays >= 1/2.
    """

    q: tuple[float, ...]
    flipped: tuple[bool, ...]
    window: int

    def flip_word(self) -> int:
        word = 0
        for i, f in enumerate(self.flipped):
            if f:
                word |= 1 << i
        return word


def _q_from_rate(rate: float, eps: float) -> tuple[float, bool]:
    """Spec rule: flip the engine when the zero rate sits below 1/2."""
    flip = rate < 0.5
    q = 1.0 - rate if flip else rate
    return min(max(q, 0.5), 1.0 - eps), flip


def estimate_confidence(zero_history: Sequence[Sequence[bool]],
                        eps: float = CONF_EPS) -> ConfidenceEstimate:
    """Estimate per-bit prediction quality from windows of zero/nonzero outcomes.

    An empty window gives the neutral Q-hat = 1/2, which makes the engine
    extract exactly nothing rather than gamble.
    """
    qs, flips, window = [], [], 0
    for bits in zero_history:
        n = len(bits)
        window = max(window, n)
        if n == 0:
            qs.append(0.5)
            flips.append(False)
            continue
        q, flip = _q_from_rate(sum(1 for b in bits if b) / n, eps)
        qs.append(q)
        flips.append(flip)
    return ConfidenceEstimate(tuple(qs), tuple(flips), window)


class ConfidenceTracker:
    """Sliding per-bit window of residual-zero outcomes, with running counts.

    Bits whose window holds fewer than ``min_fill`` samples report the
    neutral estimate; a near-empty window must not license a confident
    (possibly flipped) engine, or a single unlucky stroke wipes out the
    accumulator.
    """

    def __init__(self, n_bits: int, window: int = DEFAULT_WINDOW, eps: float = CONF_EPS,
                 min_fill: int | None = None):
        if window < 1:
            raise ValueError("window must be >= 1")
        self.n_bits = n_bits
        self.window = window
        self.eps = eps
        self.min_fill = min(window, 32) if min_fill is None else min_fill
        self._hist = [deque() for _ in range(n_bits)]
        self._zeros = [0] * n_bits
        self._word_hist: dict[int, deque] = {}
        self._word_zeros: dict[int, int] = {}

    def record(self, z: Sequence[int], width: int) -> None:
        for comp, word in enumerate(z):
            base = comp * width
            for i in range(width):
                hist = self._hist[base + i]
                if len(hist) >= self.window:
                    self._zeros[base + i] -= hist.popleft()
                bit_zero = (word >> i) & 1 == 0
                hist.append(bit_zero)
                self._zeros[base + i] += bit_zero
            whist = self._word_hist.setdefault(comp, deque())
            if len(whist) >= self.window:
                self._word_zeros[comp] -= whist.popleft()
            whist.append(word == 0)
            self._word_zeros[comp] = self._word_zeros.get(comp, 0) + (word == 0)

    def estimate(self) -> ConfidenceEstimate:
        qs, flips = [], []
        for i in range(self.n_bits):
            n = len(self._hist[i])
            if n < self.min_fill:
                qs.append(0.5)
                flips.append(False)
                continue
            q, flip = _q_from_rate(self._zeros[i] / n, self.eps)
            qs.append(q)
            flips.append(flip)
        return ConfidenceEstimate(tuple(qs), tuple(flips), self.window)

    def zero_rates(self) -> tuple[float, ...]:
        """Per-component word-zero rates over the window, for the flow split."""
        rates = []
        for comp in sorted(self._word_hist):
            hist = self._word_hist[comp]
            rates.append(self._word_zeros[comp] / len(hist) if hist else 0.0)
        return tuple(rates)


# ---------------------------------------------------------------------------
# Learner representations
# ---------------------------------------------------------------------------

class TableModel:
    """Counting predictor: per context and component, the argmax-count word.

    Ties break toward the smaller word; an unseen context predicts word 0
    at neutral confidence.
    """

    def __init__(self, context_len: int, width: int, target_len: int = 1,
                 window: int = DEFAULT_WINDOW, eps: float = CONF_EPS,
                 min_fill: int | None = None):
        self.context_len = context_len
        self.target_len = target_len
        self.width = width
        self.counts: dict = {}
        self.confidence = ConfidenceTracker(target_len * width, window, eps, min_fill)

    def seen(self, context: Sequence[int]) -> bool:
        return tuple(context) in self.counts

    def update(self, context: Sequence[int], observed: Sequence[int]) -> None:
        if len(observed) != self.target_len:
            raise ValueError("observed length must match target_len")
        per_comp = self.counts.setdefault(tuple(context),
                                          [{} for _ in range(self.target_len)])
        for comp, word in enumerate(observed):
            counts = per_comp[comp]
            counts[int(word)] = counts.get(int(word), 0) + 1

    def predict_vector(self, context: Sequence[int]) -> tuple[int, ...]:
        per_comp = self.counts.get(tuple(context))
        if per_comp is None:
            return (0,) * self.target_len
        # max count first, smaller word on ties
        return tuple(max(c.items(), key=lambda kv: (kv[1], -kv[0]))[0]
                     for c in per_comp)


class CircuitModel:
    """Predictor as a reversible circuit over the packed context.

    The circuit width is dimension * width; the predicted vector is the
    unpacked circuit output, truncated to the first target_len components.
    """

    def __init__(self, circuit: ReversibleCircuit, dimension: int, width: int,
                 target_len: int | None = None, window: int = DEFAULT_WINDOW,
                 eps: float = CONF_EPS, min_fill: int | None = None,
                 confidence: ConfidenceTracker | None = None):
        if circuit.width != dimension * width:
            raise ValueError(f"circuit width {circuit.width} != {dimension}*{width}")
        self.circuit = circuit
        self.context_len = dimension
        self.width = width
        self.target_len = target_len if target_len is not None else dimension
        self.confidence = confidence or ConfidenceTracker(self.target_len * width,
                                                          window, eps, min_fill)

    def seen(self, context: Sequence[int]) -> bool:
        return True

    def predict_vector(self, context: Sequence[int]) -> tuple[int, ...]:
        packed = pack_state(context, self.width)
        out = apply_circuit(self.circuit, packed)
        return unpack_state(out, self.context_len, self.width)[: self.target_len]

    def with_circuit(self, circuit: ReversibleCircuit) -> "CircuitModel":
        """Same learner identity (shared confidence window), new hardware."""
        return CircuitModel(circuit, self.context_len, self.width, self.target_len,
                            confidence=self.confidence)


def update_table(model: TableModel, context: Sequence[int],
                 observed: Sequence[int]) -> TableModel:
    """Record one observed transition; returns the model for chaining."""
    model.update(context, observed)
    return model


def predict(model, context: Sequence[int]) -> tuple[tuple[int, ...], ConfidenceEstimate]:
    """Predicted vector plus the engine settings to extract against it."""
    if isinstance(model, TableModel) and not model.seen(context):
        n = model.target_len * model.width
        neutral = ConfidenceEstimate((0.5,) * n, (False,) * n, 0)
        return (0,) * model.target_len, neutral
    return model.predict_vector(context), model.confidence.estimate()


def residual(model, x_now: Sequence[int], x_prev: Sequence[int], t: int = 0) -> Residual:
    """z = x_now XOR prediction(x_prev), componentwise."""
    predicted = model.predict_vector(x_prev)
    if len(x_now) != len(predicted):
        raise ValueError(f"x_now has {len(x_now)} components, model predicts {len(predicted)}")
    return Residual(tuple(int(a) ^ int(b) for a, b in zip(x_now, predicted)), t)


def reconstruct(model, res: Residual, x_prev: Sequence[int]) -> tuple[int, ...]:
    """Invert the residual: x_now = z XOR prediction(x_prev), always exact."""
    predicted = model.predict_vector(x_prev)
    return tuple(int(a) ^ int(b) for a, b in zip(res.z, predicted))


# ---------------------------------------------------------------------------
# Model serialization
# ---------------------------------------------------------------------------

def dump_model(model) -> str:
    """Serialize a learner; tables as count triples, circuits as gate text."""
    if isinstance(model, TableModel):
        entries = []
        for context, per_comp in model.counts.items():
            for comp, counts in enumerate(per_comp):
                for word, count in sorted(counts.items()):
                    if model.target_len == 1:
                        entries.append([list(context), word, count])
                    else:
                        entries.append([list(context), comp, word, count])
        return json.dumps({
            "variant": "table",
            "context_len": model.context_len,
            "target_len": model.target_len,
            "width": model.width,
            "entries": entries,
        }, indent=2)
    if isinstance(model, CircuitModel):
        return json.dumps({
            "variant": "circuit",
            "dimension": model.context_len,
            "target_len": model.target_len,
            "width": model.width,
            "circuit": serialize_circuit(model.circuit),
        }, indent=2)
    raise TypeError(f"cannot serialize {type(model).__name__}")


def load_model(text: str):
    doc = json.loads(text)
    if doc["variant"] == "table":
        model = TableModel(doc["context_len"], doc["width"], doc["target_len"])
        for entry in doc["entries"]:
            if len(entry) == 3:
                context, word, count = entry
                comp = 0
            else:
                context, comp, word, count = entry
            per_comp = model.counts.setdefault(tuple(context),
                                               [{} for _ in range(model.target_len)])
            per_comp[comp][word] = count
        return model
    if doc["variant"] == "circuit":
        return CircuitModel(parse_circuit(doc["circuit"]), doc["dimension"],
                            doc["width"], doc["target_len"])
    raise ValueError(f"unknown model variant {doc['variant']!r}")
