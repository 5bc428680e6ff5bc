"""Hidden environments as discrete dynamical systems over fixed-width words.

A state is a plain tuple: unsigned words for the digital maps, floats for
the real-valued reference maps. Update rules come in a few flavors
(permutation table over the packed state space, affine mod 2**w, quantized
real map) that all step the same way, so trajectories, conjugation by a
coordinate change, and canonical-form checks work on any of them.

Scalar recurrences of order N ("the next word from the N most recent
ones") are interchangeable with N-dimensional maps; ``lift_timeseries``
performs that rewrite exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

State = tuple
MapFn = Callable[[State], State]


def word_mask(width: int) -> int:
    return (1 << width) - 1


def pack_state(state: Sequence[int], width: int) -> int:
    """Pack component words into one integer, component 0 in the low bits."""
    packed = 0
    for i, w in enumerate(state):
        packed |= int(w) << (i * width)
    return packed


def unpack_state(packed: int, dimension: int, width: int) -> tuple[int, ...]:
    mask = word_mask(width)
    return tuple((int(packed) >> (i * width)) & mask for i in range(dimension))


def _check_permutation(table: Sequence[int]) -> None:
    size = len(table)
    arr = np.asarray(table, dtype=np.int64)
    if arr.size != size or arr.min(initial=0) < 0 or arr.max(initial=-1) >= size:
        raise ValueError("table entries must lie in [0, len(table))")
    if not (np.bincount(arr, minlength=size) == 1).all():
        raise ValueError("table is not a bijection")


# ---------------------------------------------------------------------------
# Vector maps
# ---------------------------------------------------------------------------

@dataclass
class DiscreteMap:
    """One-step update rule x(t+1) = F(x(t)) over ``dimension`` components.

    ``width`` is the component word width in bits, or None for real-valued
    reference maps. ``table`` holds the packed-state permutation when the
    map is exact and enumerable.
    """

    dimension: int
    width: int | None
    kind: str
    step_fn: MapFn
    table: list[int] | None = None


def permutation_map(table: Sequence[int], dimension: int, width: int) -> DiscreteMap:
    """Exact bijective map given as a permutation of the packed state space."""
    size = 1 << (dimension * width)
    if len(table) != size:
        raise ValueError(f"table must have {size} entries for K={dimension}, w={width}")
    _check_permutation(table)
    table = [int(v) for v in table]

    def step(state: State) -> State:
        return unpack_state(table[pack_state(state, width)], dimension, width)

    return DiscreteMap(dimension, width, "permutation", step, table)


def affine_map(matrix: Sequence[Sequence[int]], offset: Sequence[int], width: int) -> DiscreteMap:
    """x -> A x + b, componentwise mod 2**width."""
    dimension = len(offset)
    if len(matrix) != dimension or any(len(row) != dimension for row in matrix):
        raise ValueError("matrix shape must match offset length")
    mod = 1 << width
    a = [[int(v) % mod for v in row] for row in matrix]
    b = [int(v) % mod for v in offset]

    def step(state: State) -> State:
        return tuple(
            (sum(a[i][j] * state[j] for j in range(dimension)) + b[i]) % mod
            for i in range(dimension)
        )

    return DiscreteMap(dimension, width, "affine", step)


def quantized_map(fn: Callable[[State], State], dimension: int, width: int,
                  scale: float) -> DiscreteMap:
    """Real-valued rule snapped onto the word lattice.

    Words u are interpreted as the reals u * scale, the rule is applied,
    and each output is rounded half-to-even back to a word mod 2**width.
    """
    if scale <= 0:
        raise ValueError("scale must be positive")
    mod = 1 << width

    def step(state: State) -> State:
        reals = fn(tuple(u * scale for u in state))
        # round() is banker's rounding, the declared half-to-even rule
        return tuple(round(v / scale) % mod for v in reals)

    return DiscreteMap(dimension, width, "quantized", step)


def real_map(fn: Callable[[State], State], dimension: int, kind: str = "real") -> DiscreteMap:
    """Unquantized real-valued map, used by the canonical-form reference checks."""
    return DiscreteMap(dimension, None, kind, lambda s: tuple(fn(tuple(s))))


def func_map(fn: MapFn, dimension: int, width: int | None) -> DiscreteMap:
    """General callable map; produced by lifting and conjugation."""
    return DiscreteMap(dimension, width, "func", fn)


def rotation_map(omega: float) -> DiscreteMap:
    """Planar rotation by omega per step; radius is its dynamical invariant."""
    c, s = math.cos(omega), math.sin(omega)

    def step(state: State) -> State:
        x, y = state
        return (c * x - s * y, s * x + c * y)

    return DiscreteMap(2, None, "real", step)


def step_map(m: DiscreteMap, state: Sequence) -> State:
    """Apply the map once. Deterministic; dimension must match."""
    if len(state) != m.dimension:
        raise ValueError(f"state has {len(state)} components, map expects {m.dimension}")
    return m.step_fn(tuple(state))


# ---------------------------------------------------------------------------
# Trajectories
# ---------------------------------------------------------------------------

@dataclass
class Trajectory:
    """Ordered solution states; states[i+1] = F(states[i]) under the source map."""

    states: list[State]
    start: int = 0

    def __len__(self) -> int:
        return len(self.states)

    def component(self, i: int) -> list:
        return [s[i] for s in self.states]


def generate_trajectory(m: DiscreteMap, init: Sequence, steps: int) -> Trajectory:
    """Iterate the map ``steps`` times; the trajectory includes the seed state."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    states = [tuple(init)]
    for _ in range(steps):
        states.append(step_map(m, states[-1]))
    return Trajectory(states)


def trajectory_consistent(m: DiscreteMap, traj: Trajectory, tol: float = 0.0) -> bool:
    """Check that consecutive entries are related by the map."""
    for a, b in zip(traj.states, traj.states[1:]):
        nxt = step_map(m, a)
        if tol == 0.0:
            if tuple(nxt) != tuple(b):
                return False
        elif any(abs(u - v) > tol for u, v in zip(nxt, b)):
            return False
    return True


# ---------------------------------------------------------------------------
# Scalar recurrences
# ---------------------------------------------------------------------------

@dataclass
class TimeSeriesMap:
    """Order-N scalar recurrence: next word from the N most recent ones."""

    order: int
    width: int
    rule: Callable[[tuple[int, ...]], int]
    name: str = ""

    def __post_init__(self) -> None:
        if self.order < 1:
            raise ValueError("order must be >= 1")


def step_timeseries(ts: TimeSeriesMap, history: Sequence[int]) -> int:
    """Evaluate the recurrence on a full history window, most recent last."""
    if len(history) != ts.order:
        raise ValueError(f"history must hold exactly {ts.order} words")
    return int(ts.rule(tuple(history)))


def lift_timeseries(ts: TimeSeriesMap) -> DiscreteMap:
    """Rewrite an order-N recurrence as an N-dimensional vector map.

    The lifted state stores the newest value first, so the first component
    of a lifted trajectory reproduces the scalar output stream exactly.
    """

    def step(state: State) -> State:
        history = tuple(reversed(state))
        return (int(ts.rule(history)),) + tuple(state[:-1])

    return func_map(step, ts.order, ts.width)


# Named rules used by scenario configs and tests.

def constant_rule(value: int, order: int, width: int) -> TimeSeriesMap:
    return TimeSeriesMap(order, width, lambda h: value, name="constant")


def repeat_rule(order: int, width: int) -> TimeSeriesMap:
    return TimeSeriesMap(order, width, lambda h: h[-1], name="repeat")


def xor_rule(order: int, width: int) -> TimeSeriesMap:
    def rule(h: tuple[int, ...]) -> int:
        acc = 0
        for v in h:
            acc ^= v
        return acc
    return TimeSeriesMap(order, width, rule, name="xor")


def linear_rule(coeffs: Sequence[int], offset: int, width: int) -> TimeSeriesMap:
    """Linear recurrence sum(c_i * h_i) + b mod 2**width, oldest coefficient first."""
    mod = 1 << width
    cs = [int(c) for c in coeffs]

    def rule(h: tuple[int, ...]) -> int:
        return (sum(c * v for c, v in zip(cs, h)) + offset) % mod

    return TimeSeriesMap(len(cs), width, rule, name="linear")


def permutation_rule(table: Sequence[int], width: int) -> TimeSeriesMap:
    """Order-1 recurrence through a hidden permutation of the word space."""
    if len(table) != (1 << width):
        raise ValueError("table must cover the full word space")
    _check_permutation(table)
    table = [int(v) for v in table]
    return TimeSeriesMap(1, width, lambda h: table[h[-1]], name="permutation")


# ---------------------------------------------------------------------------
# Coordinate transforms and canonical form
# ---------------------------------------------------------------------------

@dataclass
class CoordinateTransform:
    """Invertible change of coordinates with an explicit inverse.

    ``time_modulus`` declares the period of the last (time-like) coordinate
    when it is only recoverable modulo a constant, e.g. an angle.
    """

    forward: MapFn
    inverse: MapFn
    dimension: int
    width: int | None = None
    kind: str = "func"
    table: list[int] | None = None
    time_modulus: float | None = None
    name: str = ""


def table_transform(table: Sequence[int], dimension: int, width: int,
                    name: str = "") -> CoordinateTransform:
    """Exact transform given as a permutation of the packed state space."""
    size = 1 << (dimension * width)
    if len(table) != size:
        raise ValueError(f"table must have {size} entries for K={dimension}, w={width}")
    _check_permutation(table)
    table = [int(v) for v in table]
    inv = [0] * size
    for i, v in enumerate(table):
        inv[v] = i

    def fwd(state: State) -> State:
        return unpack_state(table[pack_state(state, width)], dimension, width)

    def bwd(state: State) -> State:
        return unpack_state(inv[pack_state(state, width)], dimension, width)

    return CoordinateTransform(fwd, bwd, dimension, width, "table", table, name=name)


def func_transform(forward: MapFn, inverse: MapFn, dimension: int,
                   width: int | None = None, time_modulus: float | None = None,
                   name: str = "") -> CoordinateTransform:
    return CoordinateTransform(forward, inverse, dimension, width,
                               time_modulus=time_modulus, name=name)


def identity_transform(dimension: int, width: int | None = None) -> CoordinateTransform:
    ident = lambda s: tuple(s)
    return CoordinateTransform(ident, ident, dimension, width, name="identity")


def polar_transform(omega: float) -> CoordinateTransform:
    """(x, y) -> (radius, angle/omega); the second coordinate ticks like time.

    The angle is recovered mod 2*pi, so the time-like coordinate is only
    defined mod 2*pi/omega; that period is declared as ``time_modulus``.
    """
    if omega == 0:
        raise ValueError("omega must be nonzero")

    def fwd(state: State) -> State:
        x, y = state
        return (math.hypot(x, y), math.atan2(y, x) / omega)

    def bwd(state: State) -> State:
        r, tau = state
        return (r * math.cos(omega * tau), r * math.sin(omega * tau))

    return CoordinateTransform(fwd, bwd, 2, None,
                               time_modulus=2.0 * math.pi / omega, name="polar")


def check_inverse(xf: CoordinateTransform, states: Sequence[Sequence],
                  tol: float = 0.0) -> bool:
    """Verify inverse(forward(x)) == x on the given states."""
    for s in states:
        back = xf.inverse(xf.forward(tuple(s)))
        if tol == 0.0:
            if tuple(back) != tuple(s):
                return False
        elif any(abs(u - v) > tol for u, v in zip(back, s)):
            return False
    return True


def conjugate_map(m: DiscreteMap, xf: CoordinateTransform) -> DiscreteMap:
    """Rewrite the map in the transformed coordinates: Phi = Xi o F o Xi^-1.

    For every state x the covariance Xi(F(x)) = Phi(Xi(x)) holds; it is
    exact (and enumerable) when both the map and transform carry tables.
    """
    if xf.dimension != m.dimension:
        raise ValueError("transform dimension must match map dimension")
    if m.table is not None and xf.table is not None:
        size = len(m.table)
        if len(xf.table) != size:
            raise ValueError("transform and map cover different state spaces")
        phi = [0] * size
        for x in range(size):
            phi[xf.table[x]] = xf.table[m.table[x]]
        return permutation_map(phi, m.dimension, m.width)

    def step(xi: State) -> State:
        return tuple(xf.forward(m.step_fn(tuple(xf.inverse(xi)))))

    kind = "real" if m.width is None else "func"
    return DiscreteMap(m.dimension, m.width, kind, step)


@dataclass
class CanonicalReport:
    """Per-coordinate constancy of a transformed trajectory.

    The last coordinate is the time-like candidate: ``time_increment`` is
    its first per-step increment (reduced mod the transform's declared
    period) and ``time_uniform`` says whether every later increment agrees
    with it to within the tolerance.
    """

    constant: tuple[bool, ...]
    drift: tuple[float, ...]
    time_increment: float
    time_uniform: bool
    time_deviation: float
    tol: float


def canonical_check(xf: CoordinateTransform, traj: Trajectory,
                    tol: float = 1e-9) -> CanonicalReport:
    """Test whether the transform brings a trajectory to canonical form.

    Canonical form means every transformed coordinate is constant except
    the last, which advances by the same increment every step.
    """
    if len(traj) < 3:
        raise ValueError("trajectory must hold at least 3 states")
    xi = [tuple(xf.forward(tuple(s))) for s in traj.states]
    dim = len(xi[0])

    drift = []
    for i in range(dim):
        vals = [s[i] for s in xi]
        drift.append(max(abs(b - a) for a, b in zip(vals, vals[1:])))
    constant = tuple(d <= tol for d in drift)

    last = [s[-1] for s in xi]
    incs = [b - a for a, b in zip(last, last[1:])]
    if xf.time_modulus is not None:
        mod = xf.time_modulus
        incs = [inc % mod for inc in incs]
        # deviations wrapped to the nearest representative around inc[0]
        devs = [abs((inc - incs[0] + mod / 2) % mod - mod / 2) for inc in incs]
    else:
        devs = [abs(inc - incs[0]) for inc in incs]
    deviation = max(devs)
    return CanonicalReport(constant, tuple(drift), incs[0], deviation <= tol,
                           deviation, tol)


# ---------------------------------------------------------------------------
# Observation noise
# ---------------------------------------------------------------------------

@dataclass
class NoiseChannel:
    """Symmetric per-bit flip channel; each bit stays intact with probability q."""

    q: float
    width: int

    def __post_init__(self) -> None:
        if not 0.5 <= self.q <= 1.0:
            raise ValueError("q must lie in [1/2, 1]")
        if self.width < 1:
            raise ValueError("width must be >= 1")


def apply_noise(ch: NoiseChannel, word: int, rng: np.random.Generator) -> int:
    """Flip each bit of the word independently with probability 1 - q."""
    if ch.q == 1.0:
        return int(word)
    flips = rng.random(ch.width) < (1.0 - ch.q)
    mask = 0
    for i, f in enumerate(flips):
        if f:
            mask |= 1 << i
    return int(word) ^ mask
