"""The tape-walking agent: a K+1 cell body that eats predictable data.

One cycle runs seven steps: position the transform over the body cells,
read them, write back the K newest values unchanged with the residual in
the oldest (tail) cell, pay the move cost and advance, absorb the vacated
residual cell, extract energy from it per bit (leaving the cell
randomized, which becomes the gray trail), and arrive shifted one cell
forward. The residual replaces the tail because the body must keep its K
newest cells intact as the next cycle's context; the overwritten value
stays reconstructible as residual XOR prediction.

Movement is paid before extraction, exactly in step order, so an agent
needs an initial endowment to bootstrap. On a 2D lattice the agent picks
among straight/left/right; re-entering its own trail is allowed (the data
there is spent noise), overlapping its own body is not.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .controller import (LearningState, SplitterConfig, control_step, grant,
                         mutation_step, split_energy)
from .dynsys import NoiseChannel, TimeSeriesMap, apply_noise, step_timeseries
from .predictor import CircuitModel, ConfidenceTracker, TableModel, predict
from .revcomp import MutationWeights
from .thermo import LN2, EnergyLedger, extract_word

HEADINGS = ((1, 0), (0, 1), (-1, 0), (0, -1))  # E, N, W, S, counterclockwise
HEADING_NAMES = ("E", "N", "W", "S")
TURN_DELTA = {"straight": 0, "left": 1, "right": -1}


class Trapped(Exception):
    """All three directions blocked by the agent's own body."""


class Blocked(Exception):
    """The requested move target is occupied by the body."""


# ---------------------------------------------------------------------------
# Cell sources and worlds
# ---------------------------------------------------------------------------

class CellSource:
    """Produces fresh cell values along the agent's path.

    kinds: "constant" (every cell the same word), "iid" (uniform words from
    the cells stream), "series" (a hidden recurrence continued along the
    path; the first ``order`` cells replay the seed history). Observation
    noise flips stored bits but never touches the latent stream, so the
    hidden dynamics stay clean.
    """

    def __init__(self, kind: str, width: int, *, value: int = 0,
                 ts: TimeSeriesMap | None = None,
                 seed_history: Sequence[int] | None = None,
                 noise_q: float = 1.0,
                 rng_cells: np.random.Generator | None = None,
                 rng_noise: np.random.Generator | None = None):
        if kind not in ("constant", "iid", "series"):
            raise ValueError(f"unknown cell source kind {kind!r}")
        self.kind = kind
        self.width = width
        self.value = int(value)
        self.ts = ts
        self.rng_cells = rng_cells
        self.rng_noise = rng_noise
        self.noise = None if noise_q >= 1.0 else NoiseChannel(noise_q, width)
        if kind == "series":
            if ts is None or seed_history is None:
                raise ValueError("series source needs a rule and a seed history")
            if len(seed_history) != ts.order:
                raise ValueError(f"seed history must hold {ts.order} words")
            self._pending = [int(v) for v in seed_history]
            self._window: deque = deque(maxlen=ts.order)
        if kind == "iid" and rng_cells is None:
            raise ValueError("iid source needs a cells RNG")
        if self.noise is not None and rng_noise is None:
            raise ValueError("noisy source needs a noise RNG")

    def next_latent(self) -> int:
        if self.kind == "constant":
            return self.value
        if self.kind == "iid":
            return int(self.rng_cells.integers(0, 1 << self.width))
        if self._pending:
            v = self._pending.pop(0)
        else:
            v = step_timeseries(self.ts, tuple(self._window))
        self._window.append(v)
        return v

    def next_value(self) -> int:
        v = self.next_latent()
        if self.noise is not None:
            v = apply_noise(self.noise, v, self.rng_noise)
        return v

    def swap_rule(self, ts: TimeSeriesMap) -> None:
        """Regime shift: swap the hidden recurrence, keeping the latent window."""
        if self.kind != "series":
            raise ValueError("only series sources can shift regime")
        if ts.order != self.ts.order or ts.width != self.ts.width:
            raise ValueError("replacement rule must match order and width")
        self.ts = ts


class Tape1D:
    """Append-only 1D tape materialized lazily from a cell source."""

    def __init__(self, source: CellSource):
        self.source = source
        self.width = source.width
        self.cells: dict[int, int] = {}
        self.consumed: set[int] = set()
        self._frontier = 0

    def read(self, i: int) -> int:
        if i < 0:
            raise ValueError("tape index must be >= 0")
        while self._frontier <= i:
            self.cells[self._frontier] = self.source.next_value()
            self._frontier += 1
        return self.cells[i]

    def write(self, i: int, word: int) -> None:
        self.cells[i] = int(word)

    def consume(self, i: int, word: int) -> None:
        self.cells[i] = int(word)
        self.consumed.add(i)

    def occupy(self, i: int) -> None:
        """The body never re-enters tape cells; nothing to do."""

    @property
    def trail(self) -> set:
        return self.consumed


class Lattice2D:
    """Sparse 2D lattice; fresh cells materialize on first contact.

    ``consumed`` is the visible gray trail: spent cells not currently under
    the body. A revisited cell leaves the trail while occupied and rejoins
    it when it is consumed again, so trail and body stay disjoint and every
    cell is randomized at most once per visit.
    """

    def __init__(self, source: CellSource):
        self.source = source
        self.width = source.width
        self.cells: dict[tuple[int, int], int] = {}
        self.consumed: set[tuple[int, int]] = set()

    def read(self, pos: tuple[int, int]) -> int:
        if pos not in self.cells:
            self.cells[pos] = self.source.next_value()
        return self.cells[pos]

    def write(self, pos: tuple[int, int], word: int) -> None:
        self.cells[pos] = int(word)

    def consume(self, pos: tuple[int, int], word: int) -> None:
        self.cells[pos] = int(word)
        self.consumed.add(pos)

    def occupy(self, pos: tuple[int, int]) -> None:
        self.consumed.discard(pos)

    @property
    def trail(self) -> set:
        return self.consumed


def render_lattice(world: Lattice2D, body: Sequence[tuple[int, int]]) -> str:
    """Text snapshot: body '#', trail '.', fresh cell values in hex."""
    digits = max(2, (world.width + 3) // 4)
    known = set(world.cells) | set(body)
    if not known:
        return ""
    xs = [p[0] for p in known]
    ys = [p[1] for p in known]
    body_set = set(body)
    rows = []
    for y in range(max(ys), min(ys) - 1, -1):
        row = []
        for x in range(min(xs), max(xs) + 1):
            pos = (x, y)
            if pos in body_set:
                row.append("#" * digits)
            elif pos in world.consumed:
                row.append("." * digits)
            elif pos in world.cells:
                row.append(f"{world.cells[pos]:0{digits}x}")
            else:
                row.append(" " * digits)
        rows.append(" ".join(row))
    return "\n".join(rows)


# ---------------------------------------------------------------------------
# Action generation
# ---------------------------------------------------------------------------

@dataclass
class AGPolicy:
    """Direction chooser; every 2D choice is straight, left, or right.

    kinds: "forward" (1D), "straight" (prefer straight), "round_robin"
    (rotate the first preference each cycle), "random" (seeded shuffle),
    "scripted" (fixed turn list, then straight).
    """

    kind: str = "forward"
    turns: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("forward", "straight", "round_robin", "random", "scripted"):
            raise ValueError(f"unknown policy kind {self.kind!r}")
        for t in self.turns:
            if t not in TURN_DELTA:
                raise ValueError(f"unknown turn {t!r}")

    def preference(self, cycle_index: int, rng: np.random.Generator) -> tuple[str, ...]:
        base = ("straight", "left", "right")
        if self.kind in ("forward", "straight"):
            return base
        if self.kind == "round_robin":
            k = cycle_index % 3
            return base[k:] + base[:k]
        if self.kind == "random":
            order = rng.permutation(3)
            return tuple(base[i] for i in order)
        first = self.turns[cycle_index] if cycle_index < len(self.turns) else "straight"
        return (first,) + tuple(t for t in base if t != first)


# ---------------------------------------------------------------------------
# The agent
# ---------------------------------------------------------------------------

@dataclass
class AgentConfig:
    """Body size, costs, and the learning machinery parameters."""

    k: int
    width: int
    kT: float = 1.0
    eps: float = 1e-9
    c_move: float = 1.0
    c_mut: float = 0.1 * LN2
    endowment: float = 50.0
    confidence_window: int = 256
    replay_window: int = 128
    initial_grant: float = 0.0
    splitter: SplitterConfig = field(
        default_factory=lambda: SplitterConfig(beta_a=0.2, theta_halt=0.8 * 8 * LN2,
                                               theta_resume=0.4 * 8 * LN2))
    policy: AGPolicy = field(default_factory=AGPolicy)
    mutation_weights: MutationWeights | None = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.width < 1:
            raise ValueError("width must be >= 1")
        if min(self.c_move, self.c_mut, self.endowment, self.initial_grant) < 0:
            raise ValueError("costs, endowment and grant must be >= 0")


@dataclass
class CycleReport:
    """Energy movements and residual quality for one completed cycle."""

    cycle: int
    extracted: float
    moved: float
    mutated: float
    zero_fraction: float
    mode: str
    position: tuple[int, int]
    b_rate: float
    ea_balance: float


@dataclass
class EpisodeResult:
    """Per-cycle reports plus the terminal status of a run."""

    reports: list
    events: list
    status: str
    final_balance: float
    endowment: float

    @property
    def cycles(self) -> int:
        return len(self.reports)

    @property
    def net_energy(self) -> float:
        return self.final_balance - self.endowment


class Caterpillar:
    """A body of K+1 cells over a tape or lattice, run one cycle at a time."""

    def __init__(self, cfg: AgentConfig, model, world,
                 rngs: dict[str, np.random.Generator]):
        self.cfg = cfg
        self.model = model
        self.world = world
        self.rngs = rngs
        self.ledger = EnergyLedger(cfg.endowment)
        self.learn = LearningState()
        if cfg.initial_grant:
            grant(self.learn, cfg.initial_grant)
        self.replay: deque = deque(maxlen=cfg.replay_window)
        self.events: list = []
        self.cycle_index = 0
        self.is_lattice = isinstance(world, Lattice2D)
        if self.is_lattice:
            self.heading = 0  # east
            cells = [(-i, 0) for i in range(cfg.k, -1, -1)]
        else:
            cells = list(range(cfg.k + 1))
        self.body: deque = deque(cells)
        self.body_set = set(cells)
        for pos in cells:
            world.read(pos)

    # -- movement ----------------------------------------------------------

    def _target_cell(self, turn: str):
        if not self.is_lattice:
            return self.body[-1] + 1
        h = (self.heading + TURN_DELTA[turn]) % 4
        dx, dy = HEADINGS[h]
        x, y = self.body[-1]
        return (x + dx, y + dy)

    def move_2d(self, turn: str) -> tuple[int, int]:
        """Advance the head one cell after the given turn; body may not overlap."""
        if turn not in TURN_DELTA:
            raise ValueError(f"unknown turn {turn!r}")
        target = self._target_cell(turn)
        if target in self.body_set:
            raise Blocked(f"cell {target} occupied by body")
        self.heading = (self.heading + TURN_DELTA[turn]) % 4
        self._shift_to(target)
        return target

    def _shift_to(self, target) -> None:
        tail = self.body.popleft()
        self.body_set.discard(tail)
        self.body.append(target)
        self.body_set.add(target)
        self.world.occupy(target)
        self.world.read(target)

    def _advance(self) -> None:
        """Pick a direction (AG block), debit the move cost, and shift."""
        if not self.is_lattice:
            self.ledger.debit("move", self.cfg.c_move)
            self._shift_to(self.body[-1] + 1)
            return
        for turn in self.cfg.policy.preference(self.cycle_index, self.rngs.get("ag")):
            target = self._target_cell(turn)
            if target not in self.body_set:
                self.ledger.debit("move", self.cfg.c_move)
                self.heading = (self.heading + TURN_DELTA[turn]) % 4
                self._shift_to(target)
                return
        raise Trapped(f"no free direction at {self.body[-1]}")

    # -- the seven-step cycle ------------------------------------------------

    def cycle(self) -> CycleReport:
        """Run steps 1-7 once; movement energy must already be in the ledger."""
        cfg = self.cfg
        body = list(self.body)
        tail = body[0]
        # 1-2: position and read
        context = tuple(self.world.read(p) for p in body[1:])
        target = self.world.read(tail)
        # 3: residual into the tail cell, newer K cells pass through untouched
        predicted, conf = predict(self.model, context)
        z = target ^ predicted[0]
        self.world.write(tail, z)
        if isinstance(self.model, TableModel):
            self.model.update(context, (target,))
        self.model.confidence.record((z,), cfg.width)
        self.replay.append((context, target))
        # 4: movement (paid from the accumulator)
        self._advance()
        # 5-6: absorb and extract the vacated residual cell, trail it
        engine_word = conf.flip_word()
        energy, junk = extract_word(z, engine_word, conf.q, self.rngs["extract"],
                                    cfg.width, cfg.kT, cfg.eps)
        self.world.consume(tail, junk)
        _, b_rate = split_energy(self.learn, energy, cfg.splitter, self.ledger)
        # 7: shifted state is ready for the next cycle
        zero_fraction = (cfg.width - bin(z).count("1")) / cfg.width
        head = self.body[-1]
        position = head if self.is_lattice else (head, 0)
        report = CycleReport(self.cycle_index, energy, cfg.c_move, 0.0,
                             zero_fraction, self.learn.mode, position, b_rate,
                             self.ledger.balance)
        self.cycle_index += 1
        return report

    # -- learning ------------------------------------------------------------

    def _make_eval(self):
        pairs = Counter(self.replay)
        width = self.cfg.width

        def evaluate(model) -> float:
            zero_bits = 0
            total = 0
            for (ctx, tgt), n in pairs.items():
                z = tgt ^ model.predict_vector(ctx)[0]
                zero_bits += n * (width - bin(z).count("1"))
                total += n * width
            return zero_bits / total

        return evaluate

    def learn_step(self, report: CycleReport) -> float:
        """Controller pass after a cycle: hysteresis gate, then maybe one edit."""
        before = self.learn.mode
        control_step(self.learn, report.b_rate, self.cfg.splitter)
        if self.learn.mode != before:
            event = "freeze" if self.learn.mode == "frozen" else "resume"
            self.events.append((report.cycle, event, report.b_rate))
        spend = 0.0
        if (self.learn.mode == "searching" and isinstance(self.model, CircuitModel)
                and self.replay):
            incumbent = self.model
            self.model, spend = mutation_step(self.learn, self.model,
                                              self.rngs["mutation"], self.cfg.c_mut,
                                              self._make_eval(), self.ledger,
                                              self.cfg.mutation_weights)
            if spend:
                event = "mutate_adopt" if self.model is not incumbent else "mutate_keep"
                self.events.append((report.cycle, event, self.learn.best_rate))
        return spend

    # -- episodes --------------------------------------------------------------

    def run_episode(self, max_cycles: int,
                    shifts: Sequence[tuple[int, TimeSeriesMap]] = ()) -> EpisodeResult:
        """Cycle until exhaustion, entrapment, or the cycle budget runs out.

        ``shifts`` lists (cycle, new rule) regime changes applied to the
        cell source before the named cycle runs.
        """
        self.events = []
        reports: list[CycleReport] = []
        shift_at = {c: ts for c, ts in shifts}
        status = "completed"
        for _ in range(max_cycles):
            if self.cycle_index in shift_at:
                self.world.source.swap_rule(shift_at.pop(self.cycle_index))
            if self.ledger.balance < self.cfg.c_move:
                status = "exhausted"
                break
            try:
                report = self.cycle()
            except Trapped:
                status = "trapped"
                break
            report.mutated = self.learn_step(report)
            report.mode = self.learn.mode
            report.ea_balance = self.ledger.balance
            reports.append(report)
        return EpisodeResult(reports, self.events, status,
                             self.ledger.balance, self.cfg.endowment)
