"""Solvers over tube start frames.

Each tube has one degree of freedom, its synopsis start frame. ``t_max`` and
order preservation are hard (never violated by any proposal); collisions are
penalised through the cost and ``n_max`` is checked on the final answer.
"""
from __future__ import annotations

import math
from functools import cached_property
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .collision import PairTable
from .cost import CostBreakdown, combine, total_cost
from .errors import OracleTooLargeError
from .model import (FrameGeometry, SynopsisConstraints, SynopsisState, Tube, admit, order_key,
                    validate_state)

RNG_NAME = "numpy.random.PCG64"
DEFAULT_ORACLE_BUDGET = 10 ** 7


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True)
class AnnealParams:
    """Cooling schedule. ``None`` fields are derived from the instance:
    the initial temperature from the spread of proposal costs and the
    steps per temperature as 50 per tube."""
    initial_temperature: float | None = None
    cooling_factor: float = 0.95
    steps_per_temperature: int | None = None
    min_temperature: float = 1e-4
    max_iterations: int = 10 ** 6
    seed: int = 0
    compaction_rate: float = 0.3

    def __post_init__(self):
        if not 0 < self.cooling_factor < 1:
            raise ValueError("cooling_factor must lie in (0, 1)")
        if not self.min_temperature > 0:
            raise ValueError("min_temperature must be positive")
        if self.initial_temperature is not None and not self.initial_temperature > self.min_temperature:
            raise ValueError("initial_temperature must exceed min_temperature")
        if self.steps_per_temperature is not None and self.steps_per_temperature < 1:
            raise ValueError("steps_per_temperature must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not 0 <= self.compaction_rate < 1:
            raise ValueError("compaction_rate must lie in [0, 1)")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class SolveResult:
    best_state: SynopsisState
    best_cost: CostBreakdown
    feasible: bool
    trace: tuple[tuple[int, float, float, float], ...] = ()
    iterations_used: int = 0
    solver: str = ""
    metadata: dict = field(default_factory=dict, compare=False)


class Problem:
    """An admitted instance compiled for fast repeated evaluation.

    Tubes are indexed in id order; ``starts`` lists are aligned with it.
    """

    def __init__(self, tubes: Sequence[Tube], constraints: SynopsisConstraints, geom: FrameGeometry):
        tubes = list(tubes)
        admit(tubes, constraints)
        self.tubes = sorted(tubes, key=lambda t: t.id)
        self.constraints = constraints
        self.geom = geom
        self.n = len(self.tubes)
        self.ids = [t.id for t in self.tubes]
        self.dur = [t.duration for t in self.tubes]
        self.latest = [constraints.t_max - d + 1 for d in self.dur]
        by_rank = sorted(range(self.n), key=lambda i: order_key(self.tubes[i]))
        self.rank_order = by_rank
        self.pred = [None] * self.n
        self.succ = [None] * self.n
        for r, i in enumerate(by_rank):
            if r > 0:
                self.pred[i] = by_rank[r - 1]
            if r + 1 < self.n:
                self.succ[i] = by_rank[r + 1]

    @cached_property
    def table(self) -> PairTable:
        return PairTable(self.tubes, self.constraints.a_thresh, self.geom)

    def window(self, i: int, starts: Sequence[int]) -> tuple[int, int]:
        lo, hi = 1, self.latest[i]
        if self.constraints.preserve_order:
            if self.pred[i] is not None:
                lo = max(lo, starts[self.pred[i]])
            if self.succ[i] is not None:
                hi = min(hi, starts[self.succ[i]])
        return lo, hi

    def score(self, ec: int, t_last: int) -> CostBreakdown:
        c = self.constraints
        return combine(ec, t_last, self.geom.duration, c.w0, c.w1)

    def evaluate(self, starts: Sequence[int]) -> CostBreakdown:
        t_last = max(s + d - 1 for s, d in zip(starts, self.dur))
        return self.score(self.table.count(starts), t_last)

    def to_state(self, starts: Sequence[int]) -> SynopsisState:
        return SynopsisState(dict(zip(self.ids, (int(s) for s in starts))))

    def from_state(self, state: SynopsisState) -> list[int]:
        report = validate_state(state, self.tubes, self.constraints)
        report.raise_if_invalid()
        return [state[i] for i in self.ids]

    def result(self, starts, solver, trace=(), iterations=0, **meta) -> SolveResult:
        state = self.to_state(starts)
        cost = total_cost(state, self.tubes, self.constraints, self.geom)
        return SolveResult(state, cost, cost.ec <= self.constraints.n_max, tuple(trace),
                           iterations, solver, meta)


def _draw(problem: Problem, starts: Sequence[int], rng: np.random.Generator) -> tuple[int, int]:
    i = int(rng.integers(problem.n))
    lo, hi = problem.window(i, starts)
    cur = starts[i]
    if lo == hi:
        return i, cur
    new = int(rng.integers(lo, hi + 1))
    if new == cur:
        new = int(rng.integers(lo, hi + 1))
    return i, new


def _draw_earlier(problem: Problem, starts: Sequence[int], rng: np.random.Generator) -> tuple[int, int]:
    i = int(rng.integers(problem.n))
    lo, _ = problem.window(i, starts)
    cur = starts[i]
    if cur <= lo:
        return i, cur
    return i, int(rng.integers(lo, cur))


def propose_move(state: SynopsisState, tubes: Sequence[Tube], constraints: SynopsisConstraints,
                 rng: np.random.Generator) -> SynopsisState:
    """Resample one random tube's start uniformly over its feasible window."""
    problem = Problem(tubes, constraints, geom=None)
    starts = problem.from_state(state)
    i, new = _draw(problem, starts, rng)
    return state.with_start(problem.ids[i], new)


def metropolis_accept(delta: float, temperature: float, rng: np.random.Generator) -> bool:
    if delta <= 0:
        return True
    return bool(rng.random() < math.exp(-delta / temperature))


def initial_state(tubes: Sequence[Tube], constraints: SynopsisConstraints,
                  geom: FrameGeometry | None = None) -> SynopsisState:
    """Original placement, pulled earlier where a tube would overrun ``t_max``."""
    tubes = list(tubes)
    admit(tubes, constraints)
    state = SynopsisState({t.id: min(t.original_start, constraints.t_max - t.duration + 1)
                           for t in tubes})
    if constraints.preserve_order and not validate_state(state, tubes, constraints).ok:
        if geom is None:
            raise ValueError("clamping broke the tube order; a geometry is needed for the greedy fallback")
        return greedy_pack(tubes, constraints, geom).best_state
    return state


def _temperature_scale(problem: Problem, starts, cost: CostBreakdown, rng, samples=100) -> float:
    totals = []
    for _ in range(samples):
        i, new = _draw(problem, starts, rng)
        totals.append(_moved_cost(problem, starts, cost, i, new).total)
    return max(float(np.std(totals)), 1e-6)


def _moved_cost(problem: Problem, starts, cost: CostBreakdown, i: int, new: int) -> CostBreakdown:
    old = starts[i]
    if new == old:
        return cost
    table = problem.table
    ec = cost.ec - table.collisions_with(i, old, starts) + table.collisions_with(i, new, starts)
    end_new = new + problem.dur[i] - 1
    t_last = cost.t_last
    if end_new >= t_last:
        t_last = end_new
    elif old + problem.dur[i] - 1 == t_last:
        rest = max((s + d - 1 for j, (s, d) in enumerate(zip(starts, problem.dur)) if j != i),
                   default=end_new)
        t_last = max(end_new, rest)
    return problem.score(ec, t_last)


def anneal(tubes: Sequence[Tube], constraints: SynopsisConstraints, geom: FrameGeometry,
           params: AnnealParams | None = None, warm_start: str | SynopsisState = "original") -> SolveResult:
    """Simulated annealing with Metropolis acceptance and geometric cooling.

    ``warm_start`` is ``"original"`` (the source video's placement),
    ``"greedy"`` (the greedy_pack result) or an explicit feasible state.
    """
    params = params or AnnealParams()
    problem = Problem(tubes, constraints, geom)
    rng = make_rng(params.seed)

    if isinstance(warm_start, SynopsisState):
        start_state = warm_start
    elif warm_start == "greedy":
        start_state = greedy_pack(problem.tubes, constraints, geom).best_state
    elif warm_start == "original":
        start_state = initial_state(problem.tubes, constraints, geom)
    else:
        raise ValueError(f"unknown warm start {warm_start!r}")
    starts = problem.from_state(start_state)
    cost = problem.evaluate(starts)

    T = params.initial_temperature
    if T is None:
        T = _temperature_scale(problem, starts, cost, rng)
    t0 = T
    steps = params.steps_per_temperature or 50 * problem.n

    best, best_cost = list(starts), cost
    trace = [(0, T, cost.total, best_cost.total)]
    it = 0
    # at least one temperature level runs even if the calibrated T0 is tiny
    while True:
        for _ in range(steps):
            if it >= params.max_iterations:
                break
            it += 1
            if params.compaction_rate and rng.random() < params.compaction_rate:
                i, new = _draw_earlier(problem, starts, rng)
            else:
                i, new = _draw(problem, starts, rng)
            if new == starts[i]:
                continue
            cand = _moved_cost(problem, starts, cost, i, new)
            if metropolis_accept(cand.total - cost.total, T, rng):
                starts[i] = new
                cost = cand
                if cost.total < best_cost.total:
                    best, best_cost = list(starts), cost
        trace.append((it, T, cost.total, best_cost.total))
        T *= params.cooling_factor
        if T < params.min_temperature or it >= params.max_iterations:
            break

    return problem.result(best, "sa", trace, it, seed=params.seed, rng=RNG_NAME,
                          initial_temperature=t0, steps_per_temperature=steps)


def greedy_pack(tubes: Sequence[Tube], constraints: SynopsisConstraints, geom: FrameGeometry) -> SolveResult:
    """Place tubes one at a time, in original order, at the earliest start
    that adds no collision; failing that, where it adds the fewest."""
    problem = Problem(tubes, constraints, geom)
    order = problem.rank_order
    # with order preservation every later tube must still fit after this one
    cap = list(problem.latest)
    if constraints.preserve_order:
        running = None
        for i in reversed(order):
            running = problem.latest[i] if running is None else min(running, problem.latest[i])
            cap[i] = running

    starts = [0] * problem.n
    placed: list[int] = []
    prev_start = 1
    table = problem.table
    for i in order:
        lo = prev_start if constraints.preserve_order else 1
        hi = cap[i]
        best_s, best_hits = None, None
        for s in range(lo, hi + 1):
            hits = sum(1 for j in placed if table.collide(i, j, s, starts[j]))
            if best_hits is None or hits < best_hits:
                best_s, best_hits = s, hits
            if hits == 0:
                break
        starts[i] = best_s
        placed.append(i)
        prev_start = best_s
    return problem.result(starts, "greedy")


def _order_ok(S: np.ndarray, problem: Problem) -> np.ndarray:
    ok = np.ones(len(S), dtype=bool)
    r = problem.rank_order
    for a, b in zip(r, r[1:]):
        ok &= S[:, a] <= S[:, b]
    return ok


def exhaustive_optimal(tubes: Sequence[Tube], constraints: SynopsisConstraints, geom: FrameGeometry,
                       budget: int = DEFAULT_ORACLE_BUDGET, chunk: int = 1 << 18) -> SolveResult:
    """Exact minimiser by enumeration of every placement vector.

    States are visited in lexicographic order of the start vector (tubes by
    id), and the first minimiser wins ties.
    """
    problem = Problem(tubes, constraints, geom)
    sizes = np.array(problem.latest, dtype=np.int64)
    n_states = 1
    for s in problem.latest:
        n_states *= s
        if n_states > budget:
            raise OracleTooLargeError(f"state space exceeds the oracle budget of {budget} placements")
    c = constraints
    dur = np.array(problem.dur, dtype=np.int64)
    pairs = []
    for i in range(problem.n):
        for j in problem.table.neighbours[i]:
            if j > i:
                pairs.append((i, j, problem.table.table(i, j), problem.dur[j]))

    best_total, best_row = math.inf, None
    # place values of the mixed-radix start vector, most significant first
    radix = np.ones(problem.n, dtype=np.int64)
    for k in range(problem.n - 2, -1, -1):
        radix[k] = radix[k + 1] * sizes[k + 1]
    for lo in range(0, n_states, chunk):
        idx = np.arange(lo, min(lo + chunk, n_states), dtype=np.int64)
        S = (idx[:, None] // radix[None, :]) % sizes[None, :] + 1
        ec = np.zeros(len(S), dtype=np.int64)
        for i, j, tab, dj in pairs:
            d = S[:, j] - S[:, i]
            inside = (d > -dj) & (d < problem.dur[i])
            hit = np.zeros(len(S), dtype=bool)
            hit[inside] = tab[d[inside] + dj - 1]
            ec += hit
        t_last = (S + dur[None, :] - 1).max(axis=1)
        total = c.w0 * ec + c.w1 * (t_last / geom.duration)
        if c.preserve_order:
            total = np.where(_order_ok(S, problem), total, np.inf)
        k = int(np.argmin(total))
        if total[k] < best_total:
            best_total, best_row = float(total[k]), S[k].tolist()
    return problem.result(best_row, "exhaustive", states=n_states)
