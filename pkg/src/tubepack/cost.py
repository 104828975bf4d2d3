"""Synopsis cost: weighted collision-pair count plus normalised duration."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .collision import count_collisions
from .errors import InvalidStateError, UndefinedCostError
from .model import FrameGeometry, SynopsisConstraints, SynopsisState, Tube, validate_state


@dataclass(frozen=True)
class CostBreakdown:
    ec: int
    et: float
    total: float
    t_last: int


def combine(ec: int, t_last: int, t_v: int, w0: float, w1: float) -> CostBreakdown:
    """Build a breakdown from its raw terms.

    Every solver scores states through this one expression so that totals
    computed along different paths compare bit-for-bit.
    """
    et = t_last / t_v
    return CostBreakdown(ec=int(ec), et=et, total=w0 * ec + w1 * et, t_last=int(t_last))


def last_frame(state: SynopsisState, tubes: Iterable[Tube]) -> int:
    ends = [state[t.id] + t.duration - 1 for t in tubes]
    if not ends:
        raise UndefinedCostError("cost is undefined for an empty set of tubes")
    return max(ends)


def temporal_cost(state: SynopsisState, tubes: Iterable[Tube], t_v: int) -> tuple[float, int]:
    t_last = last_frame(state, tubes)
    return t_last / t_v, t_last


def total_cost(state: SynopsisState, tubes: Iterable[Tube], constraints: SynopsisConstraints,
               geom: FrameGeometry) -> CostBreakdown:
    tubes = list(tubes)
    if not tubes:
        raise UndefinedCostError("cost is undefined for an empty set of tubes")
    report = validate_state(state, tubes, constraints)
    if not report.ok:
        raise InvalidStateError("; ".join(report.violations))
    ec, _ = count_collisions(tubes, state, constraints.a_thresh, geom)
    return combine(ec, last_frame(state, tubes), geom.duration, constraints.w0, constraints.w1)
