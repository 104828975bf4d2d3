"""Overlap geometry and tube collision counting.

Two tubes collide when, on some synopsis frame they share, the overlap area of
their boxes is at least ``a_thresh``. On a cyclic-x frame the left and right
edges are identified, so x-extents are arcs on a circle of circumference equal
to the frame width.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import BoundingBox, FrameGeometry, SynopsisState, Tube


@dataclass(frozen=True)
class CollisionPair:
    id_a: str
    id_b: str
    first_offending_frame: int
    max_overlap_area: float


def _interval_overlap(a0, a1, b0, b1):
    return np.maximum(0.0, np.minimum(a1, b1) - np.maximum(a0, b0))


def _x_overlap(xa, wa, xb, wb, geom: FrameGeometry):
    if not geom.cyclic:
        return _interval_overlap(xa, xa + wa, xb, xb + wb)
    # Arc A injects into the circle (wa <= width), so summing its
    # intersections with the three lifts of arc B counts each shared point once.
    W = geom.width
    total = _interval_overlap(xa, xa + wa, xb, xb + wb)
    total = total + _interval_overlap(xa, xa + wa, xb - W, xb - W + wb)
    total = total + _interval_overlap(xa, xa + wa, xb + W, xb + W + wb)
    return total


def box_overlap_area(a: BoundingBox, b: BoundingBox, geom: FrameGeometry) -> float:
    dx = _x_overlap(a.x_min, a.box_width, b.x_min, b.box_width, geom)
    dy = _interval_overlap(a.y_min, a.y_min + a.box_height, b.y_min, b.y_min + b.box_height)
    return float(dx * dy)


def overlap_areas(boxes_a: np.ndarray, boxes_b: np.ndarray, geom: FrameGeometry) -> np.ndarray:
    """Row-wise overlap areas of two broadcastable ``(..., 4)`` box arrays."""
    xa, ya, wa, ha = np.moveaxis(np.asarray(boxes_a, dtype=float), -1, 0)
    xb, yb, wb, hb = np.moveaxis(np.asarray(boxes_b, dtype=float), -1, 0)
    dx = _x_overlap(xa, wa, xb, wb, geom)
    dy = _interval_overlap(ya, ya + ha, yb, yb + hb)
    return dx * dy


def shared_frames(a: Tube, start_a: int, b: Tube, start_b: int) -> tuple[int, int]:
    """First and last synopsis frame both tubes are alive (first > last if none)."""
    return max(start_a, start_b), min(start_a + a.duration, start_b + b.duration) - 1


def overlap_profile(a: Tube, start_a: int, b: Tube, start_b: int, geom: FrameGeometry):
    """Synopsis frames shared by both tubes and the overlap area on each."""
    lo, hi = shared_frames(a, start_a, b, start_b)
    if lo > hi:
        return np.empty(0, dtype=int), np.empty(0)
    ba = a.boxes[lo - start_a:hi - start_a + 1]
    bb = b.boxes[lo - start_b:hi - start_b + 1]
    return np.arange(lo, hi + 1), overlap_areas(ba, bb, geom)


def tubes_collide(a: Tube, start_a: int, b: Tube, start_b: int, a_thresh: float,
                  geom: FrameGeometry) -> tuple[bool, int | None]:
    """Whether the placed tubes collide, and the first offending synopsis frame."""
    frames, areas = overlap_profile(a, start_a, b, start_b, geom)
    hits = np.nonzero(areas >= a_thresh)[0]
    if len(hits) == 0:
        return False, None
    return True, int(frames[hits[0]])


class TemporalIndex:
    """Sweep-line index over closed synopsis life intervals."""

    def __init__(self, intervals: Iterable[tuple[str, int, int]]):
        self.intervals = sorted(intervals, key=lambda iv: (iv[1], iv[0]))

    def candidate_pairs(self) -> list[tuple[str, str]]:
        """Unordered id pairs (smaller id first) whose intervals share a frame."""
        pairs = []
        active: list[tuple[str, int, int]] = []
        for iv in self.intervals:
            tid, start, _ = iv
            active = [a for a in active if a[2] >= start]
            for other in active:
                pairs.append((other[0], tid) if other[0] < tid else (tid, other[0]))
            active.append(iv)
        pairs.sort()
        return pairs


def build_temporal_index(tubes: Iterable[Tube], state: SynopsisState) -> TemporalIndex:
    return TemporalIndex((t.id, state[t.id], state[t.id] + t.duration - 1) for t in tubes)


def _pair_record(a: Tube, sa: int, b: Tube, sb: int, a_thresh: float, geom: FrameGeometry):
    frames, areas = overlap_profile(a, sa, b, sb, geom)
    hits = np.nonzero(areas >= a_thresh)[0]
    if len(hits) == 0:
        return None
    return CollisionPair(a.id, b.id, int(frames[hits[0]]), float(areas.max()))


def count_collisions(tubes: Iterable[Tube], state: SynopsisState, a_thresh: float,
                     geom: FrameGeometry) -> tuple[int, list[CollisionPair]]:
    by_id = {t.id: t for t in tubes}
    pairs = []
    for ia, ib in build_temporal_index(by_id.values(), state).candidate_pairs():
        rec = _pair_record(by_id[ia], state[ia], by_id[ib], state[ib], a_thresh, geom)
        if rec is not None:
            pairs.append(rec)
    return len(pairs), pairs


def naive_count_collisions(tubes: Iterable[Tube], state: SynopsisState, a_thresh: float,
                           geom: FrameGeometry) -> tuple[int, list[CollisionPair]]:
    """Reference scan: every frame, every pair alive on it, scalar overlap."""
    tubes = sorted(tubes, key=lambda t: t.id)
    horizon = max(state[t.id] + t.duration - 1 for t in tubes)
    first: dict[tuple[str, str], int] = {}
    peak: dict[tuple[str, str], float] = {}
    for t in range(1, horizon + 1):
        alive = [tb for tb in tubes if state[tb.id] <= t <= state[tb.id] + tb.duration - 1]
        for i in range(len(alive)):
            for j in range(i + 1, len(alive)):
                a, b = alive[i], alive[j]
                area = box_overlap_area(a.box(t - state[a.id]), b.box(t - state[b.id]), geom)
                key = (a.id, b.id)
                peak[key] = max(peak.get(key, 0.0), area)
                if area >= a_thresh and key not in first:
                    first[key] = t
    pairs = [CollisionPair(a, b, first[(a, b)], peak[(a, b)]) for (a, b) in sorted(first)]
    return len(pairs), pairs


class PairTable:
    """Collision verdicts for every tube pair as a function of relative offset.

    Tubes only move in time, so whether tubes ``i`` and ``j`` collide depends
    only on ``d = start_j - start_i``. Each pair's verdicts are computed once,
    lazily, for all offsets with temporal overlap; solvers then evaluate
    collisions with table lookups.
    """

    def __init__(self, tubes: Sequence[Tube], a_thresh: float, geom: FrameGeometry):
        self.tubes = list(tubes)
        self.a_thresh = a_thresh
        self.geom = geom
        self.durations = [t.duration for t in self.tubes]
        self._tables: dict[tuple[int, int], np.ndarray | None] = {}
        n = len(self.tubes)
        ylo = [t.boxes[:, 1].min() for t in self.tubes]
        yhi = [(t.boxes[:, 1] + t.boxes[:, 3]).max() for t in self.tubes]
        if geom.cyclic:
            xlo = xhi = None
        else:
            xlo = [t.boxes[:, 0].min() for t in self.tubes]
            xhi = [(t.boxes[:, 0] + t.boxes[:, 2]).max() for t in self.tubes]
        # pairs whose space-time envelopes cannot meet never collide
        self.neighbours: list[list[int]] = [[] for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                if a_thresh > 0 and (min(yhi[i], yhi[j]) - max(ylo[i], ylo[j]) <= 0):
                    continue
                if a_thresh > 0 and xlo is not None and min(xhi[i], xhi[j]) - max(xlo[i], xlo[j]) <= 0:
                    continue
                self.neighbours[i].append(j)
                self.neighbours[j].append(i)

    def table(self, i: int, j: int) -> np.ndarray:
        """Boolean verdicts for ``d = start_j - start_i`` at index ``d + dur_j - 1``."""
        key = (i, j) if i < j else (j, i)
        tab = self._tables.get(key)
        if tab is None:
            tab = self._compute(*key)
            self._tables[key] = tab
        if key == (i, j):
            return tab
        return tab[::-1]

    def _compute(self, i, j):
        a, b = self.tubes[i], self.tubes[j]
        hit = overlap_areas(a.boxes[:, None, :], b.boxes[None, :, :], self.geom) >= self.a_thresh
        # frame k_a of a meets frame k_b of b when k_b - k_a = -d
        da, db = a.duration, b.duration
        out = np.zeros(da + db - 1, dtype=bool)
        for d in range(-(db - 1), da):
            out[d + db - 1] = hit.diagonal(-d).any()
        out.setflags(write=False)
        return out

    def collide(self, i: int, j: int, start_i: int, start_j: int) -> bool:
        d = start_j - start_i
        dj = self.durations[j]
        if d <= -dj or d >= self.durations[i]:
            return False
        return bool(self.table(i, j)[d + dj - 1])

    def collisions_with(self, i: int, start_i: int, starts: Sequence[int]) -> int:
        """Number of tubes colliding with tube ``i`` placed at ``start_i``."""
        n = 0
        di = self.durations[i]
        for j in self.neighbours[i]:
            d = starts[j] - start_i
            dj = self.durations[j]
            if -dj < d < di and self.table(i, j)[d + dj - 1]:
                n += 1
        return n

    def count(self, starts: Sequence[int]) -> int:
        n = 0
        for i in range(len(self.tubes)):
            for j in self.neighbours[i]:
                if j > i and self.collide(i, j, starts[i], starts[j]):
                    n += 1
        return n
