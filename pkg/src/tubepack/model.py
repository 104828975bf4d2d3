"""Domain types: frame geometry, boxes, tubes, placements and constraints.

Frame indices are 1-based everywhere. A tube placed at synopsis start ``s``
occupies synopsis frames ``s .. s + duration - 1``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import InstanceRejected, InvalidStateError, InvalidTrackError


class Topology(str, enum.Enum):
    PLANAR = "planar"
    CYCLIC_X = "cyclic_x"


@dataclass(frozen=True)
class FrameGeometry:
    width: float
    height: float
    duration: int
    topology: Topology = Topology.PLANAR

    def __post_init__(self):
        object.__setattr__(self, "topology", Topology(self.topology))
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"frame dimensions must be positive, got {self.width}x{self.height}")
        if int(self.duration) != self.duration or self.duration < 1:
            raise ValueError(f"original duration must be an integer >= 1, got {self.duration}")
        object.__setattr__(self, "duration", int(self.duration))

    @property
    def cyclic(self) -> bool:
        return self.topology is Topology.CYCLIC_X


@dataclass(frozen=True)
class BoundingBox:
    x_min: float
    y_min: float
    box_width: float
    box_height: float

    @property
    def area(self) -> float:
        return self.box_width * self.box_height

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.box_width, self.box_height)


def box_problem(box: Sequence[float], geom: FrameGeometry) -> str | None:
    """Return a description of why ``box`` is invalid for ``geom``, or None."""
    x, y, w, h = box
    if not all(math.isfinite(v) for v in (x, y, w, h)):
        return "non-finite coordinate"
    if w <= 0 or h <= 0:
        return f"box size must be positive, got {w}x{h}"
    if y < 0 or y + h > geom.height:
        return f"y-extent [{y}, {y + h}] outside frame height {geom.height}"
    if geom.cyclic:
        if not 0 <= x < geom.width:
            return f"x_min {x} outside [0, {geom.width}) on cyclic frame"
        if w > geom.width:
            return f"box width {w} exceeds frame width {geom.width}"
    elif x < 0 or x + w > geom.width:
        return f"x-extent [{x}, {x + w}] outside frame width {geom.width}"
    return None


class Tube:
    """One object track: id, original 1-based start frame and per-frame boxes.

    Boxes are held as a read-only ``(duration, 4)`` float array of
    ``[x_min, y_min, width, height]`` rows.
    """

    __slots__ = ("id", "original_start", "boxes")

    def __init__(self, id, original_start: int, boxes):
        arr = np.array(boxes, dtype=float).reshape(-1, 4)
        if len(arr) < 1:
            raise InvalidTrackError(f"tube {id!r} has no boxes")
        if int(original_start) != original_start or original_start < 1:
            raise InvalidTrackError(f"tube {id!r}: start frame must be an integer >= 1, got {original_start}")
        bad = np.nonzero((arr[:, 2] <= 0) | (arr[:, 3] <= 0))[0]
        if len(bad):
            raise InvalidTrackError(f"tube {id!r}: non-positive box size", frame=int(original_start) + int(bad[0]))
        arr.setflags(write=False)
        object.__setattr__(self, "id", str(id))
        object.__setattr__(self, "original_start", int(original_start))
        object.__setattr__(self, "boxes", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Tube is immutable")

    @property
    def duration(self) -> int:
        return len(self.boxes)

    @property
    def original_end(self) -> int:
        return self.original_start + self.duration - 1

    def box(self, k: int) -> BoundingBox:
        return BoundingBox(*(float(v) for v in self.boxes[k]))

    def __len__(self):
        return self.duration

    def __eq__(self, other):
        if not isinstance(other, Tube):
            return NotImplemented
        return (self.id == other.id and self.original_start == other.original_start
                and self.boxes.shape == other.boxes.shape
                and bool(np.array_equal(self.boxes, other.boxes)))

    def __hash__(self):
        return hash((self.id, self.original_start, self.duration))

    def __repr__(self):
        return f"Tube(id={self.id!r}, original_start={self.original_start}, duration={self.duration})"


def check_tube(tube: Tube, geom: FrameGeometry) -> None:
    """Raise InvalidTrackError if ``tube`` does not fit ``geom``."""
    if tube.original_end > geom.duration:
        raise InvalidTrackError(
            f"tube {tube.id!r} ends at frame {tube.original_end}, after the video end {geom.duration}",
            frame=tube.original_end)
    for k, row in enumerate(tube.boxes):
        problem = box_problem(row, geom)
        if problem:
            raise InvalidTrackError(f"tube {tube.id!r}: {problem}", frame=tube.original_start + k)


@dataclass(frozen=True)
class FixedShapeTrack:
    """Constant-size rectangle following a centroid path."""
    id: str
    centroids: Sequence[tuple[float, float]]
    half_width: float
    half_height: float
    original_start: int = 1


def track_to_tube(track: FixedShapeTrack, geom: FrameGeometry) -> Tube:
    c = np.asarray(track.centroids, dtype=float).reshape(-1, 2)
    if len(c) < 1:
        raise InvalidTrackError(f"track {track.id!r} has no centroids")
    if track.half_width <= 0 or track.half_height <= 0:
        raise InvalidTrackError(f"track {track.id!r}: half sizes must be positive")
    boxes = np.empty((len(c), 4))
    boxes[:, 0] = c[:, 0] - track.half_width
    boxes[:, 1] = c[:, 1] - track.half_height
    boxes[:, 2] = 2 * track.half_width
    boxes[:, 3] = 2 * track.half_height
    if geom.cyclic:
        boxes[:, 0] = wrap_x(boxes[:, 0], geom.width)
    tube = Tube(track.id, track.original_start, boxes)
    for k, row in enumerate(boxes):
        problem = box_problem(row, geom)
        if problem:
            raise InvalidTrackError(f"track {track.id!r}: {problem}", frame=track.original_start + k)
    return tube


def wrap_x(x, width):
    """Reduce x coordinates into ``[0, width)``."""
    out = np.mod(x, width)
    # float mod of a tiny negative number can round up to width itself
    return np.where(out >= width, 0.0, out)


@dataclass(frozen=True)
class SynopsisState:
    """Synopsis start frame for every tube id."""
    placements: Mapping[str, int]

    def __post_init__(self):
        object.__setattr__(self, "placements",
                           MappingProxyType({str(k): int(v) for k, v in self.placements.items()}))

    def __getitem__(self, tube_id: str) -> int:
        return self.placements[tube_id]

    def __len__(self):
        return len(self.placements)

    def __eq__(self, other):
        if not isinstance(other, SynopsisState):
            return NotImplemented
        return dict(self.placements) == dict(other.placements)

    def __hash__(self):
        return hash(tuple(sorted(self.placements.items())))

    def with_start(self, tube_id: str, start: int) -> "SynopsisState":
        p = dict(self.placements)
        p[tube_id] = start
        return SynopsisState(p)

    @classmethod
    def original(cls, tubes: Iterable[Tube]) -> "SynopsisState":
        return cls({t.id: t.original_start for t in tubes})


@dataclass(frozen=True)
class SynopsisConstraints:
    t_max: int
    n_max: int = 0
    a_thresh: float = 1.0
    preserve_order: bool = False
    w0: float = 1.0
    w1: float = 1.0

    def __post_init__(self):
        if int(self.t_max) != self.t_max or self.t_max < 1:
            raise ValueError(f"t_max must be an integer >= 1, got {self.t_max}")
        if int(self.n_max) != self.n_max or self.n_max < 0:
            raise ValueError(f"n_max must be an integer >= 0, got {self.n_max}")
        if not self.a_thresh >= 0:
            raise ValueError(f"a_thresh must be >= 0, got {self.a_thresh}")
        if not (self.w0 >= 0 and self.w1 >= 0):
            raise ValueError("cost weights must be non-negative")
        if not self.w0 + self.w1 > 0:
            raise ValueError("at least one cost weight must be positive")
        object.__setattr__(self, "t_max", int(self.t_max))
        object.__setattr__(self, "n_max", int(self.n_max))


def order_key(tube: Tube):
    return (tube.original_start, tube.id)


def ranked(tubes: Iterable[Tube]) -> list[Tube]:
    """Tubes in original order: by original start, ties by id."""
    return sorted(tubes, key=order_key)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def raise_if_invalid(self):
        if self.violations:
            raise InvalidStateError("; ".join(self.violations))


def validate_state(state: SynopsisState, tubes: Iterable[Tube],
                   constraints: SynopsisConstraints) -> ValidationReport:
    tubes = list(tubes)
    report = ValidationReport()
    ids = {t.id for t in tubes}
    for t in tubes:
        if t.id not in state.placements:
            report.violations.append(f"tube {t.id!r} has no placement")
    for tid in state.placements:
        if tid not in ids:
            report.violations.append(f"placement for unknown tube {tid!r}")
    for t in tubes:
        if t.duration == 1:
            report.warnings.append(f"tube {t.id!r} lasts a single frame")
        s = state.placements.get(t.id)
        if s is None:
            continue
        if s < 1:
            report.violations.append(f"tube {t.id!r} starts at frame {s} < 1")
        end = s + t.duration - 1
        if end > constraints.t_max:
            report.violations.append(f"tube {t.id!r} ends at frame {end} > t_max {constraints.t_max}")
    if constraints.preserve_order:
        prev = None
        for t in ranked(x for x in tubes if x.id in state.placements):
            if prev is not None and state[t.id] < state[prev.id]:
                report.violations.append(
                    f"order violation: {prev.id!r} starts at {state[prev.id]} "
                    f"but later tube {t.id!r} starts at {state[t.id]}")
            prev = t
    return report


def admit(tubes: Sequence[Tube], constraints: SynopsisConstraints) -> None:
    """Reject instances that cannot be placed under t_max at all."""
    if not tubes:
        raise InstanceRejected("instance has no tubes")
    seen = set()
    for t in tubes:
        if t.id in seen:
            raise InstanceRejected(f"duplicate tube id {t.id!r}")
        seen.add(t.id)
        if t.duration > constraints.t_max:
            raise InstanceRejected(
                f"tube {t.id!r} lasts {t.duration} frames, longer than t_max {constraints.t_max}")
