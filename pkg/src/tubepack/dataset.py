"""Track files, schedule files, seam merging and synthetic datasets.

Track file (JSON)::

    {"geometry": {"width": 640, "height": 480, "duration": 900, "topology": "planar"},
     "tracks": [{"id": "car-1", "start": 12, "boxes": [[x_min, y_min, w, h], ...]}, ...]}

``start`` is the 1-based frame of the first box; one box per frame follows.
``topology`` is ``"planar"`` or ``"cyclic_x"``.

Schedule file (JSON)::

    {"version": ..., "solver": "sa", "seed": 7, "rng": ..., "constraints": {...},
     "placements": {"car-1": 1, ...}, "cost": {"ec": 0, "et": 0.05, "total": 0.05, "t_last": 30},
     "feasible": true, "trace": [[iteration, temperature, current, best], ...]}
"""
from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .cost import CostBreakdown
from .errors import InvalidTrackError, TrackFileError
from .model import FrameGeometry, SynopsisConstraints, SynopsisState, Topology, Tube, check_tube, wrap_x

log = logging.getLogger(__name__)


class MergeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class TrackFile:
    geometry: FrameGeometry
    tracks: tuple[Tube, ...]

    def __post_init__(self):
        object.__setattr__(self, "tracks", tuple(self.tracks))
        seen = set()
        for t in self.tracks:
            if t.id in seen:
                raise TrackFileError(f"duplicate track id {t.id!r}")
            seen.add(t.id)
            try:
                check_tube(t, self.geometry)
            except InvalidTrackError as exc:
                raise TrackFileError(str(exc)) from exc

    def by_id(self) -> dict[str, Tube]:
        return {t.id: t for t in self.tracks}


def _num(v: float):
    v = float(v)
    return int(v) if v.is_integer() and abs(v) < 2 ** 53 else v


def tracks_to_dict(tf: TrackFile) -> dict:
    g = tf.geometry
    return {
        "geometry": {"width": _num(g.width), "height": _num(g.height), "duration": g.duration,
                     "topology": g.topology.value},
        "tracks": [{"id": t.id, "start": t.original_start,
                    "boxes": [[_num(v) for v in row] for row in t.boxes]} for t in tf.tracks],
    }


def save_tracks(tf: TrackFile, path) -> None:
    Path(path).write_text(json.dumps(tracks_to_dict(tf), indent=1) + "\n")


def tracks_from_dict(doc) -> TrackFile:
    try:
        g = doc["geometry"]
        geom = FrameGeometry(float(g["width"]), float(g["height"]), int(g["duration"]),
                             Topology(g.get("topology", "planar")))
        tubes = []
        for k, rec in enumerate(doc["tracks"]):
            tid = rec["id"]
            boxes = rec["boxes"]
            if not isinstance(boxes, list) or not all(isinstance(b, list) and len(b) == 4 for b in boxes):
                raise TrackFileError(f"track {tid!r}: boxes must be a list of [x_min, y_min, width, height]")
            tubes.append(Tube(tid, rec["start"], boxes))
    except TrackFileError:
        raise
    except InvalidTrackError as exc:
        raise TrackFileError(str(exc)) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise TrackFileError(f"malformed track document: {exc!r}") from exc
    return TrackFile(geom, tubes)


def load_tracks(path) -> TrackFile:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise TrackFileError(f"cannot read track file {path}: {exc}") from exc
    return tracks_from_dict(doc)


def save_schedule(state: SynopsisState, cost: CostBreakdown, path, *, seed=None,
                  constraints: SynopsisConstraints | None = None, solver=None, trace=(),
                  feasible=None, rng=None) -> None:
    if len(state) == 0:
        raise TrackFileError("refusing to save an empty schedule")
    doc = {
        "version": __version__,
        "solver": solver,
        "seed": seed,
        "rng": rng,
        "constraints": None if constraints is None else {
            "t_max": constraints.t_max, "n_max": constraints.n_max, "a_thresh": constraints.a_thresh,
            "preserve_order": constraints.preserve_order, "w0": constraints.w0, "w1": constraints.w1},
        "placements": {k: state[k] for k in sorted(state.placements)},
        "cost": {"ec": cost.ec, "et": cost.et, "total": cost.total, "t_last": cost.t_last},
        "feasible": feasible,
        "trace": [list(row) for row in trace],
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def save_result(result, constraints: SynopsisConstraints, path) -> None:
    save_schedule(result.best_state, result.best_cost, path, seed=result.metadata.get("seed"),
                  constraints=constraints, solver=result.solver, trace=result.trace,
                  feasible=result.feasible, rng=result.metadata.get("rng"))


def read_schedule(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
        placements = doc["placements"]
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise TrackFileError(f"cannot read schedule {path}: {exc!r}") from exc
    if not isinstance(placements, dict) or not placements:
        raise TrackFileError(f"schedule {path} has no placements")
    return doc


def load_schedule(path, tubes: Sequence[Tube] | None = None) -> SynopsisState:
    doc = read_schedule(path)
    placements = doc["placements"]
    for tid, s in placements.items():
        if not isinstance(s, int) or isinstance(s, bool):
            raise TrackFileError(f"placement of {tid!r} is not an integer frame: {s!r}")
    if tubes is not None:
        known = {t.id for t in tubes}
        for tid in placements:
            if tid not in known:
                raise TrackFileError(f"schedule places unknown tube {tid!r}")
    return SynopsisState(placements)


# -- seam merging ---------------------------------------------------------

def _touches_right(box, width, window):
    return box[0] + box[2] >= width - window


def _touches_left(box, width, window):
    # a box straddling the seam covers column 0 as well
    return box[0] <= window or box[0] + box[2] > width


def _seam_distance(exit_box, entry_box, width):
    right = max(0.0, width - (exit_box[0] + exit_box[2]))
    return right + entry_box[0]


def _similar(a, b, tol):
    return all(abs(a[k] - b[k]) <= tol * max(a[k], b[k]) for k in (2, 3))


def _interpolate(a, b, n_gap, width):
    dx = (b[0] - a[0] + width / 2) % width - width / 2
    rows = []
    for k in range(1, n_gap + 1):
        f = k / (n_gap + 1)
        x = a[0] + dx * f
        rows.append([float(wrap_x(x, width)), a[1] + (b[1] - a[1]) * f,
                     a[2] + (b[2] - a[2]) * f, a[3] + (b[3] - a[3]) * f])
    return rows


def merge_wrapped_tracks(tf: TrackFile, gap_tolerance: int = 2, seam_window: float | None = None,
                         size_tolerance: float = 0.2) -> TrackFile:
    """Join tracks that a tracker split when the object crossed the left/right seam.

    A track ending against one side edge is joined to a track starting
    against the other side edge 1 to ``1 + gap_tolerance`` frames later, if
    their box sizes agree within ``size_tolerance``. Missing frames are filled
    by linear interpolation along the shorter arc. Joins repeat until no
    candidate pair is left, so chains of splits collapse into one tube.
    """
    geom = tf.geometry
    if not geom.cyclic:
        warnings.warn("merge_wrapped_tracks on a planar frame is a no-op", MergeWarning, stacklevel=2)
        return tf
    if seam_window is None:
        all_w = np.concatenate([t.boxes[:, 2] for t in tf.tracks]) if tf.tracks else np.array([0.0])
        seam_window = 2 * float(np.median(all_w))
    W = geom.width
    tracks = list(tf.tracks)

    while True:
        best = None
        for e in tracks:
            last = e.boxes[-1]
            for n in tracks:
                if n is e:
                    continue
                gap = n.original_start - e.original_end
                if not 1 <= gap <= 1 + gap_tolerance:
                    continue
                first = n.boxes[0]
                if not _similar(last, first, size_tolerance):
                    continue
                rightward = _touches_right(last, W, seam_window) and _touches_left(first, W, seam_window)
                leftward = _touches_left(last, W, seam_window) and _touches_right(first, W, seam_window)
                if not (rightward or leftward):
                    continue
                if rightward:
                    dist = _seam_distance(last, first, W)
                else:
                    dist = _seam_distance(first, last, W)
                key = (gap, dist, e.id, n.id)
                if best is None or key < best[0]:
                    best = (key, e, n)
        if best is None:
            break
        _, e, n = best
        gap_rows = _interpolate(e.boxes[-1], n.boxes[0], n.original_start - e.original_end - 1, W)
        rows = [*e.boxes.tolist(), *gap_rows, *n.boxes.tolist()]
        merged = Tube(e.id, e.original_start, rows)
        log.debug("merged %s + %s across the seam", e.id, n.id)
        tracks = [merged if t is e else t for t in tracks if t is not n]
    return TrackFile(geom, tracks)


def split_at_seam(tube: Tube, geom: FrameGeometry, drop: int = 0) -> list[Tube]:
    """Cut a cyclic-x tube wherever its box jumps across the seam.

    Emulates a tracker that loses the object at one edge and re-acquires it
    at the other. ``drop`` frames after each cut are discarded. The first
    piece keeps the tube id; later pieces get ``~1``, ``~2``... suffixes.
    """
    x = tube.boxes[:, 0]
    jumps = np.nonzero(np.abs(np.diff(x)) > geom.width / 2)[0] + 1
    pieces = []
    lo = 0
    for k, cut in enumerate([*jumps.tolist(), len(x)]):
        begin = lo if k == 0 else lo + drop
        if begin < cut:
            suffix = "" if not pieces else f"~{len(pieces)}"
            pieces.append(Tube(tube.id + suffix, tube.original_start + begin, tube.boxes[begin:cut]))
        lo = cut
    return pieces


# -- synthetic data -------------------------------------------------------

@dataclass(frozen=True)
class SyntheticSpec:
    """Constant-velocity, constant-size horizontal tracks (highway-style)."""
    n_tracks: int = 20
    width: float = 200
    height: float = 200
    duration: int = 600
    box_width: float = 10
    box_height: float = 8
    speed_min: float = 1.0
    speed_max: float = 1.0
    track_duration: int | None = None
    lane_disjoint: bool = True
    entry: str = "random"
    direction: str = "right"
    topology: Topology = Topology.PLANAR
    split_at_seam: bool = False

    def __post_init__(self):
        object.__setattr__(self, "topology", Topology(self.topology))


class GenerationError(ValueError):
    pass


def generate_synthetic(spec: SyntheticSpec, seed: int = 0) -> TrackFile:
    if spec.n_tracks < 1:
        raise GenerationError("need at least one track")
    if not 0 < spec.speed_min <= spec.speed_max:
        raise GenerationError("speeds must be positive with speed_min <= speed_max")
    if spec.entry not in ("random", "uniform"):
        raise GenerationError(f"unknown entry mode {spec.entry!r}")
    if spec.direction not in ("right", "left", "random"):
        raise GenerationError(f"unknown direction {spec.direction!r}")
    cyclic = spec.topology is Topology.CYCLIC_X
    geom = FrameGeometry(spec.width, spec.height, spec.duration, spec.topology)
    W, H, bw, bh = spec.width, spec.height, spec.box_width, spec.box_height
    if bw > W or bh > H or bw <= 0 or bh <= 0:
        raise GenerationError(f"box {bw}x{bh} does not fit a {W}x{H} frame")
    rng = np.random.default_rng(seed)

    n = spec.n_tracks
    if spec.lane_disjoint:
        lane_h = H / n
        if bh > lane_h:
            raise GenerationError(f"{n} disjoint lanes of height {lane_h} cannot hold boxes of height {bh}")
        lanes = rng.permutation(n)
        ys = [int(l) * lane_h + (lane_h - bh) / 2 for l in lanes]
    else:
        ys = rng.uniform(0, H - bh, size=n).tolist()
    speeds = rng.uniform(spec.speed_min, spec.speed_max, size=n)
    if spec.direction == "random":
        signs = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    else:
        signs = np.full(n, 1.0 if spec.direction == "right" else -1.0)
    phases = rng.uniform(0, W, size=n)

    paths = []
    for k in range(n):
        v = float(speeds[k])
        if cyclic:
            d = spec.track_duration or max(2, int(math.ceil(W / v)))
            xs = wrap_x(phases[k] + signs[k] * v * np.arange(d), W)
        else:
            travel = W - bw
            if spec.track_duration:
                d = spec.track_duration
                v = travel / (d - 1) if d > 1 else 0.0
            else:
                d = int(math.floor(travel / v + 1e-9)) + 1
            xs = v * np.arange(d)
            if signs[k] < 0:
                xs = travel - xs
        if d > spec.duration:
            raise GenerationError(f"track {k} lasts {d} frames, longer than the video ({spec.duration})")
        paths.append(xs)

    if spec.entry == "uniform":
        starts = [1 + (round(k * (spec.duration - len(p)) / (n - 1)) if n > 1 else 0)
                  for k, p in enumerate(paths)]
    else:
        starts = [int(rng.integers(1, spec.duration - len(p) + 2)) for p in paths]

    tubes = []
    for k, (xs, y, s) in enumerate(zip(paths, ys, starts)):
        boxes = np.column_stack([xs, np.full(len(xs), y), np.full(len(xs), bw), np.full(len(xs), bh)])
        tube = Tube(f"t{k:03d}", s, boxes)
        if cyclic and spec.split_at_seam:
            tubes.extend(split_at_seam(tube, geom))
        else:
            tubes.append(tube)
    try:
        return TrackFile(geom, tubes)
    except TrackFileError as exc:
        raise GenerationError(str(exc)) from exc
