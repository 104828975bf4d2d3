"""Synopsis quality metrics and their comma-separated output.

Adopted definitions:

* frame condensation ratio = t_last / t_v (identical to the temporal cost);
* compact ratio = summed tube space-time volume / (width * height * t_last);
* overlap ratio = overlap area summed over every shared frame of every
  colliding pair, divided by the summed box area of all tubes.
"""
from __future__ import annotations

import csv
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .collision import count_collisions, overlap_profile
from .cost import total_cost
from .model import FrameGeometry, SynopsisConstraints, SynopsisState, Tube

FIELDS = ("solver", "seed", "total", "ec", "et", "t_last", "frame_condensation_ratio",
          "compact_ratio", "overlap_ratio", "collision_pairs", "feasible", "wall_time")


@dataclass(frozen=True)
class SynopsisReport:
    solver: str
    seed: int | None
    total: float
    ec: int
    et: float
    t_last: int
    frame_condensation_ratio: float
    compact_ratio: float
    overlap_ratio: float
    collision_pairs: int
    feasible: bool
    wall_time: float


def synopsis_report(tubes: Sequence[Tube], state: SynopsisState, constraints: SynopsisConstraints,
                    geom: FrameGeometry, solver: str = "", seed=None, wall_time: float = 0.0) -> SynopsisReport:
    tubes = list(tubes)
    cost = total_cost(state, tubes, constraints, geom)
    _, pairs = count_collisions(tubes, state, constraints.a_thresh, geom)
    by_id = {t.id: t for t in tubes}
    offending = 0.0
    for p in pairs:
        a, b = by_id[p.id_a], by_id[p.id_b]
        _, areas = overlap_profile(a, state[a.id], b, state[b.id], geom)
        offending += float(areas.sum())
    footprint = float(sum((t.boxes[:, 2] * t.boxes[:, 3]).sum() for t in tubes))
    condensation = cost.t_last / geom.duration
    if condensation != cost.et:
        raise RuntimeError("condensation ratio and temporal cost diverged")
    return SynopsisReport(
        solver=solver, seed=seed, total=cost.total, ec=cost.ec, et=cost.et, t_last=cost.t_last,
        frame_condensation_ratio=condensation,
        compact_ratio=footprint / (geom.width * geom.height * cost.t_last),
        overlap_ratio=offending / footprint,
        collision_pairs=len(pairs),
        feasible=cost.ec <= constraints.n_max,
        wall_time=wall_time,
    )


def write_csv(reports: Iterable[SynopsisReport], path_or_file) -> None:
    rows = [asdict(r) for r in reports]
    if hasattr(path_or_file, "write"):
        _write(rows, path_or_file)
    else:
        with Path(path_or_file).open("w", newline="") as fh:
            _write(rows, fh)


def _write(rows, fh):
    writer = csv.DictWriter(fh, fieldnames=FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if row[k] is None else repr(row[k]) if isinstance(row[k], float) else row[k])
                         for k in FIELDS})


def read_csv(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))
