"""Instance builders and brute-force oracles shared by the tests.

The oracles here deliberately avoid the library's geometry code paths.
"""
import itertools

import numpy as np

from tubepack.model import FrameGeometry, SynopsisConstraints, SynopsisState, Topology, Tube


def still_tube(tid, box, duration, start=1):
    return Tube(tid, start, [list(box)] * duration)


def random_instance(rng, n_tubes, horizon, width=60, height=60, cyclic=False, max_dur=None,
                    integer=False):
    """Random moving-box tubes plus a random in-horizon placement."""
    geom = FrameGeometry(width, height, horizon, Topology.CYCLIC_X if cyclic else Topology.PLANAR)
    max_dur = max_dur or horizon
    tubes, placements = [], {}
    for k in range(n_tubes):
        d = int(rng.integers(1, min(max_dur, horizon) + 1))
        st = int(rng.integers(1, horizon - d + 2))
        w = int(rng.integers(2, width // 3 + 1)) if integer else float(rng.uniform(2, width / 3))
        h = int(rng.integers(2, height // 3 + 1)) if integer else float(rng.uniform(2, height / 3))
        if cyclic:
            x0, x1 = rng.uniform(0, width, 2)
        else:
            x0, x1 = rng.uniform(0, width - w, 2)
        y0, y1 = rng.uniform(0, height - h, 2)
        f = np.linspace(0, 1, d)
        xs = x0 + (x1 - x0) * f
        ys = y0 + (y1 - y0) * f
        if integer:
            xs, ys = np.floor(xs), np.floor(ys)
        if cyclic:
            xs = np.mod(xs, width)
        boxes = np.column_stack([xs, ys, np.full(d, w), np.full(d, h)])
        tubes.append(Tube(f"t{k:02d}", st, boxes))
        placements[f"t{k:02d}"] = int(rng.integers(1, horizon - d + 2))
    return tubes, SynopsisState(placements), geom


def raster_cells(box, geom):
    """Integer pixel cells covered by an integer-aligned box (torus aware)."""
    x, y, w, h = (int(v) for v in box)
    cols = [(x + k) % int(geom.width) if geom.cyclic else x + k for k in range(w)]
    return {(c, r) for c in cols for r in range(y, y + h)}


def raster_overlap(a, b, geom):
    return len(raster_cells(a, geom) & raster_cells(b, geom))


def brute_force_optimum(tubes, constraints, geom):
    """Minimum total over every placement, scored from first principles."""
    tubes = sorted(tubes, key=lambda t: t.id)
    windows = [range(1, constraints.t_max - t.duration + 2) for t in tubes]
    ranked = sorted(range(len(tubes)), key=lambda i: (tubes[i].original_start, tubes[i].id))
    best = None
    for starts in itertools.product(*windows):
        if constraints.preserve_order and any(starts[a] > starts[b] for a, b in zip(ranked, ranked[1:])):
            continue
        ec = 0
        for i, j in itertools.combinations(range(len(tubes)), 2):
            for t in range(max(starts[i], starts[j]), min(starts[i] + tubes[i].duration,
                                                            starts[j] + tubes[j].duration)):
                a = tubes[i].boxes[t - starts[i]]
                b = tubes[j].boxes[t - starts[j]]
                ox = max(0.0, min(a[0] + a[2], b[0] + b[2]) - max(a[0], b[0]))
                oy = max(0.0, min(a[1] + a[3], b[1] + b[3]) - max(a[1], b[1]))
                if ox * oy >= constraints.a_thresh:
                    ec += 1
                    break
        t_last = max(s + t.duration - 1 for s, t in zip(starts, tubes))
        total = constraints.w0 * ec + constraints.w1 * (t_last / geom.duration)
        if best is None or total < best[0]:
            best = (total, starts)
    return best


def small_sa_instance(seed):
    """Three moving tubes, 20-frame horizon, durations 3..6 (oracle-optimality setting)."""
    r = np.random.default_rng(seed)
    geom = FrameGeometry(40, 40, 20)
    tubes = []
    for k in range(3):
        d = int(r.integers(3, 7))
        st = int(r.integers(1, 20 - d + 2))
        w, h = r.uniform(8, 16, 2)
        x0, x1 = r.uniform(0, 40 - w, 2)
        y0, y1 = r.uniform(0, 40 - h, 2)
        f = np.linspace(0, 1, d)
        boxes = np.column_stack([x0 + (x1 - x0) * f, y0 + (y1 - y0) * f, np.full(d, w), np.full(d, h)])
        tubes.append(Tube(f"t{k}", st, boxes))
    return tubes, geom, SynopsisConstraints(t_max=20, n_max=3, a_thresh=1.0, w0=10, w1=1)
