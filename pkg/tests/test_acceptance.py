"""Exit criteria of the build, one test each, at their fixed tolerances."""
import math
import time

import numpy as np
import pytest

from helpers import random_instance, small_sa_instance
from tubepack import cli
from tubepack.collision import BoundingBox as B
from tubepack.collision import box_overlap_area, count_collisions, naive_count_collisions
from tubepack.cost import combine, total_cost
from tubepack.dataset import (SyntheticSpec, TrackFile, generate_synthetic, load_schedule, merge_wrapped_tracks,
                              read_schedule, save_result, save_tracks)
from tubepack.model import (FrameGeometry, SynopsisConstraints, SynopsisState, Topology, Tube,
                            validate_state)
from tubepack.optimize import (AnnealParams, Problem, _draw, anneal, exhaustive_optimal, greedy_pack,
                               initial_state, make_rng, metropolis_accept)

pytestmark = pytest.mark.acceptance


def test_c1_oracle_optimality(verdict):
    oracle_time = 0.0
    exact, worst = 0, 0.0
    for seed in range(50):
        tubes, geom, c = small_sa_instance(seed)
        t0 = time.perf_counter()
        opt = exhaustive_optimal(tubes, c, geom).best_cost.total
        oracle_time += time.perf_counter() - t0
        got = anneal(tubes, c, geom, AnnealParams(seed=seed)).best_cost.total
        exact += got == opt
        worst = max(worst, (got - opt) / opt)
    ok = oracle_time < 10 and exact >= 45 and worst <= 0.10
    verdict("C1 oracle optimality", ok,
            f"exact {exact}/50, worst gap {worst:.3%}, oracle {oracle_time:.2f}s")


def test_c2_index_naive_equivalence(verdict):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    mismatches = 0
    for _ in range(200):
        n = int(rng.integers(2, 51))
        horizon = int(rng.integers(10, 501))
        cyclic = bool(rng.random() < 0.3)
        tubes, state, geom = random_instance(rng, n, horizon, width=120, height=90, cyclic=cyclic,
                                             max_dur=int(rng.integers(1, 80)))
        a_thresh = float(rng.choice([0.0, 1.0, 10.0, 50.0]))
        if count_collisions(tubes, state, a_thresh, geom) != naive_count_collisions(tubes, state, a_thresh, geom):
            mismatches += 1
    elapsed = time.perf_counter() - t0
    verdict("C2 indexed == naive collision count", mismatches == 0 and elapsed < 60,
            f"{mismatches} mismatches over 200 instances, {elapsed:.1f}s")


def test_c3_unit_fidelity(verdict):
    planar = FrameGeometry(100, 100, 100)
    torus = FrameGeometry(100, 100, 100, Topology.CYCLIC_X)
    overlaps = [
        box_overlap_area(B(0, 0, 10, 10), B(5, 0, 10, 10), planar) == 50,
        box_overlap_area(B(2, 3, 4, 5), B(2, 3, 4, 5), planar) == 20,
        box_overlap_area(B(0, 0, 10, 10), B(20, 20, 5, 5), planar) == 0,
        box_overlap_area(B(95, 0, 10, 10), B(0, 0, 10, 10), torus) == 50,
    ]
    c = combine(2, 50, 100, 1.0, 1.0)
    collision_free = combine(0, 30, 100, 2.0, 3.0)
    one = Tube("a", 7, [[0, 0, 5, 5]] * 5)
    single = exhaustive_optimal([one], SynopsisConstraints(t_max=100), planar).best_cost.total
    pair = [Tube("a", 1, [[0, 0, 5, 5]] * 5), Tube("b", 1, [[0, 0, 5, 5]] * 5)]
    twin = exhaustive_optimal(pair, SynopsisConstraints(t_max=100, a_thresh=1, w0=100, w1=1), planar)
    totals = [c.total == 2.5, collision_free.total == 3.0 * collision_free.et, single == 0.05,
              twin.best_cost.total == 0.10]
    verdict("C3 overlap/cost worked examples", all(overlaps) and all(totals),
            f"overlaps {overlaps}, totals {totals}")


def test_c4_torus_invariance(verdict):
    rng = np.random.default_rng(44)
    changed = 0
    for _ in range(100):
        tubes, state, geom = random_instance(rng, int(rng.integers(2, 12)), int(rng.integers(10, 60)),
                                             width=80, height=40, cyclic=True, integer=True)
        c = SynopsisConstraints(t_max=geom.duration, a_thresh=float(rng.integers(0, 30)),
                                w0=float(rng.uniform(0.1, 5)), w1=float(rng.uniform(0.1, 5)))
        dx = int(rng.integers(1, 80))
        moved = []
        for t in tubes:
            boxes = np.array(t.boxes)
            boxes[:, 0] = np.mod(boxes[:, 0] + dx, geom.width)
            moved.append(Tube(t.id, t.original_start, boxes))
        if total_cost(state, tubes, c, geom) != total_cost(state, moved, c, geom):
            changed += 1
    verdict("C4 torus shift invariance", changed == 0, f"{changed}/100 breakdowns changed")


def test_c5_metropolis_statistics(verdict):
    tubes, geom, c = small_sa_instance(8)
    problem = Problem(tubes, c, geom)
    starts = problem.from_state(initial_state(tubes, c, geom))
    base = problem.evaluate(starts).total
    rng = make_rng(5)
    T = 2.0
    n = accepted = 0
    expected = 0.0
    while n < 10000:
        i, new = _draw(problem, starts, rng)
        trial = list(starts)
        trial[i] = new
        delta = problem.evaluate(trial).total - base
        if delta <= 0:
            continue
        n += 1
        expected += math.exp(-delta / T)
        accepted += metropolis_accept(delta, T, rng)
    gap = abs(accepted / n - expected / n)
    verdict("C5 Metropolis acceptance rate", gap <= 0.03,
            f"empirical {accepted / n:.4f} vs analytic {expected / n:.4f} (|diff| {gap:.4f})")


def test_c6_highway_condensation(verdict):
    tf = generate_synthetic(SyntheticSpec(n_tracks=20, track_duration=30, duration=600, entry="uniform",
                                          lane_disjoint=True, height=200, box_height=8), seed=0)
    assert [t.duration for t in tf.tracks] == [30] * 20
    c = SynopsisConstraints(t_max=600, n_max=0, a_thresh=1.0)
    t0 = time.perf_counter()
    g = greedy_pack(tf.tracks, c, tf.geometry).best_cost
    s = anneal(tf.tracks, c, tf.geometry, AnnealParams(seed=0)).best_cost
    elapsed = time.perf_counter() - t0
    ok = g.t_last <= 60 and g.ec == 0 and s.t_last == 30 and s.ec == 0 and elapsed < 30
    verdict("C6 highway condensation", ok,
            f"greedy t_last {g.t_last} ec {g.ec}; sa t_last {s.t_last} ec {s.ec}; {elapsed:.1f}s")


def test_c7_wrap_merge_round_trip(verdict):
    ok = True
    details = []
    for seed in range(10):
        spec = dict(n_tracks=6, topology="cyclic_x", speed_min=2.0, speed_max=6.0, direction="random",
                    duration=500, box_width=12)
        whole = generate_synthetic(SyntheticSpec(**spec), seed)
        split = generate_synthetic(SyntheticSpec(**spec, split_at_seam=True), seed)
        merged = merge_wrapped_tracks(split)
        same = sorted(merged.tracks, key=lambda t: t.id) == sorted(whole.tracks, key=lambda t: t.id)
        idem = merge_wrapped_tracks(merged) == merged
        ok &= same and idem and len(split.tracks) > len(whole.tracks)
        details.append(f"{len(split.tracks)}->{len(merged.tracks)}")
    verdict("C7 wrap-merge round trip + idempotence", ok, ", ".join(details))


def test_c8_cli_determinism(verdict, tmp_path):
    tracks = tmp_path / "tracks.json"
    cli.main(["generate", "--out", str(tracks), "--n-tracks", "10", "--shared-lanes", "--height", "60",
              "--duration", "300", "--seed", "1"])

    def run(seed, name):
        out = tmp_path / f"{name}.json"
        code = cli.main(["run", "--tracks", str(tracks), "--solver", "sa", "--seed", str(seed), "--n-max", "50",
                         "--out", str(out), "--report", str(tmp_path / f"{name}.csv")])
        assert code == cli.EXIT_OK
        return out

    a, b, c = run(17, "a"), run(17, "b"), run(18, "c")
    identical = a.read_bytes() == b.read_bytes()
    trace_changes = read_schedule(a)["trace"] != read_schedule(c)["trace"]
    verdict("C8 CLI determinism", identical and trace_changes,
            f"same seed identical: {identical}; new seed changes trace: {trace_changes}")


def test_c9_hard_constraint_safety(verdict, tmp_path):
    rng = np.random.default_rng(99)
    schedules = violations = 0
    params = dict(steps_per_temperature=25, cooling_factor=0.7, max_iterations=300)
    for k in range(1000):
        n = int(rng.integers(1, 7))
        horizon = int(rng.integers(8, 40))
        tubes, _, geom = random_instance(rng, n, horizon, width=40, height=40, max_dur=12,
                                         cyclic=bool(rng.random() < 0.3))
        longest = max(t.duration for t in tubes)
        c = SynopsisConstraints(t_max=int(rng.integers(longest, horizon + 10)), n_max=int(rng.integers(0, 3)),
                                a_thresh=float(rng.uniform(0, 20)), preserve_order=bool(rng.random() < 0.5),
                                w0=float(rng.uniform(0, 5)), w1=float(rng.uniform(0.1, 5)))
        results = [greedy_pack(tubes, c, geom),
                   anneal(tubes, c, geom, AnnealParams(seed=k, **params)),
                   anneal(tubes, c, geom, AnnealParams(seed=k, **params), warm_start="greedy")]
        size = math.prod(c.t_max - t.duration + 1 for t in tubes)
        if size <= 20000:
            results.append(exhaustive_optimal(tubes, c, geom))
        states = [initial_state(tubes, c, geom)]
        for res in results:
            path = tmp_path / "sched.json"
            save_result(res, c, path)
            states.append(load_schedule(path, tubes))
        for state in states:
            schedules += 1
            violations += not validate_state(state, tubes, c).ok
    verdict("C9 hard-constraint safety", violations == 0 and schedules >= 1000,
            f"{violations} violations in {schedules} emitted schedules")
