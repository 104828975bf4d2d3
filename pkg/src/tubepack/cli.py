"""Command line driver.

Exit codes: 0 success, 2 bad flags, 3 unreadable/invalid track or schedule
file, 4 infeasible instance, 5 best solution exceeds n_max, 6 exhaustive
oracle budget exceeded.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time

from .dataset import (GenerationError, SyntheticSpec, generate_synthetic, load_schedule, load_tracks,
                      merge_wrapped_tracks, read_schedule, save_result, save_tracks)
from .errors import InstanceRejected, OracleTooLargeError, TrackFileError
from .model import SynopsisConstraints, Topology
from .optimize import AnnealParams, anneal, exhaustive_optimal, greedy_pack
from .report import synopsis_report, write_csv

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_INFEASIBLE = 4
EXIT_NMAX = 5
EXIT_ORACLE = 6

SOLVERS = ("sa", "greedy", "exhaustive")

log = logging.getLogger("tubepack")


def _u64(text):
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _instance_flags(p):
    p.add_argument("--tracks", required=True, help="track file (JSON)")
    p.add_argument("--t-max", type=int, help="maximum synopsis length in frames (default: original duration)")
    p.add_argument("--a-thresh", type=float, default=1.0, help="collision overlap threshold, px^2")
    p.add_argument("--n-max", type=int, default=0, help="allowed colliding pairs in the result")
    p.add_argument("--w0", type=float, default=1.0, help="weight of the collision-pair count")
    p.add_argument("--w1", type=float, default=1.0, help="weight of the duration ratio")
    p.add_argument("--preserve-order", action="store_true")
    p.add_argument("--merge-wrapped", action="store_true",
                   help="join tracks split at the seam of a cyclic-x frame first")
    p.add_argument("--warm-start", choices=("original", "greedy"), default="original")
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--sa-cooling", type=float, default=0.95)
    p.add_argument("--sa-steps", type=int, help="iterations per temperature (default 50 per tube)")
    p.add_argument("--sa-t0", type=float, help="initial temperature (default: calibrated)")
    p.add_argument("--sa-tmin", type=float, default=1e-4)
    p.add_argument("--sa-max-iter", type=int, default=10 ** 6)
    p.add_argument("--sa-compaction", type=float, default=0.3,
                   help="share of proposals that resample a tube earlier in its window")
    p.add_argument("--oracle-budget", type=int, default=10 ** 7)
    p.add_argument("--figures", metavar="DIR", help="also render PNG figures into DIR")


def build_parser():
    parser = argparse.ArgumentParser(prog="tubepack", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve one instance and write schedule + report")
    _instance_flags(run)
    run.add_argument("--solver", choices=SOLVERS, required=True)
    run.add_argument("--out", required=True, help="schedule file to write")
    run.add_argument("--report", required=True, help="metrics CSV to write")

    cmp_ = sub.add_parser("compare", help="run several solvers on the same instance")
    _instance_flags(cmp_)
    cmp_.add_argument("--solver", choices=SOLVERS, action="append", required=True)
    cmp_.add_argument("--report", help="also write the table as CSV here")
    cmp_.add_argument("--out-prefix", help="write each solver's schedule to PREFIX<solver>.json")

    gen = sub.add_parser("generate", help="write a synthetic highway-style track file")
    gen.add_argument("--out", required=True)
    gen.add_argument("--n-tracks", type=int, default=20)
    gen.add_argument("--width", type=float, default=200)
    gen.add_argument("--height", type=float, default=200)
    gen.add_argument("--duration", type=int, default=600)
    gen.add_argument("--box-width", type=float, default=10)
    gen.add_argument("--box-height", type=float, default=8)
    gen.add_argument("--speed-min", type=float, default=1.0)
    gen.add_argument("--speed-max", type=float, default=1.0)
    gen.add_argument("--track-duration", type=int)
    gen.add_argument("--shared-lanes", action="store_true", help="random y positions instead of disjoint lanes")
    gen.add_argument("--entry", choices=("random", "uniform"), default="random")
    gen.add_argument("--direction", choices=("right", "left", "random"), default="right")
    gen.add_argument("--cyclic", action="store_true", help="panoramic frame with identified side edges")
    gen.add_argument("--split-at-seam", action="store_true")
    gen.add_argument("--seed", type=_u64, default=0)
    return parser


def _constraints(args, geom):
    return SynopsisConstraints(
        t_max=args.t_max if args.t_max is not None else geom.duration,
        n_max=args.n_max, a_thresh=args.a_thresh, preserve_order=args.preserve_order,
        w0=args.w0, w1=args.w1)


def _anneal_params(args):
    return AnnealParams(initial_temperature=args.sa_t0, cooling_factor=args.sa_cooling,
                        steps_per_temperature=args.sa_steps, min_temperature=args.sa_tmin,
                        max_iterations=args.sa_max_iter, seed=args.seed,
                        compaction_rate=args.sa_compaction)


def _solve(name, tubes, constraints, geom, args):
    if name == "sa":
        return anneal(tubes, constraints, geom, _anneal_params(args), warm_start=args.warm_start)
    if name == "greedy":
        return greedy_pack(tubes, constraints, geom)
    return exhaustive_optimal(tubes, constraints, geom, budget=args.oracle_budget)


def _load_instance(args):
    tf = load_tracks(args.tracks)
    if args.merge_wrapped:
        tf = merge_wrapped_tracks(tf)
    return tf


def _solve_and_report(name, tf, constraints, args, schedule_path):
    """Solve, write the schedule, then rebuild the report from the written file."""
    t0 = time.perf_counter()
    result = _solve(name, tf.tracks, constraints, tf.geometry, args)
    wall = time.perf_counter() - t0
    seed = args.seed if name == "sa" else None
    if schedule_path:
        save_result(result, constraints, schedule_path)
        state = load_schedule(schedule_path, tf.tracks)
        stored_et = read_schedule(schedule_path)["cost"]["et"]
    else:
        state, stored_et = result.best_state, result.best_cost.et
    rep = synopsis_report(tf.tracks, state, constraints, tf.geometry, solver=name, seed=seed, wall_time=wall)
    if rep.frame_condensation_ratio != stored_et:
        raise RuntimeError("condensation ratio disagrees with the stored temporal cost")
    return result, rep


def cmd_run(args):
    tf = _load_instance(args)
    constraints = _constraints(args, tf.geometry)
    result, rep = _solve_and_report(args.solver, tf, constraints, args, args.out)
    write_csv([rep], args.report)
    if args.figures:
        from .plotting import save_figures
        save_figures(args.figures, tf.tracks, result.best_state, tf.geometry, result.trace, constraints.t_max)
    log.info("%s: total=%r ec=%d t_last=%d", args.solver, rep.total, rep.ec, rep.t_last)
    if not rep.feasible:
        log.error("best schedule has %d colliding pairs, n_max is %d", rep.ec, constraints.n_max)
        return EXIT_NMAX
    return EXIT_OK


def cmd_compare(args):
    tf = _load_instance(args)
    constraints = _constraints(args, tf.geometry)
    reports = []
    for name in args.solver:
        out = f"{args.out_prefix}{name}.json" if args.out_prefix else None
        result, rep = _solve_and_report(name, tf, constraints, args, out)
        reports.append(rep)
        if args.figures:
            from .plotting import save_figures
            save_figures(args.figures, tf.tracks, result.best_state, tf.geometry, result.trace,
                         constraints.t_max, prefix=f"{name}_")
    write_csv(reports, sys.stdout)
    if args.report:
        write_csv(reports, args.report)
    return EXIT_OK if all(r.feasible for r in reports) else EXIT_NMAX


def cmd_generate(args):
    spec = SyntheticSpec(
        n_tracks=args.n_tracks, width=args.width, height=args.height, duration=args.duration,
        box_width=args.box_width, box_height=args.box_height, speed_min=args.speed_min,
        speed_max=args.speed_max, track_duration=args.track_duration,
        lane_disjoint=not args.shared_lanes, entry=args.entry, direction=args.direction,
        topology=Topology.CYCLIC_X if args.cyclic else Topology.PLANAR,
        split_at_seam=args.split_at_seam)
    save_tracks(generate_synthetic(spec, args.seed), args.out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    handler = {"run": cmd_run, "compare": cmd_compare, "generate": cmd_generate}[args.command]
    try:
        return handler(args)
    except TrackFileError as exc:
        log.error("%s", exc)
        return EXIT_PARSE
    except InstanceRejected as exc:
        log.error("infeasible instance: %s", exc)
        return EXIT_INFEASIBLE
    except OracleTooLargeError as exc:
        log.error("%s", exc)
        return EXIT_ORACLE
    except (GenerationError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
