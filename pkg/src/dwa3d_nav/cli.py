"""Command-line entry point: run flights, validate configs, benchmark.

Exit codes: 0 success, 2 collision, 3 timeout, 4 stall, 64 usage error.
check-config exits 0 when every constraint passes and 1 otherwise.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import replace
from pathlib import Path as FsPath

from .config import BeamParams, ObjectiveWeights, PlannerConfig
from .feasibility import AirframeParams, check_limits_feasible
from .flight_log import FlightLogError
from .global_planner import PlanningError, load_path
from .local_planner import dump_scores, validate_weights
from .scenarios import BUILTIN_NAMES, ScenarioError, builtin, load_scenario
from .simulator import EXIT_CODES, SimConfig, Simulation

USAGE_ERROR = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)


def _add_scenario_args(p):
    p.add_argument("--scenario", help=f"built-in name ({', '.join(BUILTIN_NAMES)})")
    p.add_argument("--scenario-file", help="path to a scenario YAML file")
    p.add_argument("--variant", default=None,
                   choices=["naive", "rrt", "rrt-size"],
                   help="global planner variant (default: first applicable)")
    p.add_argument("--out", default=".", help="output directory for flight logs")
    p.add_argument("--timeout", type=float, default=None,
                   help="simulated-time limit in seconds")


def _add_planner_args(p):
    p.add_argument("--avoidance", choices=["lateral", "vertical"], default=None,
                   help="override the scenario's avoidance mode")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--k-psi", type=float, default=None)
    p.add_argument("--k-z", type=float, default=None)
    p.add_argument("--r-search", type=float, default=None)


def build_parser() -> _Parser:
    p = _Parser(prog="dwa3d", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run",
                         help="fly one scenario and write a flight log")
    _add_scenario_args(run)
    _add_planner_args(run)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--replay-path", default=None, metavar="LOG",
                     help="reuse the global path recorded in an earlier "
                          "flight log instead of planning one")
    run.add_argument("--dump-scores", action="store_true",
                     help="also write per-cycle candidate score tables")

    chk = sub.add_parser("check-config",
                         help="validate objective weights, beam geometry and "
                              "acceleration feasibility")
    _add_planner_args(chk)
    chk.add_argument("--dt", type=float, default=1.0)

    bench = sub.add_parser("bench",
                           help="run several seeds and report planning timings")
    _add_scenario_args(bench)
    _add_planner_args(bench)
    bench.add_argument("--seeds", type=int, default=4,
                       help="number of seeds (0..n-1)")
    return p


def _load_spec(args, parser):
    if bool(args.scenario) == bool(args.scenario_file):
        parser.error("exactly one of --scenario / --scenario-file is required")
    try:
        if args.scenario:
            return builtin(args.scenario)
        return load_scenario(args.scenario_file)
    except (ScenarioError, OSError) as exc:
        parser.error(str(exc))


def _apply_overrides(spec, args):
    if args.avoidance:
        spec.avoidance = args.avoidance
    if args.r_search is not None:
        spec.r_search_override = args.r_search
    return spec


def _weights_from(args) -> ObjectiveWeights:
    base = ObjectiveWeights()
    kw = {}
    for name, attr in (("alpha", "alpha"), ("beta", "beta"), ("gamma", "gamma"),
                       ("k_psi", "k_psi"), ("k_z", "k_z")):
        v = getattr(args, attr)
        if v is not None:
            kw[name] = v
    return replace(base, **kw) if kw else base


def _planner_from(args) -> PlannerConfig:
    cfg = PlannerConfig()
    try:
        w = _weights_from(args)
    except ValueError as exc:
        print(f"invalid weights: {exc}", file=sys.stderr)
        raise SystemExit(USAGE_ERROR)
    return replace(cfg, weights=w)


def _variant_for(spec, args, parser):
    if args.variant is None:
        return spec.applicable_variants[0]
    if args.variant not in spec.applicable_variants:
        parser.error(f"variant {args.variant!r} is not applicable to "
                     f"scenario {spec.name!r} "
                     f"(applicable: {', '.join(spec.applicable_variants)})")
    return args.variant


def _sim_config(args) -> SimConfig:
    if args.timeout is not None:
        if args.timeout <= 0.0:
            print("--timeout must be positive", file=sys.stderr)
            raise SystemExit(USAGE_ERROR)
        return SimConfig(timeout=args.timeout)
    return SimConfig()


def cmd_run(args, parser) -> int:
    spec = _apply_overrides(_load_spec(args, parser), args)
    fixed_path = None
    if args.replay_path is not None:
        if args.variant is not None:
            parser.error("--replay-path already fixes the variant; "
                         "drop --variant")
        try:
            fixed_path = load_path(args.replay_path)
        except (FlightLogError, PlanningError, OSError) as exc:
            parser.error(f"cannot replay {args.replay_path}: {exc}")
        variant = fixed_path.variant.value
    else:
        variant = _variant_for(spec, args, parser)
    out = FsPath(args.out)
    out.mkdir(parents=True, exist_ok=True)
    sim = Simulation(spec, variant, args.seed, planner=_planner_from(args),
                     sim=_sim_config(args), path=fixed_path)
    score_dir = None
    if args.dump_scores:
        score_dir = out / f"{spec.name}-{args.seed}-scores"
        score_dir.mkdir(exist_ok=True)

    def on_cycle(s: Simulation):
        if score_dir is not None and s.last_plan is not None:
            with open(score_dir / f"cycle-{len(s.records):05d}.txt", "w") as fh:
                dump_scores(s.last_plan, fh)

    result = sim.run(on_cycle)
    log_path = out / f"{spec.name}-{args.seed}.log"
    result.write_log(log_path)
    print(f"{spec.name} seed={args.seed} variant={variant}: {result.outcome} "
          f"in {result.sim_time:.1f} s, min clearance "
          f"{result.min_clearance:.3f} m -> {log_path}")
    return result.exit_code


def cmd_check_config(args, parser) -> int:
    try:
        weights = _weights_from(args)
    except ValueError as exc:
        print(f"FAIL  weight construction: {exc}")
        return 1
    beam_kwargs = {"r_search": args.r_search} if args.r_search is not None else {}
    try:
        beam = BeamParams(**beam_kwargs)
    except ValueError as exc:
        print(f"FAIL  beam geometry: {exc}")
        return 1
    cfg = PlannerConfig(weights=weights, beam=beam, dt=args.dt)
    if args.avoidance:
        cfg = cfg.with_avoidance(args.avoidance)
    rep = validate_weights(cfg.weights, cfg.limits, cfg.beam, cfg.dt)
    feas = check_limits_feasible(cfg.limits, AirframeParams())
    for line in rep.lines() + feas.lines():
        print(line)
    return 0 if (rep.ok and feas.ok) else 1


def cmd_bench(args, parser) -> int:
    spec = _apply_overrides(_load_spec(args, parser), args)
    variant = _variant_for(spec, args, parser)
    out = FsPath(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    worst = 0
    for seed in range(args.seeds):
        result = Simulation(spec, variant, seed, planner=_planner_from(args),
                            sim=_sim_config(args)).run()
        result.write_log(out / f"{spec.name}-{seed}.log")
        s = result.summary
        rows.append([spec.name, variant, seed, s.outcome, f"{s.sim_time:.1f}",
                     s.n_records, f"{s.planning_ms_median:.3f}",
                     f"{s.planning_ms_p95:.3f}", f"{s.planning_ms_max:.3f}",
                     f"{s.min_clearance:.3f}"])
        worst = max(worst, result.exit_code)
        print(f"seed {seed}: {s.outcome}, median "
              f"{s.planning_ms_median:.1f} ms, p95 {s.planning_ms_p95:.1f} ms")
    with open(out / "bench-summary.csv", "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["scenario", "variant", "seed", "outcome", "sim_time",
                     "cycles", "planning_ms_median", "planning_ms_p95",
                     "planning_ms_max", "min_clearance"])
        wr.writerows(rows)
    return worst


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"run": cmd_run, "check-config": cmd_check_config,
               "bench": cmd_bench}[args.command]
    return handler(args, parser)


if __name__ == "__main__":
    sys.exit(main())
