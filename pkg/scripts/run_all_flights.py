#!/usr/bin/env python3
"""Fly every builtin scenario across its applicable planner variants and a
set of seeds; print one result line per flight and a final verdict.

Exit status is 0 only if every flight ends in success with ground-truth
minimum clearance of at least the drone radius.
"""

import argparse
import sys
import time

from dwa3d_nav import builtin, run_flight
from dwa3d_nav.scenarios import BUILTIN_NAMES


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scenarios", nargs="*", default=list(BUILTIN_NAMES))
    ap.add_argument("--seeds", type=int, nargs="*", default=[0, 1, 2, 3])
    ap.add_argument("--variants", nargs="*", default=None,
                    help="restrict to these variants (default: all applicable)")
    ap.add_argument("--out", default=None,
                    help="directory for flight logs (optional)")
    args = ap.parse_args(argv)

    failures = 0
    for name in args.scenarios:
        spec = builtin(name)
        variants = [v for v in spec.applicable_variants
                    if args.variants is None or v in args.variants]
        for variant in variants:
            for seed in args.seeds:
                t0 = time.perf_counter()
                res = run_flight(spec, variant, seed)
                wall = time.perf_counter() - t0
                ok = (res.outcome == "success"
                      and res.min_clearance >= spec.r_drone)
                failures += 0 if ok else 1
                s = res.summary
                print(f"{'PASS' if ok else 'FAIL'} {name:17s} {variant:8s} "
                      f"seed={seed} outcome={res.outcome:9s} "
                      f"sim={res.sim_time:6.1f}s wall={wall:5.1f}s "
                      f"clr={res.min_clearance:5.2f} "
                      f"ms(med/p95/max)={s.planning_ms_median:5.1f}/"
                      f"{s.planning_ms_p95:5.1f}/{s.planning_ms_max:5.1f}",
                      flush=True)
                if args.out is not None:
                    import os
                    os.makedirs(args.out, exist_ok=True)
                    res.write_log(
                        f"{args.out}/{name}-{variant}-{seed}.log")
    print(f"{'ALL PASS' if failures == 0 else f'{failures} FAILURES'}")
    return 0 if failures == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
