#!/usr/bin/env python3
"""Regenerate the committed fixture flight logs under tests/fixtures/.

Invokes the flight simulator's ``dwa3d`` CLI as a subprocess, so the plots
package itself never touches simulator code — the fixtures cross the
package boundary as plain log files.
"""

import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

# (scenario, variant, avoidance or None, seed, fixture filename)
FLIGHTS = [
    ("wall", "naive", "lateral", 0, "wall-lateral-0.log"),
    ("wall", "naive", "lateral", 1, "wall-lateral-1.log"),
    ("wall", "naive", "vertical", 0, "wall-vertical-0.log"),
    ("wall", "naive", "vertical", 1, "wall-vertical-1.log"),
    ("zigzag", "rrt-size", None, 0, "zigzag-0.log"),
    ("zigzag", "rrt-size", None, 1, "zigzag-1.log"),
    ("zigzag", "rrt-size", None, 2, "zigzag-2.log"),
    ("zigzag", "rrt-size", None, 3, "zigzag-3.log"),
    ("narrow_gaps", "rrt", None, 0, "narrow_gaps-0.log"),
    ("narrow_gaps", "rrt", None, 1, "narrow_gaps-1.log"),
    ("narrow_gaps", "rrt", None, 2, "narrow_gaps-2.log"),
    ("narrow_gaps", "rrt", None, 3, "narrow_gaps-3.log"),
]


def main() -> int:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    for scenario, variant, avoidance, seed, name in FLIGHTS:
        with tempfile.TemporaryDirectory() as tmp:
            cmd = ["dwa3d", "run", "--scenario", scenario,
                   "--variant", variant, "--seed", str(seed), "--out", tmp]
            if avoidance:
                cmd += ["--avoidance", avoidance]
            print("+", " ".join(cmd), flush=True)
            proc = subprocess.run(cmd)
            if proc.returncode != 0:
                print(f"flight failed with exit code {proc.returncode}",
                      file=sys.stderr)
                return 1
            shutil.copy(Path(tmp) / f"{scenario}-{seed}.log", FIXTURES / name)
    print(f"wrote {len(FLIGHTS)} fixture logs to {FIXTURES}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
