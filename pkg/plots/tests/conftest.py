import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from logtools import make_header, make_record, make_summary, write_log


@pytest.fixture
def toy_log(tmp_path):
    """A small but schema-complete synthetic flight log."""
    lines = [make_header()] + [make_record(float(t)) for t in range(20)]
    lines.append(make_summary(20))
    return write_log(tmp_path / "toy-0.log", lines)


@pytest.fixture
def toy_logs(tmp_path):
    """Four synthetic logs over two scenarios and both avoidance modes."""
    out = []
    for i, (scn, avoid) in enumerate(
        [("toy", "lateral"), ("toy", "vertical"),
         ("other", "lateral"), ("other", "vertical")]
    ):
        lines = [make_header(scenario=scn, avoidance=avoid, seed=i)]
        lines += [make_record(float(t), y=0.1 * t * (i + 1)) for t in range(20)]
        lines.append(make_summary(20))
        out.append(write_log(tmp_path / f"{scn}-{i}.log", lines))
    return out
