"""Flight log file format: line-delimited JSON with header, records, summary.

Layout (one JSON object per line):
  line 1:    {"type": "header", "schema_version": 1, ...run metadata...}
  lines 2..: {"type": "record", ...one control cycle each...}
  last line: {"type": "summary", ...outcome and aggregates...}

A log without a summary line is truncated and refused on read.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from typing import List

FLIGHT_LOG_VERSION = 1


class FlightLogError(ValueError):
    def __init__(self, message, byte_offset=None):
        if byte_offset is not None:
            message = f"{message} (at byte offset {byte_offset})"
        super().__init__(message)
        self.byte_offset = byte_offset


@dataclass
class LogRecord:
    t: float                  # simulated time at the start of the cycle
    x: float
    y: float
    z: float
    psi: float
    vcx: float                # current velocities (before this cycle's step)
    vcz: float
    wcz: float
    cmd_vx: float             # velocity command selected this cycle
    cmd_vz: float
    cmd_wz: float
    clearance: float          # ground-truth distance to the nearest surface
    planning_ms: float
    subgoal: List[float]
    waypoint_index: int
    n_admissible: int


@dataclass
class LogSummary:
    outcome: str              # "success" | "collision" | "timeout" | "stall"
    sim_time: float
    path_length: float
    min_clearance: float
    n_records: int
    planning_ms_median: float
    planning_ms_p95: float
    planning_ms_max: float


@dataclass
class FlightLog:
    header: dict
    records: List[LogRecord] = field(default_factory=list)
    summary: LogSummary = None


def _percentile_nearest_rank(sorted_values, q):
    if not sorted_values:
        return math.nan
    k = max(1, math.ceil(q * len(sorted_values)))
    return sorted_values[k - 1]


def summarize(records: List[LogRecord], outcome: str, sim_time: float,
              min_clearance: float) -> LogSummary:
    """Aggregate the per-cycle records into the summary line."""
    times = sorted(r.planning_ms for r in records)
    length = 0.0
    for a, b in zip(records, records[1:]):
        length += math.sqrt((b.x - a.x) ** 2 + (b.y - a.y) ** 2
                            + (b.z - a.z) ** 2)
    return LogSummary(
        outcome=outcome,
        sim_time=sim_time,
        path_length=length,
        min_clearance=min_clearance,
        n_records=len(records),
        planning_ms_median=_percentile_nearest_rank(times, 0.5),
        planning_ms_p95=_percentile_nearest_rank(times, 0.95),
        planning_ms_max=times[-1] if times else math.nan,
    )


def write_flight_log(path, header: dict, records: List[LogRecord],
                     summary: LogSummary):
    head = {"type": "header", "schema_version": FLIGHT_LOG_VERSION}
    head.update(header)
    with open(path, "w") as fh:
        fh.write(json.dumps(head, sort_keys=True) + "\n")
        for r in records:
            d = {"type": "record"}
            d.update(asdict(r))
            fh.write(json.dumps(d, sort_keys=True) + "\n")
        d = {"type": "summary"}
        d.update(asdict(summary))
        fh.write(json.dumps(d, sort_keys=True) + "\n")


def read_flight_log(path) -> FlightLog:
    with open(path, "rb") as fh:
        data = fh.read()
    offset = 0
    rows = []
    for raw in data.split(b"\n"):
        if raw.strip():
            try:
                rows.append((offset, json.loads(raw)))
            except json.JSONDecodeError as exc:
                raise FlightLogError(
                    f"truncated or corrupt log line: {exc.msg}",
                    byte_offset=offset) from exc
        offset += len(raw) + 1
    if not rows:
        raise FlightLogError("empty flight log", byte_offset=0)
    first_off, head = rows[0]
    if head.get("type") != "header":
        raise FlightLogError("first line is not a header", byte_offset=first_off)
    version = head.get("schema_version")
    if version != FLIGHT_LOG_VERSION:
        raise FlightLogError(
            f"unsupported schema_version {version!r} "
            f"(expected {FLIGHT_LOG_VERSION})", byte_offset=first_off)
    log = FlightLog(header=head)
    for off, row in rows[1:]:
        kind = row.pop("type", None)
        if kind == "record":
            if log.summary is not None:
                raise FlightLogError("record after summary", byte_offset=off)
            try:
                log.records.append(LogRecord(**row))
            except TypeError as exc:
                raise FlightLogError(f"malformed record: {exc}",
                                     byte_offset=off) from exc
        elif kind == "summary":
            if log.summary is not None:
                raise FlightLogError("duplicate summary", byte_offset=off)
            try:
                log.summary = LogSummary(**row)
            except TypeError as exc:
                raise FlightLogError(f"malformed summary: {exc}",
                                     byte_offset=off) from exc
        else:
            raise FlightLogError(f"unknown line type {kind!r}", byte_offset=off)
    if log.summary is None:
        raise FlightLogError("truncated log: no summary line",
                             byte_offset=len(data))
    return log
