"""Independent reader for dwa3d flight logs.

A flight log is line-delimited JSON: a ``header`` object, one ``record``
object per control cycle, and a trailing ``summary`` object. This module
re-implements the reader from the documented schema alone so that figure
generation stays decoupled from the simulator package.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

SCHEMA_VERSION = 1

_HEADER_KEYS = (
    "schema_version",
    "scenario",
    "bounds",
    "primitives",
    "seed",
    "variant",
    "avoidance",
    "r_drone",
    "start",
    "goal",
    "goal_tolerance",
    "waypoints",
)
_RECORD_KEYS = (
    "t",
    "x",
    "y",
    "z",
    "psi",
    "vcx",
    "vcz",
    "wcz",
    "cmd_vx",
    "cmd_vz",
    "cmd_wz",
    "clearance",
    "planning_ms",
    "subgoal",
    "waypoint_index",
    "n_admissible",
)
_SUMMARY_KEYS = (
    "outcome",
    "sim_time",
    "path_length",
    "min_clearance",
    "n_records",
    "planning_ms_median",
    "planning_ms_p95",
    "planning_ms_max",
)


class LogSchemaError(ValueError):
    """A flight log does not match the documented schema.

    The message always names the offending field (or line) so the caller
    can tell which part of the contract was violated.
    """


@dataclass(frozen=True)
class FlightLog:
    """One parsed flight log: header dict, per-cycle records, summary dict."""

    path: Path
    header: dict[str, Any]
    records: list[dict[str, Any]]
    summary: dict[str, Any]

    # Convenience accessors used by every figure -------------------------
    @property
    def scenario(self) -> str:
        return self.header["scenario"]

    @property
    def seed(self) -> int:
        return self.header["seed"]

    @property
    def variant(self) -> str:
        return self.header["variant"]

    @property
    def avoidance(self) -> str:
        return self.header["avoidance"]

    @property
    def label(self) -> str:
        return f"{self.scenario}/{self.variant}/{self.avoidance}/s{self.seed}"

    def column(self, key: str) -> list[float]:
        """One record field as a list, in flight order."""
        if key not in _RECORD_KEYS:
            raise LogSchemaError(f"unknown record field {key!r}")
        return [rec[key] for rec in self.records]


def _require(obj: dict[str, Any], keys: tuple[str, ...], kind: str, where: str) -> None:
    for key in keys:
        if key not in obj:
            raise LogSchemaError(f"{where}: {kind} is missing field {key!r}")


def load_log(path: str | Path) -> FlightLog:
    """Parse one flight log, validating it against the documented schema."""
    path = Path(path)
    header: dict[str, Any] | None = None
    summary: dict[str, Any] | None = None
    records: list[dict[str, Any]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            where = f"{path.name}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise LogSchemaError(f"{where}: not valid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict) or "type" not in obj:
                raise LogSchemaError(f"{where}: line is missing field 'type'")
            kind = obj["type"]
            if kind == "header":
                if header is not None:
                    raise LogSchemaError(f"{where}: duplicate header line")
                _require(obj, _HEADER_KEYS, "header", where)
                if obj["schema_version"] != SCHEMA_VERSION:
                    raise LogSchemaError(
                        f"{where}: field 'schema_version' is "
                        f"{obj['schema_version']!r}, expected {SCHEMA_VERSION}"
                    )
                header = obj
            elif kind == "record":
                if header is None:
                    raise LogSchemaError(f"{where}: record before header")
                _require(obj, _RECORD_KEYS, "record", where)
                records.append(obj)
            elif kind == "summary":
                _require(obj, _SUMMARY_KEYS, "summary", where)
                summary = obj
            else:
                raise LogSchemaError(f"{where}: field 'type' has unknown value {kind!r}")
    if header is None:
        raise LogSchemaError(f"{path.name}: no header line")
    if summary is None:
        raise LogSchemaError(f"{path.name}: no summary line (truncated log?)")
    if not records:
        raise LogSchemaError(f"{path.name}: field 'records' is empty (no record lines)")
    return FlightLog(path=path, header=header, records=records, summary=summary)


def load_logs(paths: list[str | Path]) -> list[FlightLog]:
    """Parse several logs, sorted by path for deterministic figure layout."""
    if not paths:
        raise LogSchemaError("no log files given")
    return [load_log(p) for p in sorted(Path(p) for p in paths)]
