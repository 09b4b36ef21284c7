"""Figure generation from dwa3d flight logs.

This package consumes flight logs strictly through their on-disk line-JSON
schema (see the main package's docs/flight_log_format.md); it never imports
the simulator. All figures are rendered deterministically: identical input
logs produce byte-identical image files.
"""

from .logdata import FlightLog, LogSchemaError, load_log, load_logs
from .figures import FigureRequest, KINDS, render

__all__ = [
    "FlightLog",
    "LogSchemaError",
    "load_log",
    "load_logs",
    "FigureRequest",
    "KINDS",
    "render",
]
