"""Compilation pipeline: op programs to kernel graphs to scheduled timelines."""
from pathlib import Path

from .lower import PASSES, KernelGraph, Node, Shape, lower_to_kernels, program_hints
from .program import (
    SIGNATURES,
    OpProgram,
    ProgramError,
    Statement,
    declared_histogram,
    hint_runs,
    interpret,
    load_program,
    parse_program,
    reorder_for_hint_reuse,
)
from .schedule import (
    ConfigurationError,
    Interval,
    Timeline,
    check_timeline,
    function_units,
    map_and_schedule,
)

TRACES = Path(__file__).with_name("traces")


def trace_path(name: str) -> Path:
    """Path of a bundled benchmark trace (``lr`` or ``lola``)."""
    p = TRACES / f"{name}.fhe"
    if not p.exists():
        raise FileNotFoundError(f"no bundled trace {name!r}")
    return p


__all__ = [
    "PASSES",
    "SIGNATURES",
    "TRACES",
    "ConfigurationError",
    "Interval",
    "KernelGraph",
    "Node",
    "OpProgram",
    "ProgramError",
    "Shape",
    "Statement",
    "Timeline",
    "check_timeline",
    "declared_histogram",
    "function_units",
    "hint_runs",
    "interpret",
    "load_program",
    "lower_to_kernels",
    "map_and_schedule",
    "parse_program",
    "program_hints",
    "reorder_for_hint_reuse",
    "trace_path",
]
