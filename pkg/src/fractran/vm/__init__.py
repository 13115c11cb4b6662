"""Exact FRACTRAN execution."""

from .engine import (
    ENGINES,
    KERNEL_BACKEND,
    ExecutionOutcome,
    Snapshot,
    Status,
    decode_power_of_two,
    run,
    run_accelerated,
    step,
)
from .program import (
    FactoredRegister,
    Instruction,
    Program,
    ProgramParseError,
    ReducibleFractionWarning,
    factorize,
    format_factored,
    parse_program,
    parse_start,
)

__all__ = [
    "ENGINES",
    "KERNEL_BACKEND",
    "ExecutionOutcome",
    "FactoredRegister",
    "Instruction",
    "Program",
    "ProgramParseError",
    "ReducibleFractionWarning",
    "Snapshot",
    "Status",
    "decode_power_of_two",
    "factorize",
    "format_factored",
    "parse_program",
    "parse_start",
    "run",
    "run_accelerated",
    "step",
]
