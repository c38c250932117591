"""Symbolic reference programs that generate and check execution traces."""

from npi_workbench.oracles.addition import oracle_add
from npi_workbench.oracles.pose import oracle_goto
from npi_workbench.oracles.sorting import oracle_bubblesort, oracle_max
from npi_workbench.oracles.tasks import TASKS, Task, get_task
from npi_workbench.oracles.trace import Segment, Trace, TraceStep, segment_steps, subtrace
from npi_workbench.oracles.traceio import SeqExample, read_trace_file, read_traces, write_traces
from npi_workbench.oracles.validate import ValidationResult, validate_trace

__all__ = [
    "oracle_add", "oracle_bubblesort", "oracle_goto", "oracle_max",
    "TASKS", "Task", "get_task",
    "Segment", "Trace", "TraceStep", "segment_steps", "subtrace",
    "SeqExample", "read_trace_file", "read_traces", "write_traces",
    "ValidationResult", "validate_trace",
]
