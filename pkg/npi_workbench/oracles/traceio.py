from __future__ import annotations

from dataclasses import dataclass, field
import logging
from pathlib import Path
from typing import Iterable

from npi_workbench import constants
from npi_workbench.environments.actions import format_args, parse_args
from npi_workbench.errors import TraceFormatError
from npi_workbench.oracles.trace import Trace, TraceStep

"""Line-oriented trace files.

Every line is a record kind followed by tab-separated key=value fields:

    format  version=1
    trace   task=sort  env=sort  instance=9,2,5
    step    depth=0  prog=BUBBLESORT  args=-,-,-  ret=0  obs=9,9,1,0,1,0,1,0  next=BUBBLE  next_args=-,-,-
    seq     task=sort  input=925  target=259

Step lines belong to the closest preceding trace line. "-" stands for the
DEFAULT argument value and for "no next program" on return steps.
"""

logger = logging.getLogger(__name__)

_NONE = "-"
_FIELDS = {
    "format": ("version",),
    "trace": ("task", "env", "instance"),
    "step": ("depth", "prog", "args", "ret", "obs", "next", "next_args"),
    "seq": ("task", "input", "target"),
}


@dataclass(frozen=True)
class SeqExample:
    """Flat input/output string pair for the sequence-to-sequence baselines."""
    task: str
    source: str
    target: str


@dataclass
class TraceFile:
    traces: list[Trace] = field(default_factory=list)
    sequences: list[SeqExample] = field(default_factory=list)


def _line(kind: str, **values: object) -> str:
    return "\t".join([kind] + [f"{key}={values[key]}" for key in _FIELDS[kind]])


def _step_line(step: TraceStep) -> str:
    return _line(
        "step",
        depth=step.depth,
        prog=step.program,
        args=format_args(step.args),
        ret=step.ret,
        obs=",".join(str(v) for v in step.observation),
        next=_NONE if step.next_program is None else step.next_program,
        next_args=format_args(step.next_args),
    )


def write_traces(traces: Iterable[Trace], path: str | Path,
                 sequences: Iterable[SeqExample] = ()) -> int:
    """Writes traces (and optional seq examples); returns the number of traces written."""
    count = 0
    with open(path, "w", encoding="utf-8") as f:
        f.write(_line("format", version=constants.TRACE_FORMAT_VERSION) + "\n")
        for trace in traces:
            f.write(_line("trace", task=trace.task, env=trace.env, instance=trace.instance) + "\n")
            for step in trace.steps:
                f.write(_step_line(step) + "\n")
            count += 1
        for example in sequences:
            f.write(_line("seq", task=example.task, input=example.source, target=example.target) + "\n")
    logger.info("wrote %d traces to %s", count, path)
    return count


def _parse_fields(line_number: int, line: str) -> tuple[str, dict[str, str]]:
    kind, *parts = line.split("\t")
    if kind not in _FIELDS:
        raise TraceFormatError(line_number, f"unknown record kind {kind!r}")
    values: dict[str, str] = {}
    for part in parts:
        key, sep, value = part.partition("=")
        if not sep:
            raise TraceFormatError(line_number, f"field {part!r} is not key=value")
        values[key] = value
    missing = [key for key in _FIELDS[kind] if key not in values]
    if missing:
        raise TraceFormatError(line_number, f"{kind} record is missing {', '.join(missing)}")
    return kind, values


def _parse_step(line_number: int, values: dict[str, str]) -> TraceStep:
    try:
        ret = int(values["ret"])
        if ret not in (0, 1):
            raise ValueError(f"return flag must be 0 or 1, got {ret}")
        return TraceStep(
            depth=int(values["depth"]),
            program=values["prog"],
            args=parse_args(values["args"]),
            observation=tuple(int(v) for v in values["obs"].split(",")) if values["obs"] else (),
            next_program=None if values["next"] == _NONE else values["next"],
            next_args=parse_args(values["next_args"]),
            ret=ret,
        )
    except ValueError as e:
        raise TraceFormatError(line_number, str(e)) from None


def read_trace_file(path: str | Path) -> TraceFile:
    result = TraceFile()
    current: Trace | None = None
    header_line = 0

    def finish() -> None:
        if current is not None and not current.steps:
            raise TraceFormatError(header_line, "trace record has no steps")

    with open(path, encoding="utf-8") as f:
        for line_number, raw in enumerate(f, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            kind, values = _parse_fields(line_number, line)
            if kind == "format":
                if values["version"] != str(constants.TRACE_FORMAT_VERSION):
                    raise TraceFormatError(line_number, f"unsupported trace format version {values['version']}")
            elif kind == "trace":
                finish()
                current = Trace(values["task"], values["env"], values["instance"])
                header_line = line_number
                result.traces.append(current)
            elif kind == "step":
                if current is None:
                    raise TraceFormatError(line_number, "step record before any trace record")
                current.steps.append(_parse_step(line_number, values))
            else:
                result.sequences.append(SeqExample(values["task"], values["input"], values["target"]))
    finish()
    logger.debug("read %d traces and %d seq examples from %s", len(result.traces), len(result.sequences), path)
    return result


def read_traces(path: str | Path) -> list[Trace]:
    return read_trace_file(path).traces
