from __future__ import annotations

from dataclasses import dataclass
import logging

from npi_workbench.environments import parse_environment
from npi_workbench.environments.actions import DEFAULT_ARGS, Args
from npi_workbench.errors import ActionError, InputError, TraceDataError
from npi_workbench.oracles.trace import Trace, segment_steps
from npi_workbench.programs import ACT, known_program

"""Replays a trace against a fresh environment and reports the first inconsistency."""

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Divergence:
    step: int | None
    reason: str

    def __str__(self) -> str:
        where = "trace" if self.step is None else f"step {self.step}"
        return f"{where}: {self.reason}"


@dataclass(frozen=True)
class ValidationResult:
    divergence: Divergence | None = None

    @property
    def ok(self) -> bool:
        return self.divergence is None

    def __bool__(self) -> bool:
        return self.ok


def validate_trace(trace: Trace) -> ValidationResult:
    """Checks nesting, program names, input args, return flags and every observation.

    Observations are recomputed by replaying the ACT calls on an environment
    reset from the trace's instance text, so a corrupted snapshot is reported
    at exactly the step that carries it.
    """
    if not trace.steps:
        return ValidationResult(Divergence(None, "trace has no steps"))
    try:
        env = trace.start if trace.start is not None else parse_environment(trace.env, trace.instance)
    except InputError as e:
        return ValidationResult(Divergence(None, f"cannot reset environment: {e}"))

    for index, step in enumerate(trace.steps):
        for name in (step.program, step.next_program):
            if name is not None and not known_program(trace.env, name):
                return ValidationResult(Divergence(index, f"unknown program {trace.env}/{name}"))
    try:
        segments = segment_steps(trace)
    except TraceDataError as e:
        return ValidationResult(Divergence(None, str(e)))

    # Fresh runs enter the top program with DEFAULT args; subtraces keep their caller's args.
    top_args = trace.steps[0].args if trace.start is not None else DEFAULT_ARGS
    entry_args: dict[int, Args] = {0: top_args}
    for index, step in enumerate(trace.steps):
        if step.next_program is not None and step.next_program != ACT:
            entry_args[index + 1] = step.next_args

    for segment in segments:
        expected = entry_args.get(segment.indices[0], DEFAULT_ARGS)
        for index, step in zip(segment.indices, segment.steps):
            if step.args != expected:
                return ValidationResult(Divergence(index, f"input args {step.args}, expected {expected}"))
            if step.ret and step.next_args != DEFAULT_ARGS:
                return ValidationResult(Divergence(index, "return step carries arguments"))
            if step.next_program is not None:
                expected = step.next_args

    for index, step in enumerate(trace.steps):
        observed = env.observe()
        if tuple(step.observation) != observed:
            return ValidationResult(Divergence(index, f"observation {step.observation}, replay gives {observed}"))
        if step.calls_act:
            try:
                env = env.step(step.next_args)
            except ActionError as e:
                return ValidationResult(Divergence(index, str(e)))

    logger.debug("trace %s/%s validated (%d steps)", trace.task, trace.instance, len(trace.steps))
    return ValidationResult()
