from __future__ import annotations

from dataclasses import dataclass, field, replace

from npi_workbench.environments.actions import Args
from npi_workbench.environments import parse_environment
from npi_workbench.environments.base import Environment, Snapshot
from npi_workbench.errors import TraceDataError
from npi_workbench.programs import ACT, ProgramSpec

"""Execution traces and their per-invocation segments."""


@dataclass(frozen=True)
class TraceStep:
    """One supervised step.

    Inputs are (observation, program, args); targets are (next_program,
    next_args, ret). Return steps have `next_program` None and DEFAULT
    next_args.
    """
    depth: int
    program: str
    args: Args
    observation: Snapshot
    next_program: str | None
    next_args: Args
    ret: int

    @property
    def calls_act(self) -> bool:
        return self.next_program == ACT


@dataclass
class Trace:
    """A full execution: task tag, environment, instance text and flat steps in time order."""
    task: str
    env: str
    instance: str
    steps: list[TraceStep] = field(default_factory=list)
    # Set only for subtraces cut out of a longer run.
    start: Environment | None = field(default=None, compare=False)

    def segments(self) -> list[Segment]:
        return segment_steps(self)

    def program_sequence(self) -> list[str]:
        """Names of programs in the order they are entered, ACT calls included."""
        names = [self.steps[0].program] if self.steps else []
        names += [step.next_program for step in self.steps if step.next_program is not None]
        return names


@dataclass(frozen=True)
class Segment:
    """The steps of one program invocation, taken out of its parent trace."""
    env: str
    program: str
    depth: int
    indices: tuple[int, ...]
    steps: tuple[TraceStep, ...]

    @property
    def spec(self) -> ProgramSpec:
        return ProgramSpec(self.env, self.program)

    @property
    def key(self) -> str:
        return self.spec.key


def segment_steps(trace: Trace) -> list[Segment]:
    """Split a trace into invocation segments, ordered by their first step.

    Raises TraceDataError if depths, program names or return flags do not nest.
    """
    open_calls: list[tuple[str, list[int]]] = []
    closed: list[Segment] = []
    pending_call: str | None = None

    for index, step in enumerate(trace.steps):
        if step.depth == len(open_calls):
            expected = pending_call if open_calls else None
            if open_calls and expected != step.program:
                raise TraceDataError(f"step {index}: entered {step.program}, caller asked for {expected}")
            if not open_calls and closed:
                raise TraceDataError(f"step {index}: steps continue after the top-level return")
            open_calls.append((step.program, [index]))
        elif step.depth == len(open_calls) - 1 and pending_call is None:
            program, indices = open_calls[-1]
            if program != step.program:
                raise TraceDataError(f"step {index}: {step.program} at depth {step.depth} inside {program}")
            indices.append(index)
        else:
            raise TraceDataError(f"step {index}: depth {step.depth} does not nest")

        pending_call = step.next_program if step.next_program not in (None, ACT) else None
        if step.ret:
            if step.next_program is not None:
                raise TraceDataError(f"step {index}: return step also calls {step.next_program}")
            program, indices = open_calls.pop()
            closed.append(Segment(trace.env, program, step.depth, tuple(indices),
                                  tuple(trace.steps[i] for i in indices)))
        elif step.next_program is None:
            raise TraceDataError(f"step {index}: step neither calls nor returns")

    if open_calls:
        raise TraceDataError(f"{len(open_calls)} invocation(s) never returned")
    closed.sort(key=lambda segment: segment.indices[0])
    return closed


def subtrace(trace: Trace, segment: Segment) -> Trace:
    """The segment's whole call subtree as a standalone trace.

    The environment is replayed up to the segment's first step and carried as
    the new trace's `start`, since mid-run pad contents are not expressible
    as instance text.
    """
    first, last = segment.indices[0], segment.indices[-1]
    env = trace.start if trace.start is not None else parse_environment(trace.env, trace.instance)
    for step in trace.steps[:first]:
        if step.calls_act:
            env = env.step(step.next_args)
    steps = [replace(step, depth=step.depth - segment.depth) for step in trace.steps[first:last + 1]]
    return Trace(trace.task, trace.env, trace.instance, steps, start=env)
