from __future__ import annotations

from typing import Callable, Generic, TypeVar

from npi_workbench.environments.actions import DEFAULT_ARGS, Args
from npi_workbench.environments.base import Environment
from npi_workbench.oracles.trace import Trace, TraceStep
from npi_workbench.programs import ACT

"""Runs hand-written programs against an environment and records each decision as a trace step."""

E = TypeVar("E", bound=Environment)
Body = Callable[["Invocation[E]"], None]


class Recorder(Generic[E]):
    """Owns the evolving environment and the flat list of recorded steps."""

    def __init__(self, task: str, env: E):
        self.env: E = env
        self.trace = Trace(task, env.tag, env.describe())

    def run(self, program: str, body: Body, args: Args = DEFAULT_ARGS) -> Trace:
        Invocation(self, program, 0, args).execute(body)
        return self.trace


class Invocation(Generic[E]):
    """One running program. `call` and the implicit return append steps.

    The input args of a step are the invocation's own args on its first step
    and the args of its most recent call afterwards.
    """

    def __init__(self, recorder: Recorder[E], program: str, depth: int, args: Args):
        self.recorder = recorder
        self.program = program
        self.depth = depth
        self.args = args

    @property
    def env(self) -> E:
        return self.recorder.env

    def _record(self, next_program: str | None, next_args: Args, ret: int) -> None:
        self.recorder.trace.steps.append(TraceStep(
            depth=self.depth,
            program=self.program,
            args=self.args,
            observation=self.env.observe(),
            next_program=next_program,
            next_args=next_args,
            ret=ret,
        ))

    def act(self, args: Args) -> None:
        self._record(ACT, args, 0)
        self.recorder.env = self.env.step(args)  # type: ignore[assignment]
        self.args = args

    def call(self, program: str, body: Body, args: Args = DEFAULT_ARGS) -> None:
        self._record(program, args, 0)
        Invocation(self.recorder, program, self.depth + 1, args).execute(body)
        self.args = args

    def execute(self, body: Body) -> None:
        body(self)
        self._record(None, DEFAULT_ARGS, 1)
