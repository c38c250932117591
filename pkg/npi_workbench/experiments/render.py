from __future__ import annotations

from npi_workbench.environments import environment_class
from npi_workbench.environments.actions import DEFAULT_ARGS, format_args
from npi_workbench.model.interpreter import ExecutionResult
from npi_workbench.oracles.trace import Trace
from npi_workbench.programs import ACT

INDENT = "  "


def render_trace(trace: Trace) -> list[str]:
    """Nested call tree: one line per call, ACT calls spelled out as actions."""
    if not trace.steps:
        return []
    env = environment_class(trace.env)
    first = trace.steps[0]
    lines = [_call(first.program, first.args)]
    for step in trace.steps:
        if step.next_program is None:
            continue
        indent = INDENT * (step.depth + 1)
        if step.next_program == ACT:
            lines.append(indent + env.describe_action(step.next_args))
        else:
            lines.append(indent + _call(step.next_program, step.next_args))
    return lines


def _call(program: str, args: tuple[int, int, int]) -> str:
    return program if args == DEFAULT_ARGS else f"{program}({format_args(args)})"


def render_run(result: ExecutionResult) -> str:
    lines = [f"{result.trace.env}: {result.trace.instance}"]
    lines += render_trace(result.trace)
    if result.completed:
        lines.append(f"returned after {result.steps} steps: {result.env.describe()}")
    else:
        lines.append(f"halted ({result.halt.value}) after {result.steps} steps: {result.env.describe()}")
    return "\n".join(lines)
