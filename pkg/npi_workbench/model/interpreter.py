from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
import logging

from npi_workbench import constants
from npi_workbench.environments.actions import DEFAULT_ARGS, Args
from npi_workbench.environments.base import Environment
from npi_workbench.errors import ActionError, ConfigurationError
from npi_workbench.model.core import NpiModel
from npi_workbench.nn.lstm import LstmState
from npi_workbench.oracles.trace import Trace, TraceStep

"""Greedy inference: the recursive program interpreter with an explicit call stack."""

logger = logging.getLogger(__name__)


class HaltReason(str, Enum):
    NORMAL = "normal"
    STEP_BUDGET = "step-budget"
    DEPTH_BUDGET = "depth-budget"
    INVALID_ACTION = "invalid-action"
    INVALID_CALL = "invalid-call"


@dataclass
class Frame:
    """A running invocation: its program row, private LSTM state and current input args."""
    program_row: int
    state: LstmState
    args: Args


@dataclass
class ExecutionResult:
    env: Environment
    trace: Trace
    halt: HaltReason
    steps: int

    @property
    def completed(self) -> bool:
        return self.halt is HaltReason.NORMAL


def run(model: NpiModel, program: str | int, env: Environment, args: Args = DEFAULT_ARGS,
        threshold: float = constants.END_THRESHOLD, max_steps: int = constants.MAX_STEPS,
        max_depth: int = constants.MAX_DEPTH, task: str | None = None) -> ExecutionResult:
    """Run `program` on `env` until the top-level invocation returns or a budget is hit.

    Each step either returns (end probability >= threshold) or calls the
    looked-up program with the predicted arguments. ACT applies the action to
    the environment; any other program is pushed with a fresh zero LSTM state.
    """
    memory = model.memory
    row = program if isinstance(program, int) else memory.index(env.tag, program)
    top = memory.spec(row)
    if top.env != env.tag:
        raise ConfigurationError(f"program {top.key} cannot run on a {env.tag} environment")
    if top.is_act:
        raise ConfigurationError("ACT is a primitive and cannot be run as a program")

    trace = Trace(task or env.tag, env.tag, env.describe())
    stack = [Frame(row, model.zero_state(), args)]
    steps = 0

    def halt(reason: HaltReason) -> ExecutionResult:
        if reason is not HaltReason.NORMAL:
            logger.debug("Run of %s on %s halted: %s after %d steps", top.key, trace.instance, reason.value, steps)
        return ExecutionResult(env, trace, reason, steps)

    while stack:
        if steps >= max_steps:
            return halt(HaltReason.STEP_BUDGET)
        frame = stack[-1]
        spec = memory.spec(frame.program_row)
        observation = env.observe()
        output, frame.state, _ = model.step(env.tag, env.features(observation, frame.args),
                                            frame.program_row, frame.state)
        steps += 1
        depth = len(stack) - 1

        if output.r >= threshold:
            trace.steps.append(TraceStep(depth, spec.name, frame.args, observation, None, DEFAULT_ARGS, 1))
            stack.pop()
            continue

        next_row = memory.lookup(output.key)
        next_spec = memory.spec(next_row)
        next_args = output.args()
        trace.steps.append(TraceStep(depth, spec.name, frame.args, observation, next_spec.name, next_args, 0))
        frame.args = next_args

        if next_spec.env != env.tag:
            return halt(HaltReason.INVALID_CALL)
        if next_spec.is_act:
            try:
                env = env.step(next_args)
            except ActionError as e:
                logger.debug("%s", e)
                return halt(HaltReason.INVALID_ACTION)
        elif len(stack) >= max_depth:
            return halt(HaltReason.DEPTH_BUDGET)
        else:
            stack.append(Frame(next_row, model.zero_state(), next_args))

    return halt(HaltReason.NORMAL)
