from __future__ import annotations

from dataclasses import dataclass, field
import logging
from typing import Mapping, Sequence
import numpy as np

from npi_workbench import constants
from npi_workbench.environments import environment_class
from npi_workbench.model.core import NpiModel
from npi_workbench.nn.losses import softmax
from npi_workbench.oracles.trace import Segment

"""Adaptive curriculum: sample programs in proportion to softmax(error / temperature)."""

logger = logging.getLogger(__name__)


@dataclass
class CurriculumState:
    """Per-program prediction errors and the sampling distribution derived from them.

    The distribution only changes when `update` is called.
    """
    programs: list[str]
    temperature: float = constants.CURRICULUM_TEMPERATURE
    errors: np.ndarray = field(default=None)  # type: ignore[assignment]
    distribution: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        if self.errors is None:
            self.errors = np.ones(len(self.programs))
        self.errors = np.asarray(self.errors, dtype=float)
        self.distribution = curriculum_distribution(self.errors, self.temperature)

    def update(self, errors: Mapping[str, float]) -> None:
        self.errors = np.array([errors.get(program, error) for program, error in zip(self.programs, self.errors)])
        self.distribution = curriculum_distribution(self.errors, self.temperature)

    def error_of(self, program: str) -> float:
        return float(self.errors[self.programs.index(program)])


def curriculum_distribution(errors: np.ndarray, temperature: float) -> np.ndarray:
    """softmax(errors / temperature); a non-positive temperature puts all mass on the largest errors."""
    if temperature <= 0.0:
        top = (errors == errors.max()).astype(float)
        return top / top.sum()
    return softmax(errors / temperature)


def curriculum_sample(state: CurriculumState, rng: np.random.Generator) -> str:
    return state.programs[int(rng.choice(len(state.programs), p=state.distribution))]


def step_errors(model: NpiModel, segment: Segment,
                threshold: float = constants.END_THRESHOLD) -> list[tuple[bool, bool, bool]]:
    """Teacher-forced (program, args, end) argmax mistakes for each step of a segment."""
    memory = model.memory
    features_of = environment_class(segment.env).features
    state = model.zero_state()
    mistakes = []
    for step in segment.steps:
        row = memory.index(segment.env, step.program)
        output, state, _ = model.step(segment.env, features_of(step.observation, step.args), row, state)
        program_wrong = (step.next_program is not None
                         and memory.lookup(output.key) != memory.index(segment.env, step.next_program))
        args_wrong = output.args() != tuple(step.next_args)
        end_wrong = (output.r >= threshold) != bool(step.ret)
        mistakes.append((program_wrong, args_wrong, end_wrong))
    return mistakes


def estimate_errors(model: NpiModel, segments: Mapping[str, Sequence[Segment]],
                    threshold: float = constants.END_THRESHOLD) -> dict[str, float]:
    """Per-program fraction of steps with any mistake, over that program's held-out segments."""
    errors: dict[str, float] = {}
    for program, program_segments in segments.items():
        wrong = total = 0
        for segment in program_segments:
            for mistake in step_errors(model, segment, threshold):
                wrong += any(mistake)
                total += 1
        if total:
            errors[program] = wrong / total
    return errors
