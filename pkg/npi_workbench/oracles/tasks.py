from __future__ import annotations

from dataclasses import dataclass
from typing import Callable
import numpy as np

from npi_workbench import constants
from npi_workbench.environments import parse_environment
from npi_workbench.environments.addition import AdditionPad
from npi_workbench.environments.base import Environment
from npi_workbench.environments.pose import GRID, PoseState, pose_distance
from npi_workbench.environments.sorting import SWAP_LEFT, SortPad, parse_array
from npi_workbench.errors import ConfigurationError, InputError
from npi_workbench.oracles.addition import oracle_add
from npi_workbench.oracles.pose import oracle_goto
from npi_workbench.oracles.sorting import oracle_bubblesort, oracle_max
from npi_workbench.oracles.trace import Trace

"""Tasks tie an environment, a top-level program, an instance sampler and a success test together."""

CANONICAL_TARGET = (constants.CANONICAL_AZIMUTH, constants.CANONICAL_ELEVATION)
# Training starts cover azimuth -75..75 degrees.
START_AZIMUTHS = tuple(range(GRID - 5, GRID)) + tuple(range(0, 6))
START_ELEVATIONS = tuple(range(constants.ELEVATION_MIN, constants.ELEVATION_MAX + 1))


@dataclass(frozen=True)
class Task:
    name: str
    env: str
    program: str
    # (size, rng) -> instance text
    sample: Callable[[int, np.random.Generator], str]
    trace: Callable[[str], Trace]
    solved: Callable[[Environment], bool]
    size_label: str
    # instance text -> size in the units of `sample`
    measure: Callable[[str], int]

    def make_env(self, instance: str) -> Environment:
        return parse_environment(self.env, instance)

    def sample_instances(self, size: int, count: int, rng: np.random.Generator) -> list[str]:
        return [self.sample(size, rng) for _ in range(count)]


def _digits(length: int, rng: np.random.Generator) -> str:
    if length < 1:
        raise InputError(f"operand length must be >= 1, got {length}")
    if length == 1:
        return str(rng.integers(0, 10))
    return str(rng.integers(1, 10)) + "".join(str(d) for d in rng.integers(0, 10, size=length - 1))


def sample_addition(size: int, rng: np.random.Generator) -> str:
    return f"{_digits(size, rng)}+{_digits(size, rng)}"


def sample_array(size: int, rng: np.random.Generator) -> str:
    if size < 1:
        raise InputError(f"array length must be >= 1, got {size}")
    return ",".join(str(v) for v in rng.integers(0, 10, size=size))


def pose_starts(distance: int | None = None) -> list[tuple[int, int]]:
    """Training start poses, optionally only those `distance` moves from the canonical target."""
    return [(az, el) for az in START_AZIMUTHS for el in START_ELEVATIONS
            if distance is None or pose_distance(az, el, *CANONICAL_TARGET) == distance]


def sample_pose(size: int, rng: np.random.Generator) -> str:
    """`size` is the path length to the canonical target; negative means any start."""
    starts = pose_starts(None if size < 0 else size)
    if not starts:
        raise InputError(f"no training start pose lies {size} moves from the target")
    az, el = starts[rng.integers(len(starts))]
    return f"{az},{el}>{CANONICAL_TARGET[0]},{CANONICAL_TARGET[1]}"


def _add_trace(instance: str) -> Trace:
    pad = AdditionPad.parse(instance)
    return oracle_add(*pad.operands)


def _pose_trace(instance: str) -> Trace:
    state = PoseState.parse(instance)
    return oracle_goto((state.azimuth, state.elevation), (state.target_azimuth, state.target_elevation))


def _operand_digits(instance: str) -> int:
    return max(len(operand) for operand in AdditionPad.parse(instance).operands)


def _array_length(instance: str) -> int:
    return len(parse_array(instance))


def _pose_moves(instance: str) -> int:
    return PoseState.parse(instance).distance()


def _sorted(env: Environment) -> bool:
    return isinstance(env, SortPad) and env.is_sorted()


def _max_found(env: Environment) -> bool:
    return (isinstance(env, SortPad) and env.at_end(SWAP_LEFT)
            and env.value_at(SWAP_LEFT) == max(env.values))


def _solved(env: Environment) -> bool:
    return isinstance(env, (AdditionPad, PoseState)) and env.is_solved()


TASKS: dict[str, Task] = {
    "add": Task("add", "add", "ADD", sample_addition, _add_trace, _solved, "operand digits",
                _operand_digits),
    "sort": Task("sort", "sort", "BUBBLESORT", sample_array,
                 lambda instance: oracle_bubblesort(parse_array(instance)), _sorted, "array length", _array_length),
    "pose": Task("pose", "pose", "GOTO", sample_pose, _pose_trace, _solved, "moves to target", _pose_moves),
    "max": Task("max", "sort", "MAX", sample_array,
                lambda instance: oracle_max(parse_array(instance)), _max_found, "array length", _array_length),
}


def get_task(name: str) -> Task:
    try:
        return TASKS[name]
    except KeyError:
        raise ConfigurationError(f"unknown task {name!r}; choose from {', '.join(TASKS)}") from None
