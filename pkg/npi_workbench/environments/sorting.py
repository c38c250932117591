from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar
import numpy as np

from npi_workbench import constants
from npi_workbench.environments.actions import Action, Args, action_of
from npi_workbench.environments.base import Environment, Snapshot, args_features, one_hot
from npi_workbench.errors import ActionError, InputError

"""One-row sorting pad with two swap pointers and a counter pointer."""

SWAP_LEFT = 1
SWAP_RIGHT = 2
COUNTER = 3
POINTERS = (SWAP_LEFT, SWAP_RIGHT, COUNTER)


def parse_array(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.replace(" ", "").split(","))
    except ValueError:
        raise InputError(f"array instance must look like '9,2,5', got {text!r}") from None
    return values


@dataclass(frozen=True)
class SortPad(Environment):
    values: tuple[int, ...]
    pointers: tuple[int, int, int]

    tag: ClassVar[str] = "sort"
    feature_width: ClassVar[int] = 2 * 10 + 6 + constants.ARGUMENT_SLOTS * constants.ARGUMENT_VOCAB

    @property
    def width(self) -> int:
        return len(self.values)

    @staticmethod
    def reset(array: tuple[int, ...] | list[int]) -> SortPad:
        """Swap pointers and the counter all start at column 0."""
        values = tuple(int(v) for v in array)
        if not values:
            raise InputError("cannot sort an empty array")
        if any(not 0 <= v <= 9 for v in values):
            raise InputError(f"array entries must be digits 0..9: {values}")
        return SortPad(values, (0, 0, 0))

    @classmethod
    def parse(cls, text: str) -> SortPad:
        return cls.reset(parse_array(text))

    def describe(self) -> str:
        return ",".join(str(v) for v in self.values)

    def step(self, args: Args) -> SortPad:
        action = action_of(args)
        if action is Action.SWAP:
            left, right = self.pointers[0], self.pointers[1]
            values = list(self.values)
            values[left], values[right] = values[right], values[left]
            return SortPad(tuple(values), self.pointers)

        if action is Action.LEFT or action is Action.RIGHT:
            pointer = args[0]
            if pointer not in POINTERS:
                raise ActionError(self.tag, args, "pointer must be 1..3")
            if pointer == COUNTER and action is Action.LEFT:
                raise ActionError(self.tag, args, "the counter only advances right")
            column = self.pointers[pointer - 1] + (1 if action is Action.RIGHT else -1)
            pointers = list(self.pointers)
            pointers[pointer - 1] = min(max(column, 0), self.width - 1)
            return SortPad(self.values, (pointers[0], pointers[1], pointers[2]))

        raise ActionError(self.tag, args, "sorting supports LEFT, RIGHT and SWAP")

    def observe(self) -> Snapshot:
        flags: list[int] = []
        for column in self.pointers:
            flags += [int(column == 0), int(column == self.width - 1)]
        return (self.values[self.pointers[0]], self.values[self.pointers[1]]) + tuple(flags)

    @classmethod
    def features(cls, snapshot: Snapshot, args: Args) -> np.ndarray:
        return np.concatenate([
            one_hot(snapshot[0], 10),
            one_hot(snapshot[1], 10),
            np.asarray(snapshot[2:], dtype=float),
            args_features(args),
        ])

    @classmethod
    def describe_action(cls, args: Args) -> str:
        action = action_of(args)
        if action is Action.SWAP:
            return "SWAP 1 2"
        if action in (Action.LEFT, Action.RIGHT):
            return f"PTR {args[0]} {action.name}"
        return f"ACT {args}"

    def is_sorted(self) -> bool:
        return all(a <= b for a, b in zip(self.values, self.values[1:]))

    def at_start(self, pointer: int) -> bool:
        return self.pointers[pointer - 1] == 0

    def at_end(self, pointer: int) -> bool:
        return self.pointers[pointer - 1] == self.width - 1

    def value_at(self, pointer: int) -> int:
        return self.values[self.pointers[pointer - 1]]


def sort_env_reset(array: tuple[int, ...] | list[int]) -> SortPad:
    return SortPad.reset(array)


def sort_env_step(pad: SortPad, args: Args) -> SortPad:
    return pad.step(args)
