from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import ClassVar
import numpy as np

from npi_workbench.environments.actions import Action, Args, action_of
from npi_workbench.environments.base import Environment, Snapshot, args_features, one_hot
from npi_workbench.errors import ActionError, InputError
from npi_workbench import constants

"""Four-row addition scratch pad: two inputs, carry and output."""

BLANK = 10
CELL_CATEGORIES = 11


class Row(IntEnum):
    IN1 = 1
    IN2 = 2
    CARRY = 3
    OUT = 4


ROW_NAMES = {Row.IN1: "IN1", Row.IN2: "IN2", Row.CARRY: "CARRY", Row.OUT: "OUT"}
WRITABLE_ROWS = (Row.CARRY, Row.OUT)


def _digits(text: str | int) -> str:
    text = str(text).strip()
    if not text or not text.isdigit() or not text.isascii():
        raise InputError(f"not a digit string: {text!r}")
    return text


@dataclass(frozen=True)
class AdditionPad(Environment):
    """Cells are row-major with BLANK for empty; pointer i reads row i."""
    operands: tuple[str, str]
    cells: tuple[tuple[int, ...], ...]
    pointers: tuple[int, int, int, int]

    tag: ClassVar[str] = "add"
    feature_width: ClassVar[int] = 4 * CELL_CATEGORIES + 8 + constants.ARGUMENT_SLOTS * constants.ARGUMENT_VOCAB

    @property
    def width(self) -> int:
        return len(self.cells[0])

    @staticmethod
    def reset(a: str | int, b: str | int) -> AdditionPad:
        """Right-align both operands on a pad one column wider than the longer one.

        All pointers start at the rightmost column; carry and output are blank.
        """
        a, b = _digits(a), _digits(b)
        width = max(len(a), len(b)) + 1
        row1 = (BLANK,) * (width - len(a)) + tuple(int(d) for d in a)
        row2 = (BLANK,) * (width - len(b)) + tuple(int(d) for d in b)
        blank = (BLANK,) * width
        last = width - 1
        return AdditionPad((a, b), (row1, row2, blank, blank), (last, last, last, last))

    @classmethod
    def parse(cls, text: str) -> AdditionPad:
        parts = text.split("+")
        if len(parts) != 2:
            raise InputError(f"addition instance must look like '96+125', got {text!r}")
        return cls.reset(parts[0], parts[1])

    def describe(self) -> str:
        return f"{self.operands[0]}+{self.operands[1]}"

    def step(self, args: Args) -> AdditionPad:
        pointer, value = args[0], args[2]
        action = action_of(args)
        if pointer not in (1, 2, 3, 4):
            raise ActionError(self.tag, args, "pointer must be 1..4")
        row = Row(pointer)
        column = self.pointers[row - 1]

        if action is Action.LEFT or action is Action.RIGHT:
            moved = column - 1 if action is Action.LEFT else column + 1
            pointers = list(self.pointers)
            pointers[row - 1] = min(max(moved, 0), self.width - 1)
            return AdditionPad(self.operands, self.cells, (pointers[0], pointers[1], pointers[2], pointers[3]))

        if action is Action.WRITE:
            if row not in WRITABLE_ROWS:
                raise ActionError(self.tag, args, f"row {ROW_NAMES[row]} is read-only")
            if not 0 <= value <= 9:
                raise ActionError(self.tag, args, "WRITE needs a digit value")
            cells = [list(r) for r in self.cells]
            cells[row - 1][column] = value
            return AdditionPad(self.operands, tuple(tuple(r) for r in cells), self.pointers)

        raise ActionError(self.tag, args, "addition supports LEFT, RIGHT and WRITE")

    def observe(self) -> Snapshot:
        readings = tuple(self.cells[row][self.pointers[row]] for row in range(4))
        flags: list[int] = []
        for column in self.pointers:
            flags += [int(column == 0), int(column == self.width - 1)]
        return readings + tuple(flags)

    @classmethod
    def features(cls, snapshot: Snapshot, args: Args) -> np.ndarray:
        cells = [one_hot(value, CELL_CATEGORIES) for value in snapshot[:4]]
        return np.concatenate(cells + [np.asarray(snapshot[4:], dtype=float), args_features(args)])

    @classmethod
    def describe_action(cls, args: Args) -> str:
        action = action_of(args)
        row = ROW_NAMES[Row(args[0])] if args[0] in (1, 2, 3, 4) else "?"
        if action is Action.WRITE:
            return f"WRITE {row} {args[2]}"
        if action in (Action.LEFT, Action.RIGHT):
            return f"PTR {row} {action.name}"
        return f"ACT {args}"

    def row_text(self, row: Row) -> str:
        return "".join("_" if cell == BLANK else str(cell) for cell in self.cells[row - 1])

    def output(self) -> str:
        """Output row with leading blanks removed ('' if nothing was written)."""
        return self.row_text(Row.OUT).lstrip("_")

    def expected(self) -> str:
        return str(int(self.operands[0]) + int(self.operands[1]))

    def is_solved(self) -> bool:
        written = self.output()
        return written.isdigit() and int(written) == int(self.expected())


def add_env_reset(a: str | int, b: str | int) -> AdditionPad:
    return AdditionPad.reset(a, b)


def add_env_step(pad: AdditionPad, args: Args) -> AdditionPad:
    return pad.step(args)

