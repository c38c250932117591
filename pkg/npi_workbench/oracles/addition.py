from __future__ import annotations

from npi_workbench.environments.actions import Action, act
from npi_workbench.environments.addition import BLANK, AdditionPad, Row
from npi_workbench.oracles.recorder import Invocation, Recorder
from npi_workbench.oracles.trace import Trace

"""Grade-school addition, one column per ADD1, right to left."""

Add = Invocation[AdditionPad]


def _cell(pad: AdditionPad, row: Row) -> int:
    return pad.cells[row - 1][pad.pointers[row - 1]]


def _value(pad: AdditionPad, row: Row) -> int:
    cell = _cell(pad, row)
    return 0 if cell == BLANK else cell


def add_program(inv: Add) -> None:
    while True:
        pad = inv.env
        pending = any(_cell(pad, row) != BLANK for row in (Row.IN1, Row.IN2, Row.CARRY))
        if _cell(pad, Row.OUT) == BLANK and pending:
            inv.call("ADD1", add1_program)
        elif _cell(pad, Row.OUT) != BLANK and pad.pointers[Row.IN1 - 1] > 0:
            inv.call("LSHIFT", lshift_program)
        else:
            return


def add1_program(inv: Add) -> None:
    pad = inv.env
    total = _value(pad, Row.IN1) + _value(pad, Row.IN2) + _value(pad, Row.CARRY)
    inv.act(act(Row.OUT, Action.WRITE, total % 10))
    if total >= 10:
        inv.call("CARRY", carry_program)


def carry_program(inv: Add) -> None:
    inv.act(act(Row.CARRY, Action.LEFT))
    inv.act(act(Row.CARRY, Action.WRITE, 1))
    inv.act(act(Row.CARRY, Action.RIGHT))


def lshift_program(inv: Add) -> None:
    for row in (Row.IN1, Row.IN2, Row.CARRY, Row.OUT):
        inv.act(act(row, Action.LEFT))


def oracle_add(a: str | int, b: str | int) -> Trace:
    return Recorder("add", AdditionPad.reset(a, b)).run("ADD", add_program)
