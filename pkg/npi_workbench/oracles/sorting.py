from __future__ import annotations

from npi_workbench.environments.actions import DEFAULT, Action, act
from npi_workbench.environments.sorting import COUNTER, SWAP_LEFT, SWAP_RIGHT, SortPad
from npi_workbench.oracles.recorder import Invocation, Recorder
from npi_workbench.oracles.trace import Trace

"""Bubble sort driven by a counter pointer, and MAX built on top of it."""

Sort = Invocation[SortPad]


def bubblesort_program(inv: Sort) -> None:
    # One BUBBLE/RESET pair per array cell; the last RESET finds the counter already at the end.
    while True:
        inv.call("BUBBLE", bubble_program)
        done = inv.env.at_end(COUNTER)
        inv.call("RESET", reset_program)
        if done:
            return


def bubble_program(inv: Sort) -> None:
    if inv.env.at_end(SWAP_RIGHT):
        return
    inv.act(act(SWAP_RIGHT, Action.RIGHT))
    while not inv.env.at_end(SWAP_LEFT):
        inv.call("BSTEP", bstep_program)


def bstep_program(inv: Sort) -> None:
    inv.call("COMPSWAP", compswap_program)
    inv.call("RSHIFT", rshift_program)


def compswap_program(inv: Sort) -> None:
    pad = inv.env
    if pad.value_at(SWAP_LEFT) > pad.value_at(SWAP_RIGHT):
        inv.act(act(DEFAULT, Action.SWAP))


def _shift(inv: Sort, action: Action) -> None:
    for pointer in (SWAP_LEFT, SWAP_RIGHT):
        pad = inv.env
        at_edge = pad.at_start(pointer) if action is Action.LEFT else pad.at_end(pointer)
        if not at_edge:
            inv.act(act(pointer, action))


def lshift_program(inv: Sort) -> None:
    _shift(inv, Action.LEFT)


def rshift_program(inv: Sort) -> None:
    _shift(inv, Action.RIGHT)


def reset_program(inv: Sort) -> None:
    while not inv.env.at_start(SWAP_LEFT):
        inv.call("LSHIFT", lshift_program)
    if not inv.env.at_end(COUNTER):
        inv.act(act(COUNTER, Action.RIGHT))


def max_program(inv: Sort) -> None:
    inv.call("BUBBLESORT", bubblesort_program)
    inv.call("RJMP", rjmp_program)


def rjmp_program(inv: Sort) -> None:
    while not inv.env.at_end(SWAP_LEFT):
        inv.call("RSHIFT", rshift_program)


def oracle_bubblesort(array: tuple[int, ...] | list[int]) -> Trace:
    return Recorder("sort", SortPad.reset(array)).run("BUBBLESORT", bubblesort_program)


def oracle_max(array: tuple[int, ...] | list[int]) -> Trace:
    return Recorder("max", SortPad.reset(array)).run("MAX", max_program)
