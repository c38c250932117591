"""Action codes and argument helpers shared by all environments."""

from enum import IntEnum

from npi_workbench import constants

Args = tuple[int, int, int]

DEFAULT: int = constants.DEFAULT_ARG
DEFAULT_ARGS: Args = (DEFAULT, DEFAULT, DEFAULT)
# Value in [0, DEFAULT) that no environment assigns a meaning to.
RESERVED: int = DEFAULT - 1


class Action(IntEnum):
    LEFT = 0
    RIGHT = 1
    WRITE = 2
    SWAP = 3
    UP = 4
    DOWN = 5


def act(pointer: int = DEFAULT, action: Action | int = DEFAULT, value: int = DEFAULT) -> Args:
    """Build ACT arguments: slot 1 pointer, slot 2 action code, slot 3 value."""
    return (int(pointer), int(action), int(value))


def action_of(args: Args) -> Action | None:
    try:
        return Action(args[1])
    except ValueError:
        return None


def format_args(args: Args) -> str:
    return ",".join("-" if value == DEFAULT else str(value) for value in args)


def parse_args(text: str) -> Args:
    parts = text.split(",")
    if len(parts) != constants.ARGUMENT_SLOTS:
        raise ValueError(f"expected {constants.ARGUMENT_SLOTS} argument slots, got {text!r}")
    values = tuple(DEFAULT if part == "-" else int(part) for part in parts)
    for value in values:
        if not 0 <= value < constants.ARGUMENT_VOCAB:
            raise ValueError(f"argument value {value} outside [0, {constants.ARGUMENT_VOCAB})")
    return (values[0], values[1], values[2])
