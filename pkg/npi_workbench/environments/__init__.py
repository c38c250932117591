"""Scratch-pad and pose worlds the interpreter acts in."""

from npi_workbench.environments.addition import AdditionPad
from npi_workbench.environments.base import Environment
from npi_workbench.environments.pose import PoseState
from npi_workbench.environments.sorting import SortPad
from npi_workbench.errors import ConfigurationError

ENVIRONMENTS: dict[str, type[Environment]] = {
    AdditionPad.tag: AdditionPad,
    SortPad.tag: SortPad,
    PoseState.tag: PoseState,
}


def environment_class(tag: str) -> type[Environment]:
    try:
        return ENVIRONMENTS[tag]
    except KeyError:
        raise ConfigurationError(f"unknown environment {tag!r}") from None


def parse_environment(tag: str, text: str) -> Environment:
    return environment_class(tag).parse(text)


__all__ = ["AdditionPad", "Environment", "PoseState", "SortPad", "ENVIRONMENTS",
           "environment_class", "parse_environment"]
