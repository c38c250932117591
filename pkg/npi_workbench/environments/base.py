from __future__ import annotations

from abc import ABC, abstractmethod
from typing import ClassVar
import numpy as np

from npi_workbench import constants
from npi_workbench.environments.actions import Args

"""Interface every environment implements."""

Snapshot = tuple[int, ...]


def one_hot(index: int, size: int) -> np.ndarray:
    vector = np.zeros(size)
    vector[index] = 1.0
    return vector


def args_features(args: Args) -> np.ndarray:
    return np.concatenate([one_hot(value, constants.ARGUMENT_VOCAB) for value in args])


class Environment(ABC):
    """An immutable world state with its own dynamics and observation layout.

    `step` never mutates; it returns the successor state. Observations are a
    compact snapshot of small integers (what the pointers see plus edge bits),
    which `features` expands into the fixed-width vector fed to the encoder.
    """

    tag: ClassVar[str]
    feature_width: ClassVar[int]

    @abstractmethod
    def step(self, args: Args) -> Environment:
        """Apply one ACT. Raises ActionError on arguments this world rejects."""

    @abstractmethod
    def observe(self) -> Snapshot:
        """Compact reading of the cells under the pointers plus edge flags."""

    @classmethod
    @abstractmethod
    def features(cls, snapshot: Snapshot, args: Args) -> np.ndarray:
        """Encoder input: one-hot readings, edge bits and the argument triple."""

    @classmethod
    @abstractmethod
    def describe_action(cls, args: Args) -> str:
        """Human-readable rendering of ACT arguments."""

    @abstractmethod
    def describe(self) -> str:
        """Instance text this state was reset from, parseable by `parse`."""

    @classmethod
    @abstractmethod
    def parse(cls, text: str) -> Environment:
        """Reset a fresh state from instance text."""

    def encode_input(self, args: Args) -> np.ndarray:
        return self.features(self.observe(), args)
