from __future__ import annotations

import logging
from typing import Iterable
import numpy as np

from npi_workbench.errors import ConfigurationError, RegistrationError, TraceDataError
from npi_workbench.nn.params import ParamStore
from npi_workbench.programs import ProgramSpec

"""Key/embedding program memory and content-based lookup."""

logger = logging.getLogger(__name__)

KEYS = "mem.key"
EMBEDDINGS = "mem.prog"


def program_lookup(key: np.ndarray, keys: np.ndarray) -> int:
    """Row whose stored key has the largest dot product with `key`; ties go to the lowest row."""
    if keys.shape[0] == 0:
        raise ConfigurationError("program memory is empty")
    return int(np.argmax(keys @ key))


class ProgramMemory:
    """Registry of programs aligned with the rows of the `mem.key` and `mem.prog` blocks.

    Rows are append-only: once a program has a row index it keeps it.
    """

    def __init__(self, params: ParamStore, registry: Iterable[ProgramSpec]):
        self.params = params
        self.registry: list[ProgramSpec] = list(registry)
        self._rows = {spec: row for row, spec in enumerate(self.registry)}
        if len(self._rows) != len(self.registry):
            raise RegistrationError("duplicate program in registry")
        for block in (KEYS, EMBEDDINGS):
            if params[block].shape[0] != len(self.registry):
                raise ConfigurationError(
                    f"{block} has {params[block].shape[0]} rows for {len(self.registry)} programs")

    @staticmethod
    def create(params: ParamStore, programs: Iterable[ProgramSpec], key_size: int, embedding_size: int,
               rng: np.random.Generator) -> ProgramMemory:
        registry = list(programs)
        params.init_uniform(KEYS, (len(registry), key_size), rng)
        params.init_uniform(EMBEDDINGS, (len(registry), embedding_size), rng)
        return ProgramMemory(params, registry)

    def __len__(self) -> int:
        return len(self.registry)

    def __contains__(self, spec: object) -> bool:
        return spec in self._rows

    @property
    def keys(self) -> np.ndarray:
        return self.params[KEYS]

    def embedding(self, row: int) -> np.ndarray:
        return self.params[EMBEDDINGS][row]

    def spec(self, row: int) -> ProgramSpec:
        return self.registry[row]

    def index(self, env: str, name: str) -> int:
        try:
            return self._rows[ProgramSpec(env, name)]
        except KeyError:
            raise TraceDataError(f"program {env}/{name} is not registered") from None

    def programs_for(self, env: str) -> list[ProgramSpec]:
        return [spec for spec in self.registry if spec.env == env]

    def lookup(self, key: np.ndarray) -> int:
        return program_lookup(key, self.keys)

    def add_program(self, name: str, env: str, rng: np.random.Generator) -> int:
        """Append freshly initialized key and embedding rows; existing rows are untouched."""
        spec = ProgramSpec(env, name)
        if spec in self._rows:
            raise RegistrationError(f"program {spec.key} already registered")
        for block in (KEYS, EMBEDDINGS):
            width = self.params[block].shape[1]
            scale = 1.0 / np.sqrt(width)
            row = rng.uniform(-scale, scale, size=(1, width))
            self.params[block] = np.concatenate([self.params[block], row])
        self.registry.append(spec)
        self._rows[spec] = len(self.registry) - 1
        logger.info("Registered program %s at row %d", spec.key, self._rows[spec])
        return self._rows[spec]
