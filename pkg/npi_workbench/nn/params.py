from __future__ import annotations

import hashlib
from collections.abc import Iterator, Mapping
import numpy as np

from npi_workbench.errors import ConfigurationError

"""Named parameter blocks."""

DTYPE = np.float64


class ParamStore:
    """Ordered collection of named float64 blocks.

    Weights, their gradients and optimizer moments all use this container, so
    they line up block by block. Insertion order is kept and is the order used
    for serialization.
    """

    def __init__(self, blocks: Mapping[str, np.ndarray] | None = None):
        self._blocks: dict[str, np.ndarray] = {}
        for name, value in (blocks or {}).items():
            self[name] = value

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self._blocks[name]
        except KeyError:
            raise ConfigurationError(f"no parameter block named {name}") from None

    def __setitem__(self, name: str, value: np.ndarray) -> None:
        self._blocks[name] = np.ascontiguousarray(value, dtype=DTYPE)

    def __contains__(self, name: object) -> bool:
        return name in self._blocks

    def __iter__(self) -> Iterator[str]:
        return iter(self._blocks)

    def __len__(self) -> int:
        return len(self._blocks)

    def names(self) -> list[str]:
        return list(self._blocks)

    def items(self) -> Iterator[tuple[str, np.ndarray]]:
        return iter(self._blocks.items())

    def with_prefix(self, prefix: str) -> list[str]:
        return [name for name in self._blocks if name.startswith(prefix)]

    def zeros_like(self) -> ParamStore:
        return ParamStore({name: np.zeros_like(value) for name, value in self._blocks.items()})

    def copy(self) -> ParamStore:
        return ParamStore({name: value.copy() for name, value in self._blocks.items()})

    def parameter_count(self) -> int:
        return int(sum(value.size for value in self._blocks.values()))

    def global_norm(self) -> float:
        return float(np.sqrt(sum(float(np.sum(value * value)) for value in self._blocks.values())))

    def scale(self, factor: float) -> None:
        for value in self._blocks.values():
            value *= factor

    def first_non_finite(self) -> str | None:
        """Name of the first block holding NaN or Inf, if any."""
        for name, value in self._blocks.items():
            if not np.all(np.isfinite(value)):
                return name
        return None

    def checksum(self, name: str, rows: np.ndarray | None = None) -> str:
        """SHA-256 over the raw bytes of a block, or of selected rows of it."""
        value = self[name]
        if rows is not None:
            value = value[rows]
        return hashlib.sha256(np.ascontiguousarray(value).tobytes()).hexdigest()

    def init_uniform(self, name: str, shape: tuple[int, ...], rng: np.random.Generator) -> None:
        """Uniform(-s, s) with s = 1/sqrt(fan_in); fan_in is the last axis."""
        scale = 1.0 / np.sqrt(shape[-1])
        self[name] = rng.uniform(-scale, scale, size=shape)

    def init_zeros(self, name: str, shape: tuple[int, ...]) -> None:
        self[name] = np.zeros(shape, dtype=DTYPE)


def check_width(name: str, expected: int, actual: int) -> None:
    """Raise ConfigurationError when a vector does not have the width a layer expects."""
    if expected != actual:
        raise ConfigurationError(f"{name}: expected width {expected}, got {actual}")
