from __future__ import annotations

import dataclasses
import json
from pathlib import Path
from typing import Any, Mapping, TypeVar

from npi_workbench.errors import ConfigurationError

"""Dataclass configs stored as JSON with sorted keys."""

C = TypeVar("C", bound="JsonConfig")


class JsonConfig:
    """Mixin for dataclass configs.

    Unknown keys are rejected; JSON lists are turned back into tuples so a
    loaded config compares equal to the one that was saved.
    """

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)  # type: ignore[call-overload]

    @classmethod
    def from_dict(cls: type[C], data: Mapping[str, Any]) -> C:
        fields = {field.name for field in dataclasses.fields(cls)}  # type: ignore[arg-type]
        unknown = sorted(set(data) - fields)
        if unknown:
            raise ConfigurationError(f"unknown {cls.__name__} keys: {', '.join(unknown)}")
        values = {key: tuple(value) if isinstance(value, list) else value for key, value in data.items()}
        try:
            return cls(**values)
        except TypeError as e:
            raise ConfigurationError(f"bad {cls.__name__}: {e}") from None

    def updated(self: C, **overrides: Any) -> C:
        """Copy with the given fields replaced; None values leave a field alone."""
        return self.from_dict({**self.to_dict(), **{k: v for k, v in overrides.items() if v is not None}})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls: type[C], path: str | Path) -> C:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"cannot read {cls.__name__} from {path}: {e}") from None
        if not isinstance(data, dict):
            raise ConfigurationError(f"{path}: expected a JSON object")
        return cls.from_dict(data)
