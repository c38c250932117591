from __future__ import annotations

import csv
from pathlib import Path
from typing import Any, Mapping, Sequence, TextIO

from npi_workbench.errors import UsageError

"""Schema-versioned CSV files that can be appended to safely."""


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


class CsvLog:
    """A CSV file with a fixed header.

    In append mode an existing file must carry exactly the same header;
    anything else is a UsageError, so rows of different schemas never mix.
    """

    def __init__(self, path: str | Path, fieldnames: Sequence[str], append: bool = False):
        self.path = Path(path)
        self.fieldnames = list(fieldnames)
        self._file: TextIO | None = None
        self._writer: csv.DictWriter | None = None
        self._append = append

    def __enter__(self) -> CsvLog:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        existing = self._append and self.path.exists() and self.path.stat().st_size > 0
        if existing:
            with open(self.path, newline="", encoding="utf-8") as f:
                header = next(csv.reader(f), [])
            if header != self.fieldnames:
                raise UsageError(f"{self.path} has header {header}, refusing to append rows with {self.fieldnames}")
        self._file = open(self.path, "a" if existing else "w", newline="", encoding="utf-8")
        self._writer = csv.DictWriter(self._file, fieldnames=self.fieldnames, lineterminator="\n")
        if not existing:
            self._writer.writeheader()
        return self

    def write(self, row: Mapping[str, Any]) -> None:
        assert self._writer is not None and self._file is not None, "CsvLog used outside a with block"
        self._writer.writerow({key: format_value(row.get(key)) for key in self.fieldnames})
        self._file.flush()

    def __exit__(self, *exc_info: object) -> None:
        if self._file is not None:
            self._file.close()
        self._file = None
        self._writer = None


def read_rows(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))
