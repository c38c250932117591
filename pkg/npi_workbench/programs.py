"""Program catalog: which programs exist in which environment."""

from dataclasses import dataclass
from typing import Final

ACT: Final = "ACT"


@dataclass(frozen=True)
class ProgramSpec:
    """A program is identified by its environment tag and its name."""
    env: str
    name: str

    @property
    def key(self) -> str:
        return f"{self.env}/{self.name}"

    @property
    def is_act(self) -> bool:
        return self.name == ACT

    @staticmethod
    def from_key(key: str) -> "ProgramSpec":
        env, _, name = key.partition("/")
        return ProgramSpec(env, name)


def _programs(env: str, *names: str) -> tuple[ProgramSpec, ...]:
    return tuple(ProgramSpec(env, name) for name in names)


ADDITION_PROGRAMS: Final = _programs("add", "ADD", "ADD1", "CARRY", "LSHIFT", ACT)
SORTING_PROGRAMS: Final = _programs("sort", "BUBBLESORT", "BUBBLE", "RESET", "BSTEP", "COMPSWAP",
                                    "LSHIFT", "RSHIFT", ACT)
POSE_PROGRAMS: Final = _programs("pose", "GOTO", "HGOTO", "LGOTO", "RGOTO", "VGOTO", "UGOTO", "DGOTO", ACT)

CORE_PROGRAMS: Final = ADDITION_PROGRAMS + SORTING_PROGRAMS + POSE_PROGRAMS

# Learned later on a frozen core.
MAX_PROGRAMS: Final = _programs("sort", "MAX", "RJMP")

PROGRAMS_BY_ENV: Final = {
    "add": ADDITION_PROGRAMS,
    "sort": SORTING_PROGRAMS + MAX_PROGRAMS,
    "pose": POSE_PROGRAMS,
}


def known_program(env: str, name: str) -> bool:
    return ProgramSpec(env, name) in PROGRAMS_BY_ENV.get(env, ())
