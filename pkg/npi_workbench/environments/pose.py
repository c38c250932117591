from __future__ import annotations

from dataclasses import dataclass
from typing import ClassVar
import numpy as np

from npi_workbench import constants
from npi_workbench.environments.actions import Action, Args, action_of
from npi_workbench.environments.base import Environment, Snapshot, args_features, one_hot
from npi_workbench.errors import ActionError, InputError

"""Camera pose on a 15-degree grid with a read-only target pad.

Stands in for the rendered-car canonicalization world: the encoder sees the
true pose instead of pixels. Azimuth wraps around; elevation is clamped to a
band.
"""

GRID = constants.POSE_GRID


def azimuth_delta(current: int, target: int) -> int:
    """Signed shortest wrap-around step count from current to target; ties go right (+)."""
    delta = (target - current) % GRID
    return delta if delta <= GRID // 2 else delta - GRID


def pose_distance(azimuth: int, elevation: int, target_azimuth: int, target_elevation: int) -> int:
    return abs(azimuth_delta(azimuth, target_azimuth)) + abs(target_elevation - elevation)


@dataclass(frozen=True)
class PoseState(Environment):
    azimuth: int
    elevation: int
    target_azimuth: int
    target_elevation: int
    elevation_min: int = constants.ELEVATION_MIN
    elevation_max: int = constants.ELEVATION_MAX

    tag: ClassVar[str] = "pose"
    feature_width: ClassVar[int] = 4 * GRID + 2 + constants.ARGUMENT_SLOTS * constants.ARGUMENT_VOCAB

    @staticmethod
    def reset(start: tuple[int, int], target: tuple[int, int],
              elevation_band: tuple[int, int] = (constants.ELEVATION_MIN, constants.ELEVATION_MAX)) -> PoseState:
        """Start and target are (azimuth, elevation) grid indices."""
        low, high = elevation_band
        for azimuth, elevation in (start, target):
            if not 0 <= azimuth < GRID:
                raise InputError(f"azimuth index {azimuth} outside 0..{GRID - 1}")
            if not low <= elevation <= high:
                raise InputError(f"elevation index {elevation} outside {low}..{high}")
        return PoseState(start[0], start[1], target[0], target[1], low, high)

    @classmethod
    def parse(cls, text: str) -> PoseState:
        """'az,el>taz,tel' in grid indices."""
        try:
            start_text, target_text = text.split(">")
            az, el = (int(v) for v in start_text.split(","))
            taz, tel = (int(v) for v in target_text.split(","))
        except ValueError:
            raise InputError(f"pose instance must look like '2,3>0,1', got {text!r}") from None
        return cls.reset((az, el), (taz, tel))

    def describe(self) -> str:
        return f"{self.azimuth},{self.elevation}>{self.target_azimuth},{self.target_elevation}"

    def step(self, args: Args) -> PoseState:
        action = action_of(args)
        azimuth, elevation = self.azimuth, self.elevation
        if action is Action.LEFT:
            azimuth = (azimuth - 1) % GRID
        elif action is Action.RIGHT:
            azimuth = (azimuth + 1) % GRID
        elif action is Action.UP:
            elevation = min(elevation + 1, self.elevation_max)
        elif action is Action.DOWN:
            elevation = max(elevation - 1, self.elevation_min)
        else:
            raise ActionError(self.tag, args, "pose supports LEFT, RIGHT, UP and DOWN")
        return PoseState(azimuth, elevation, self.target_azimuth, self.target_elevation,
                         self.elevation_min, self.elevation_max)

    def observe(self) -> Snapshot:
        return (self.azimuth, self.elevation, self.target_azimuth, self.target_elevation,
                int(self.elevation == self.elevation_min), int(self.elevation == self.elevation_max))

    @classmethod
    def features(cls, snapshot: Snapshot, args: Args) -> np.ndarray:
        return np.concatenate([one_hot(value, GRID) for value in snapshot[:4]]
                              + [np.asarray(snapshot[4:], dtype=float), args_features(args)])

    @classmethod
    def describe_action(cls, args: Args) -> str:
        action = action_of(args)
        if action in (Action.LEFT, Action.RIGHT, Action.UP, Action.DOWN):
            return f"MOVE {action.name}"
        return f"ACT {args}"

    def is_solved(self) -> bool:
        return (self.azimuth, self.elevation) == (self.target_azimuth, self.target_elevation)

    def distance(self) -> int:
        return pose_distance(self.azimuth, self.elevation, self.target_azimuth, self.target_elevation)


def pose_env_reset(start: tuple[int, int], target: tuple[int, int]) -> PoseState:
    return PoseState.reset(start, target)


def pose_env_step(state: PoseState, args: Args) -> PoseState:
    return state.step(args)
