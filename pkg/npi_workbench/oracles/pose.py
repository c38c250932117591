from __future__ import annotations

from npi_workbench.environments.actions import Action, act
from npi_workbench.environments.pose import PoseState, azimuth_delta
from npi_workbench.oracles.recorder import Invocation, Recorder
from npi_workbench.oracles.trace import Trace

Pose = Invocation[PoseState]


def goto_program(inv: Pose) -> None:
    inv.call("HGOTO", hgoto_program)
    inv.call("VGOTO", vgoto_program)


def hgoto_program(inv: Pose) -> None:
    state = inv.env
    delta = azimuth_delta(state.azimuth, state.target_azimuth)
    if delta < 0:
        inv.call("LGOTO", lgoto_program)
    elif delta > 0:
        inv.call("RGOTO", rgoto_program)


def lgoto_program(inv: Pose) -> None:
    while inv.env.azimuth != inv.env.target_azimuth:
        inv.act(act(action=Action.LEFT))


def rgoto_program(inv: Pose) -> None:
    while inv.env.azimuth != inv.env.target_azimuth:
        inv.act(act(action=Action.RIGHT))


def vgoto_program(inv: Pose) -> None:
    state = inv.env
    if state.elevation > state.target_elevation:
        inv.call("DGOTO", dgoto_program)
    elif state.elevation < state.target_elevation:
        inv.call("UGOTO", ugoto_program)


def ugoto_program(inv: Pose) -> None:
    while inv.env.elevation < inv.env.target_elevation:
        inv.act(act(action=Action.UP))


def dgoto_program(inv: Pose) -> None:
    while inv.env.elevation > inv.env.target_elevation:
        inv.act(act(action=Action.DOWN))


def oracle_goto(start: tuple[int, int], target: tuple[int, int]) -> Trace:
    """Start and target are (azimuth, elevation) grid indices."""
    return Recorder("pose", PoseState.reset(start, target)).run("GOTO", goto_program)
