from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterable, Sequence
import numpy as np

from npi_workbench.errors import ConfigurationError, GradientLeakError
from npi_workbench.model.core import NpiModel
from npi_workbench.model.memory import EMBEDDINGS, KEYS
from npi_workbench.nn.params import ParamStore
from npi_workbench.oracles.trace import Trace
from npi_workbench.programs import ProgramSpec
from npi_workbench.training.config import TrainConfig
from npi_workbench.training.trainer import TrainResult, heldout_segments, optimize, segments_by_program

"""Learning new programs on a frozen core: only the new memory rows may change."""

logger = logging.getLogger(__name__)

MEMORY_BLOCKS = (KEYS, EMBEDDINGS)


def frozen_checksums(params: ParamStore, frozen_rows: int) -> dict[str, str]:
    """Checksums of everything except memory rows at index >= frozen_rows."""
    return {name: params.checksum(name, np.arange(frozen_rows) if name in MEMORY_BLOCKS else None)
            for name in params.names()}


def verify_frozen(params: ParamStore, frozen_rows: int, before: dict[str, str]) -> None:
    after = frozen_checksums(params, frozen_rows)
    leaked = [name for name in before if after.get(name) != before[name]]
    if leaked:
        raise GradientLeakError(f"frozen parameter blocks changed: {', '.join(leaked)}")


def train_fixed_core(model: NpiModel, new_programs: Sequence[ProgramSpec], new_traces: Iterable[Trace],
                     replay_traces: Iterable[Trace] = (), config: TrainConfig = TrainConfig(),
                     out_dir: str | Path | None = None, show_progress: bool = True) -> TrainResult | None:
    """Train the key and embedding rows of `new_programs` and nothing else.

    Segments of the new programs are drawn through the curriculum; with
    probability `replay_ratio` a step instead replays a segment of an existing
    program, taken from the new traces' subtrees and from `replay_traces`.
    Returns None, leaving the model untouched, when the new traces contain no
    segment of a new program.
    """
    memory = model.memory
    rows = []
    for spec in new_programs:
        if spec not in memory:
            raise ConfigurationError(f"{spec.key} must be registered with add_program before training")
        rows.append(memory.index(spec.env, spec.name))
    first_new = min(rows) if rows else len(memory)
    if any(row < len(memory) - len(rows) for row in rows):
        raise ConfigurationError("new programs must occupy the last rows of program memory")

    new_keys = {spec.key for spec in new_programs}
    new_traces = list(new_traces)
    pool = segments_by_program(new_traces)
    new_pool = {key: segments for key, segments in pool.items() if key in new_keys}
    if not new_pool:
        logger.warning("No segments of %s in the new traces; nothing to train", ", ".join(sorted(new_keys)))
        return None

    replay = [segment for key, segments in pool.items() if key not in new_keys for segment in segments]
    for key, segments in segments_by_program(replay_traces).items():
        if key not in new_keys:
            replay.extend(segments)

    trainable = {name: np.array(sorted(rows)) for name in MEMORY_BLOCKS}
    before = frozen_checksums(model.params, first_new)
    programs = [spec.key for spec in new_programs if spec.key in new_pool]
    logger.info("Fixed-core training of %s with %d replay segments", ", ".join(programs), len(replay))

    result = optimize(model, new_pool, programs, heldout_segments(new_pool, new_traces, None, config), config,
                      None, out_dir, show_progress, trainable=trainable, replay=replay)
    verify_frozen(model.params, first_new, before)
    return result
