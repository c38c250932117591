from __future__ import annotations

from contextlib import ExitStack
from dataclasses import dataclass, field
import logging
from pathlib import Path
from typing import Iterable, Mapping, Sequence
import numpy as np
from tqdm import tqdm

from npi_workbench import constants
from npi_workbench.csvlog import CsvLog, read_rows
from npi_workbench.errors import ConfigurationError, InputError, TraceDataError, TrainingError
from npi_workbench.model.checkpoint import save_checkpoint
from npi_workbench.model.core import NpiModel
from npi_workbench.nn.adam import AdamState, Trainable, adam_step, clip_global_norm
from npi_workbench.oracles.tasks import get_task
from npi_workbench.oracles.trace import Segment, Trace
from npi_workbench.training.config import TrainConfig
from npi_workbench.training.curriculum import CurriculumState, curriculum_sample, estimate_errors
from npi_workbench.training.loss import LossTerms, segment_loss

"""Trace-supervised training with an adaptive curriculum over program segments."""

logger = logging.getLogger(__name__)

METRICS_FILE = "metrics.csv"
CHECKPOINT_FILE = "model.ckpt"
BASE_METRICS = ["schema_version", "step", "lr", "loss_total", "loss_program", "loss_args", "loss_end"]

Pool = Mapping[str, Sequence[Segment]]


@dataclass
class TrainResult:
    model: NpiModel
    optimizer: AdamState
    steps: int
    errors: dict[str, float] = field(default_factory=dict)
    stopped_early: bool = False


def segments_by_program(traces: Iterable[Trace]) -> dict[str, list[Segment]]:
    """Every invocation of every trace, grouped by program key; ACT has no segments."""
    pool: dict[str, list[Segment]] = {}
    for trace in traces:
        for segment in trace.segments():
            pool.setdefault(segment.key, []).append(segment)
    return pool


def draw_heldout(pool: Pool, count: int, rng: np.random.Generator) -> dict[str, list[Segment]]:
    heldout = {}
    for key in sorted(pool):
        segments = pool[key]
        chosen = rng.choice(len(segments), size=min(count, len(segments)), replace=False)
        heldout[key] = [segments[i] for i in sorted(chosen)]
    return heldout


def metrics_fields(model: NpiModel) -> list[str]:
    return BASE_METRICS + [f"err:{spec.key}" for spec in model.memory.registry if not spec.is_act]


def _drop_rows_after(path: Path, fields: list[str], last_step: int) -> None:
    """Rewrite a metrics log without rows logged after `last_step`; other headers are left for CsvLog to refuse."""
    if not path.exists() or path.stat().st_size == 0:
        return
    rows = read_rows(path)
    kept = [row for row in rows if int(row["step"]) <= last_step]
    if len(kept) == len(rows) or (rows and list(rows[0]) != fields):
        return
    with CsvLog(path, fields) as log:
        for row in kept:
            log.write(row)


def fresh_heldout(traces: Iterable[Trace], programs: Iterable[str], count: int,
                  rng: np.random.Generator) -> dict[str, list[Segment]]:
    """Segments of newly sampled oracle traces with the training traces' tasks and sizes.

    Instances that occur in `traces` are never reused. Cells are sampled in
    rounds until every program in `programs` has `count` segments or the
    attempts run out; programs may come back short or missing.
    """
    cells: dict[tuple[str, int], None] = {}
    seen: set[tuple[str, str]] = set()
    for trace in traces:
        seen.add((trace.task, trace.instance))
        try:
            cells.setdefault((trace.task, get_task(trace.task).measure(trace.instance)))
        except (ConfigurationError, InputError):
            logger.debug("No sampler for %s instance %s", trace.task, trace.instance)

    wanted = set(programs)
    found: dict[str, list[Segment]] = {}
    live = list(cells)
    for _ in range(constants.HELDOUT_ATTEMPTS * count):
        if not live or all(len(found.get(key, ())) >= count for key in wanted):
            break
        for cell in list(live):
            name, size = cell
            task = get_task(name)
            try:
                instance = task.sample(size, rng)
            except InputError:
                live.remove(cell)
                continue
            if (name, instance) in seen:
                continue
            seen.add((name, instance))
            for segment in task.trace(instance).segments():
                if segment.key in wanted:
                    found.setdefault(segment.key, []).append(segment)
    return {key: segments[:count] for key, segments in sorted(found.items())}


def heldout_segments(pool: Pool, traces: Iterable[Trace], heldout: Iterable[Trace] | None,
                     config: TrainConfig) -> dict[str, list[Segment]]:
    """Error-estimation segments per program.

    Given traces are used as they are. Otherwise fresh oracle traces are drawn
    from their own seed stream; a program with no fresh segments falls back to
    segments of its training pool.
    """
    if heldout is not None:
        return {key: segments[:config.heldout_per_program]
                for key, segments in segments_by_program(heldout).items()}
    rng = np.random.default_rng([config.seed, 1])
    segments = fresh_heldout(traces, pool, config.heldout_per_program, rng)
    missing = sorted(key for key in pool if key not in segments)
    if missing:
        logger.warning("No fresh held-out traces for %s; estimating their errors on training segments",
                       ", ".join(missing))
        segments.update(draw_heldout({key: pool[key] for key in missing}, config.heldout_per_program, rng))
    return segments


def optimize(model: NpiModel, pool: Pool, programs: list[str], heldout: Pool, config: TrainConfig,
             optimizer: AdamState | None = None, out_dir: str | Path | None = None, show_progress: bool = True,
             trainable: Trainable | None = None, replay: Sequence[Segment] = ()) -> TrainResult:
    """The shared optimization loop.

    Each step draws `batch_size` segments (from `replay` with probability
    `replay_ratio` when replay segments are given, otherwise from the
    curriculum over `programs`), backpropagates their loss, clips and takes an
    ADAM step. Errors are re-estimated on `heldout` every
    `reestimate_interval` steps.

    A non-fresh `optimizer` continues its run: logged and checkpointed step
    numbers carry on from `optimizer.step`, rows of `metrics.csv` past that
    step are dropped and new rows appended, draws come from a stream keyed by
    the step, and the curriculum starts from a fresh error estimate.
    """
    optimizer = optimizer or AdamState.create(model.params, config.learning_rate, config.lr_decay,
                                              config.lr_decay_interval)
    done = optimizer.step
    rng = np.random.default_rng([config.seed, done] if done else config.seed)
    curriculum = CurriculumState(list(programs), config.curriculum_temperature)
    fields = metrics_fields(model)
    errors: dict[str, float] = {}
    weights = config.loss_weights
    quiet_estimates = 0
    stopped_early = False
    window = LossTerms()
    window_steps = 0
    step = done

    checkpoint_path = Path(out_dir) / CHECKPOINT_FILE if out_dir is not None else None

    def draw() -> Segment:
        if replay and rng.random() < config.replay_ratio:
            return replay[int(rng.integers(len(replay)))]
        key = curriculum_sample(curriculum, rng)
        return pool[key][int(rng.integers(len(pool[key])))]

    def metrics_row(lr: float) -> dict[str, object]:
        scale = 1.0 / max(window_steps, 1)
        row: dict[str, object] = {
            "schema_version": constants.CSV_SCHEMA_VERSION,
            "step": step,
            "lr": lr,
            "loss_total": window.total(weights) * scale,
            "loss_program": window.program * scale,
            "loss_args": window.args * scale,
            "loss_end": window.end * scale,
        }
        row.update({f"err:{key}": value for key, value in errors.items()})
        return row

    def estimate() -> float:
        errors.update(estimate_errors(model, {key: heldout[key] for key in programs if key in heldout}))
        curriculum.update(errors)
        return max(errors.values(), default=1.0)

    if done:
        logger.info("Continuing from step %d; worst held-out error %.4f", done, estimate())

    with ExitStack() as stack:
        metrics = None
        if out_dir is not None:
            metrics_path = Path(out_dir) / METRICS_FILE
            if done:
                _drop_rows_after(metrics_path, fields, done)
            metrics = stack.enter_context(CsvLog(metrics_path, fields, append=bool(done)))
        if checkpoint_path is not None:
            save_checkpoint(model, checkpoint_path, optimizer)

        for step in tqdm(range(done + 1, done + config.max_steps + 1), desc="train", disable=not show_progress):
            lr = optimizer.effective_learning_rate()
            grads = model.params.zeros_like()
            terms = LossTerms()
            for _ in range(config.batch_size):
                segment = draw()
                terms.add(segment_loss(model, segment.env, segment.steps, grads, weights))
            if config.batch_size > 1:
                grads.scale(1.0 / config.batch_size)

            loss = terms.total(weights)
            if not np.isfinite(loss):
                logger.error("Non-finite loss %s at step %d; keeping the last checkpoint", loss, step)
                raise TrainingError(f"non-finite loss at step {step}")
            clip_global_norm(grads, config.clip_norm)
            adam_step(model.params, grads, optimizer, trainable)
            logger.debug("step %d loss %.6f", step, loss)

            window.add(terms)
            window_steps += 1

            estimated = step % config.reestimate_interval == 0
            if estimated:
                worst = estimate()
                logger.info("step %d: re-estimated errors, worst %.4f", step, worst)
                quiet_estimates = quiet_estimates + 1 if worst < config.early_stop_error else 0
                stopped_early = quiet_estimates >= 2

            if metrics is not None and (estimated or step % config.log_interval == 0 or stopped_early):
                metrics.write(metrics_row(lr))
                window, window_steps = LossTerms(), 0
            if checkpoint_path is not None and step % config.checkpoint_interval == 0:
                save_checkpoint(model, checkpoint_path, optimizer)
            if stopped_early:
                logger.info("Early stop at step %d: every program below %.2f%% error",
                            step, 100 * config.early_stop_error)
                break

        if checkpoint_path is not None:
            save_checkpoint(model, checkpoint_path, optimizer)

    return TrainResult(model, optimizer, step - done, errors, stopped_early)


def train(model: NpiModel, traces: Iterable[Trace], config: TrainConfig = TrainConfig(),
          optimizer: AdamState | None = None, heldout: Iterable[Trace] | None = None,
          out_dir: str | Path | None = None, show_progress: bool = True) -> TrainResult:
    """Train on the invocation segments of `traces`, which may mix tasks and environments.

    Writes `metrics.csv` and `model.ckpt` into `out_dir` when given.
    """
    traces = list(traces)
    pool = segments_by_program(traces)
    programs = [spec.key for spec in model.memory.registry if not spec.is_act and spec.key in pool]
    if not programs:
        raise ConfigurationError("no training segments for any registered program")
    unknown = sorted(set(pool) - {spec.key for spec in model.memory.registry})
    if unknown:
        raise TraceDataError(f"traces use unregistered programs: {', '.join(unknown)}")
    logger.info("Training on %d segments across %d programs",
                sum(len(segments) for segments in pool.values()), len(programs))
    return optimize(model, pool, programs, heldout_segments(pool, traces, heldout, config), config,
                    optimizer, out_dir, show_progress)
