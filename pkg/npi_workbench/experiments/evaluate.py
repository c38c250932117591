from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import logging
from pathlib import Path
from typing import Iterable, Mapping, Sequence
import numpy as np
from tqdm import tqdm

from npi_workbench import constants
from npi_workbench.baselines.formats import seq_example, to_pair
from npi_workbench.baselines.seq2seq import Seq2SeqModel, s2s_eval
from npi_workbench.csvlog import CsvLog
from npi_workbench.model.core import NpiModel
from npi_workbench.model.interpreter import run
from npi_workbench.oracles.tasks import TASKS, Task, get_task
from npi_workbench.programs import ProgramSpec

"""Evaluation grids: per-sequence accuracy, trace exact match and mean steps per (task, size) cell."""

logger = logging.getLogger(__name__)

EVAL_FIELDS = ["schema_version", "experiment", "model", "seed", "task", "size", "examples", "accuracy",
               "trace_exact_match", "mean_steps"]


@dataclass(frozen=True)
class CellResult:
    task: str
    size: int
    accuracy: float
    trace_exact_match: float | None = None
    mean_steps: float | None = None

    def row(self, experiment: str, model: str, seed: int, examples: int | None = None) -> dict[str, object]:
        return {
            "schema_version": constants.CSV_SCHEMA_VERSION,
            "experiment": experiment,
            "model": model,
            "seed": seed,
            "task": self.task,
            "size": self.size,
            "examples": examples,
            "accuracy": self.accuracy,
            "trace_exact_match": self.trace_exact_match,
            "mean_steps": self.mean_steps,
        }


def eval_instances(task: Task, size: int, count: int = constants.EVAL_INSTANCES,
                   seed: int = constants.EVAL_SEED) -> list[str]:
    """The same instances for a given (task, size, seed) on every call."""
    rng = np.random.default_rng([seed, list(TASKS).index(task.name), size + 1])
    return task.sample_instances(size, count, rng)


def can_run(model: NpiModel, task: Task) -> bool:
    return ProgramSpec(task.env, task.program) in model.memory


def evaluate_npi(model: NpiModel, task: Task, size: int, instances: Sequence[str],
                 threshold: float = constants.END_THRESHOLD, max_steps: int | None = None) -> CellResult:
    """A sequence is correct when the run returns normally and leaves the environment solved.

    Without `max_steps` the step budget per instance is twice the oracle trace
    length, and never below the default budget.
    """
    correct = exact = steps = 0
    for instance in instances:
        oracle = task.trace(instance)
        budget = max_steps if max_steps is not None else max(constants.MAX_STEPS, 2 * len(oracle.steps))
        result = run(model, task.program, task.make_env(instance), threshold=threshold, max_steps=budget,
                     task=task.name)
        correct += result.completed and task.solved(result.env)
        exact += result.trace.steps == oracle.steps
        steps += result.steps
    count = max(len(instances), 1)
    return CellResult(task.name, size, correct / count, exact / count, steps / count)


def evaluate_seq2seq(model: Seq2SeqModel, seq_task: str, task: Task, size: int,
                     instances: Sequence[str]) -> CellResult:
    pairs = [to_pair(seq_example(seq_task, instance)) for instance in instances]
    return CellResult(task.name, size, s2s_eval(model, pairs))


def evaluate_grid(model: NpiModel, cells: Iterable[tuple[str, int]], instances: int = constants.EVAL_INSTANCES,
                  seed: int = constants.EVAL_SEED, workers: int = 1, show_progress: bool = False,
                  max_steps: int | None = None) -> list[CellResult]:
    """Evaluate every cell whose task the model has a program for, in cell order.

    Cells run on a thread pool when `workers` > 1; the model is only read.
    """
    jobs = []
    for name, size in cells:
        task = get_task(name)
        if not can_run(model, task):
            logger.debug("Skipping %s: model has no %s program", name, task.program)
            continue
        jobs.append((task, size, eval_instances(task, size, instances, seed)))

    def evaluate(job: tuple[Task, int, list[str]]) -> CellResult:
        task, size, cell_instances = job
        result = evaluate_npi(model, task, size, cell_instances, max_steps=max_steps)
        logger.info("%s size %d: accuracy %.3f", task.name, size, result.accuracy)
        return result

    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(tqdm(pool.map(evaluate, jobs), total=len(jobs), desc="eval", disable=not show_progress))


def write_results(path: str | Path, rows: Iterable[Mapping[str, object]], append: bool = False) -> int:
    count = 0
    with CsvLog(path, EVAL_FIELDS, append=append) as log:
        for row in rows:
            log.write(row)
            count += 1
    return count
