from __future__ import annotations

from dataclasses import dataclass
import json
import logging
from pathlib import Path
from typing import Callable, Iterable, Sequence
import numpy as np

from npi_workbench.baselines.formats import ALIGNED_TASKS, seq_example, to_pair
from npi_workbench.baselines.seq2seq import Seq2SeqConfig, Seq2SeqModel, load_seq2seq, s2s_train
from npi_workbench.csvlog import read_rows
from npi_workbench.errors import ConfigurationError
from npi_workbench.experiments.evaluate import (CellResult, eval_instances, evaluate_grid, evaluate_seq2seq,
                                                write_results)
from npi_workbench.experiments.spec import Cell, ExperimentSpec
from npi_workbench.model.checkpoint import load_checkpoint
from npi_workbench.model.core import NpiModel
from npi_workbench.oracles.tasks import get_task
from npi_workbench.oracles.trace import Trace
from npi_workbench.programs import ProgramSpec
from npi_workbench.training.fixed_core import train_fixed_core
from npi_workbench.training.trainer import CHECKPOINT_FILE, train

"""Named experiment recipes: generate, train, evaluate, summarize.

A run directory holds spec.json, results.csv, summary.txt and checkpoints/.
Finished models under checkpoints/ are reused when a recipe is run again, and
an interpreter whose training was interrupted resumes from its last checkpoint.
"""

logger = logging.getLogger(__name__)

SPEC_FILE = "spec.json"
RESULTS_FILE = "results.csv"
SUMMARY_FILE = "summary.txt"
CHECKPOINTS = "checkpoints"
DONE_FILE = "done.json"

NPI = "npi"
CONTINUAL = "npi+max"
# Baselines trained on twice the interpreter's example count.
DOUBLED_BASELINES = ("add-easy",)


def _grid(task: str, sizes: Iterable[int]) -> tuple[Cell, ...]:
    return tuple((task, size) for size in sizes)


def sample_complexity() -> ExperimentSpec:
    return ExperimentSpec(name="sample-complexity", train_grid=(("sort", 20),), examples=(2, 8, 32, 128, 256),
                          eval_grid=(("sort", 20),), seeds=(0, 1, 2), baselines=("sort",))


def sort_generalization() -> ExperimentSpec:
    return ExperimentSpec(name="sort-generalization", train_grid=_grid("sort", range(2, 21)), examples=(64,),
                          eval_grid=_grid("sort", range(2, 61)), seeds=(0, 1, 2), baselines=("sort",))


def add_generalization() -> ExperimentSpec:
    return ExperimentSpec(name="add-generalization", train_grid=_grid("add", range(1, 21)), examples=(32,),
                          eval_grid=_grid("add", [*range(1, 21), *range(30, 101, 10)]), seeds=(0, 1, 2),
                          baselines=("add-stacked", "add-easy"))


MULTITASK_TRAIN = _grid("add", range(1, 11)) + _grid("sort", range(2, 9)) + _grid("pose", range(0, 9))
MULTITASK_EVAL = (("add", 10), ("sort", 5)) + _grid("pose", range(0, 5))


def multitask() -> ExperimentSpec:
    return ExperimentSpec(name="multitask", train_grid=MULTITASK_TRAIN, examples=(32,), eval_grid=MULTITASK_EVAL,
                          single_task_models=True)


def fixed_core_max() -> ExperimentSpec:
    return ExperimentSpec(name="fixed-core-max", train_grid=MULTITASK_TRAIN, examples=(32,),
                          eval_grid=MULTITASK_EVAL + (("max", 5),), continual_grid=_grid("max", range(2, 9)))


RECIPES: dict[str, Callable[[], ExperimentSpec]] = {
    "sample-complexity": sample_complexity,
    "sort-generalization": sort_generalization,
    "add-generalization": add_generalization,
    "multitask": multitask,
    "fixed-core-max": fixed_core_max,
}


def recipe(name: str) -> ExperimentSpec:
    try:
        return RECIPES[name]()
    except KeyError:
        raise ConfigurationError(f"unknown experiment {name!r}; choose from {', '.join(RECIPES)}") from None


def training_instances(cells: Sequence[Cell], count: int, seed: int) -> list[tuple[str, str]]:
    """(task, instance) pairs: `count` per cell, drawn from a stream fixed by (seed, count)."""
    rng = np.random.default_rng([seed, count])
    return [(task, instance) for task, size in cells
            for instance in get_task(task).sample_instances(size, count, rng)]


def oracle_traces(instances: Iterable[tuple[str, str]]) -> list[Trace]:
    return [get_task(task).trace(instance) for task, instance in instances]


@dataclass
class Runner:
    spec: ExperimentSpec
    root: Path
    show_progress: bool = True

    def checkpoint_dir(self, tag: str) -> Path:
        return self.root / CHECKPOINTS / tag

    def train_npi(self, tag: str, traces: Sequence[Trace], seed: int) -> NpiModel:
        """Train, resume or reuse the interpreter stored under checkpoints/<tag>."""
        directory = self.checkpoint_dir(tag)
        path = directory / CHECKPOINT_FILE
        if (directory / DONE_FILE).exists():
            logger.info("Reusing trained model %s", directory)
            return load_checkpoint(path).model
        config = self.spec.train_config(seed)
        optimizer = None
        if path.exists():
            checkpoint = load_checkpoint(path)
            model, optimizer = checkpoint.model, checkpoint.optimizer
            done_steps = optimizer.step if optimizer is not None else 0
            logger.info("Resuming %s from step %d", tag, done_steps)
            config = self.spec.train_config(seed, max(self.spec.train_steps - done_steps, 0))
        else:
            model = NpiModel.create(self.spec.model_config(seed))
        result = train(model, traces, config, optimizer, out_dir=directory, show_progress=self.show_progress)
        _mark_done(directory, result.steps, result.stopped_early)
        return result.model

    def train_continual(self, tag: str, model: NpiModel, traces: Sequence[Trace], replay: Sequence[Trace],
                        seed: int) -> NpiModel:
        """Register the programs the new traces use and learn them on the frozen core."""
        directory = self.checkpoint_dir(tag)
        if (directory / DONE_FILE).exists():
            logger.info("Reusing trained model %s", directory)
            return load_checkpoint(directory / CHECKPOINT_FILE).model
        new_programs = unregistered_programs(model, traces)
        rng = np.random.default_rng([seed, len(model.memory)])
        for spec in new_programs:
            model.memory.add_program(spec.name, spec.env, rng)
        result = train_fixed_core(model, new_programs, traces, replay, self.spec.train_config(seed),
                                  out_dir=directory, show_progress=self.show_progress)
        _mark_done(directory, result.steps if result else 0, result.stopped_early if result else False)
        return model

    def train_seq2seq(self, tag: str, seq_task: str, instances: Sequence[str], seed: int) -> Seq2SeqModel:
        directory = self.checkpoint_dir(tag)
        path = directory / CHECKPOINT_FILE
        if path.exists():
            logger.info("Reusing trained baseline %s", directory)
            return load_seq2seq(path)
        pairs = [to_pair(seq_example(seq_task, instance)) for instance in instances]
        size = self.spec.model_size or Seq2SeqConfig().size
        config = Seq2SeqConfig(size=size, embedding_size=min(size, Seq2SeqConfig().embedding_size),
                               channels=pairs[0].channels, aligned=seq_task in ALIGNED_TASKS, seed=seed)
        model = Seq2SeqModel.create(config)
        train_config = self.spec.train_config(seed, self.spec.baseline_steps)
        return s2s_train(model, pairs, train_config, out_dir=directory, show_progress=self.show_progress).model

    def evaluate(self, model: NpiModel, cells: Sequence[Cell]) -> list[CellResult]:
        return evaluate_grid(model, cells, self.spec.eval_instances, self.spec.eval_seed, self.spec.workers,
                             self.show_progress, self.spec.eval_max_steps)

    def evaluate_baseline(self, model: Seq2SeqModel, seq_task: str, cells: Sequence[Cell]) -> list[CellResult]:
        results = []
        for name, size in cells:
            task = get_task(name)
            instances = eval_instances(task, size, self.spec.eval_instances, self.spec.eval_seed)
            results.append(evaluate_seq2seq(model, seq_task, task, size, instances))
        return results


def _mark_done(directory: Path, steps: int, stopped_early: bool) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    (directory / DONE_FILE).write_text(json.dumps({"steps": steps, "stopped_early": stopped_early},
                                                  sort_keys=True) + "\n", encoding="utf-8")


def unregistered_programs(model: NpiModel, traces: Iterable[Trace]) -> list[ProgramSpec]:
    """Programs the traces use that the model lacks, in order of first appearance."""
    found: dict[ProgramSpec, None] = {}
    for trace in traces:
        for step in trace.steps:
            for name in (step.program, step.next_program):
                spec = ProgramSpec(trace.env, name) if name is not None else None
                if spec is not None and spec not in model.memory:
                    found.setdefault(spec)
    return list(found)


def _baseline_task(seq_task: str) -> str:
    return "sort" if seq_task == "sort" else "add"


def run_experiment(spec: ExperimentSpec, out_dir: str | Path | None = None, show_progress: bool = True) -> Path:
    """Run a recipe end to end and return its run directory."""
    root = Path(out_dir if out_dir is not None else spec.out_dir) / spec.name
    root.mkdir(parents=True, exist_ok=True)
    spec.save(root / SPEC_FILE)
    runner = Runner(spec, root, show_progress)
    rows: list[dict[str, object]] = []

    for seed in spec.seeds:
        for count in spec.examples:
            logger.info("%s: seed %d, %d examples per cell", spec.name, seed, count)
            instances = training_instances(spec.train_grid, count, seed)
            traces = oracle_traces(instances)
            model = runner.train_npi(f"{NPI}-n{count}-s{seed}", traces, seed)
            rows += [r.row(spec.name, NPI, seed, count) for r in runner.evaluate(model, spec.eval_grid)]

            if spec.single_task_models and len(spec.tasks) > 1:
                for task in spec.tasks:
                    single = [trace for (name, _), trace in zip(instances, traces) if name == task]
                    single_model = runner.train_npi(f"{NPI}-{task}-n{count}-s{seed}", single, seed)
                    cells = [cell for cell in spec.eval_grid if cell[0] == task]
                    rows += [r.row(spec.name, f"{NPI}:{task}", seed, count)
                             for r in runner.evaluate(single_model, cells)]

            for seq_task in spec.baselines:
                base = _baseline_task(seq_task)
                pool = instances
                if seq_task in DOUBLED_BASELINES:
                    pool = training_instances(spec.train_grid, 2 * count, seed)
                baseline = runner.train_seq2seq(f"seq2seq-{seq_task}-n{count}-s{seed}", seq_task,
                                                [i for name, i in pool if name == base], seed)
                cells = [cell for cell in spec.eval_grid if cell[0] == base]
                rows += [r.row(spec.name, f"seq2seq:{seq_task}", seed, count)
                         for r in runner.evaluate_baseline(baseline, seq_task, cells)]

            if spec.continual_grid:
                new_traces = oracle_traces(training_instances(spec.continual_grid, count, seed))
                model = runner.train_continual(f"{CONTINUAL}-n{count}-s{seed}", model, new_traces, traces, seed)
                rows += [r.row(spec.name, CONTINUAL, seed, count) for r in runner.evaluate(model, spec.eval_grid)]

    write_results(root / RESULTS_FILE, rows)
    (root / SUMMARY_FILE).write_text(summarize(read_rows(root / RESULTS_FILE)), encoding="utf-8")
    logger.info("Wrote %d result rows to %s", len(rows), root / RESULTS_FILE)
    return root


def summarize(rows: Sequence[dict[str, str]]) -> str:
    """Best accuracy over seeds for every (model, examples, task, size), as an aligned text table."""
    best: dict[tuple[str, str, str, int], list[float]] = {}
    for row in rows:
        key = (row["model"], row["examples"], row["task"], int(row["size"]))
        best.setdefault(key, []).append(float(row["accuracy"]))
    table = [("model", "examples", "task", "size", "best accuracy", "seeds")]
    for (model, examples, task, size), values in sorted(best.items(), key=lambda item: _sort_key(item[0])):
        table.append((model, examples, task, str(size), f"{100 * max(values):.1f}", str(len(values))))
    widths = [max(len(line[i]) for line in table) for i in range(len(table[0]))]
    lines = ["  ".join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip() for line in table]
    lines += _continual_check(rows)
    return "\n".join(lines) + "\n"


def _sort_key(key: tuple[str, str, str, int]) -> tuple[str, int, str, int]:
    model, examples, task, size = key
    return model, int(examples or 0), task, size


def _continual_check(rows: Sequence[dict[str, str]]) -> list[str]:
    """Compare accuracies on old tasks before and after programs were learned on the frozen core."""
    before = {(r["seed"], r["examples"], r["task"], r["size"]): r["accuracy"] for r in rows if r["model"] == NPI}
    after = {(r["seed"], r["examples"], r["task"], r["size"]): r["accuracy"]
             for r in rows if r["model"] == CONTINUAL}
    if not after:
        return []
    changed = sorted(key for key in before if key in after and before[key] != after[key])
    if not changed:
        return ["", "Accuracy on previously learned tasks is unchanged after fixed-core training."]
    return ["", "Accuracy changed after fixed-core training for: "
            + ", ".join(f"{task} size {size} (seed {seed})" for seed, _, task, size in changed)]
