from __future__ import annotations

from dataclasses import dataclass

from npi_workbench import constants
from npi_workbench.baselines.formats import SEQ_TASKS
from npi_workbench.config import JsonConfig
from npi_workbench.errors import ConfigurationError
from npi_workbench.model.config import ModelConfig, toy_config
from npi_workbench.oracles.tasks import get_task
from npi_workbench.training.config import TrainConfig

Cell = tuple[str, int]


def _cells(name: str, cells: object) -> tuple[Cell, ...]:
    try:
        normalized = tuple((str(task), int(size)) for task, size in cells)  # type: ignore[attr-defined]
    except (TypeError, ValueError):
        raise ConfigurationError(f"{name} must be a list of [task, size] pairs, got {cells!r}") from None
    for task, _ in normalized:
        get_task(task)
    return normalized


@dataclass(frozen=True)
class ExperimentSpec(JsonConfig):
    """Everything an experiment run depends on. Saved as spec.json next to its results.

    Each (seed, example count) pair trains one interpreter on `examples` traces
    per `train_grid` cell and evaluates it on every `eval_grid` cell of a task it
    knows. Cells are (task, size) pairs; the meaning of size depends on the task.
    """
    name: str
    train_grid: tuple[Cell, ...]
    examples: tuple[int, ...]
    eval_grid: tuple[Cell, ...]
    seeds: tuple[int, ...] = (0,)
    # Sequence baselines trained on the same instances as the interpreter.
    baselines: tuple[str, ...] = ()
    # Also train one interpreter per task on that task's cells alone.
    single_task_models: bool = False
    # Cells for programs learned afterwards on the frozen core.
    continual_grid: tuple[Cell, ...] = ()
    eval_instances: int = constants.EVAL_INSTANCES
    eval_seed: int = constants.EVAL_SEED
    # Interpreter step budget per evaluation instance; None scales it with the oracle trace.
    eval_max_steps: int | None = None
    train_steps: int = constants.MAX_TRAIN_STEPS
    baseline_steps: int = constants.MAX_TRAIN_STEPS
    learning_rate: float = constants.LEARNING_RATE
    # Width of every layer for a scaled-down model; None keeps the full dimensions.
    model_size: int | None = None
    out_dir: str = "experiments"
    workers: int = 1

    def __post_init__(self) -> None:
        for name in ("train_grid", "eval_grid", "continual_grid"):
            object.__setattr__(self, name, _cells(name, getattr(self, name)))
        if not self.examples or any(count < 1 for count in self.examples):
            raise ConfigurationError(f"examples must be positive counts, got {self.examples}")
        if not self.seeds:
            raise ConfigurationError("an experiment needs at least one seed")
        unknown = sorted(set(self.baselines) - set(SEQ_TASKS))
        if unknown:
            raise ConfigurationError(f"unknown baselines {', '.join(unknown)}; choose from {', '.join(SEQ_TASKS)}")
        if self.eval_instances < 1 or self.workers < 1:
            raise ConfigurationError("eval_instances and workers must be positive")

    @property
    def tasks(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(task for task, _ in self.train_grid))

    def model_config(self, seed: int) -> ModelConfig:
        if self.model_size is None:
            return ModelConfig(seed=seed)
        return toy_config(self.model_size, seed=seed)

    def train_config(self, seed: int, max_steps: int | None = None) -> TrainConfig:
        return TrainConfig(max_steps=self.train_steps if max_steps is None else max_steps, seed=seed,
                           learning_rate=self.learning_rate)
