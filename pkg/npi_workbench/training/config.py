from dataclasses import dataclass

from npi_workbench import constants
from npi_workbench.config import JsonConfig
from npi_workbench.errors import ConfigurationError


@dataclass(frozen=True)
class TrainConfig(JsonConfig):
    learning_rate: float = constants.LEARNING_RATE
    lr_decay: float = constants.LR_DECAY
    lr_decay_interval: int = constants.LR_DECAY_INTERVAL
    batch_size: int = constants.BATCH_SIZE
    curriculum_temperature: float = constants.CURRICULUM_TEMPERATURE
    reestimate_interval: int = constants.REESTIMATE_INTERVAL
    # Weights of the program, argument and end heads in the summed loss.
    loss_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    max_steps: int = constants.MAX_TRAIN_STEPS
    seed: int = 0
    log_interval: int = constants.LOG_INTERVAL
    checkpoint_interval: int = constants.CHECKPOINT_INTERVAL
    heldout_per_program: int = constants.HELDOUT_PER_PROGRAM
    early_stop_error: float = constants.EARLY_STOP_ERROR
    replay_ratio: float = constants.REPLAY_RATIO
    clip_norm: float = constants.CLIP_NORM

    def __post_init__(self) -> None:
        for name in ("batch_size", "reestimate_interval", "lr_decay_interval", "log_interval",
                     "checkpoint_interval", "heldout_per_program"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be positive, got {getattr(self, name)}")
        if len(self.loss_weights) != 3:
            raise ConfigurationError("loss_weights needs one weight per head: program, args, end")
        if not 0.0 <= self.replay_ratio < 1.0:
            raise ConfigurationError(f"replay_ratio must lie in [0, 1), got {self.replay_ratio}")
