"""Trace-supervised training, the adaptive curriculum and fixed-core learning."""

from npi_workbench.training.config import TrainConfig
from npi_workbench.training.curriculum import (CurriculumState, curriculum_distribution, curriculum_sample,
                                               estimate_errors, step_errors)
from npi_workbench.training.fixed_core import train_fixed_core
from npi_workbench.training.loss import LossTerms, segment_loss, step_loss
from npi_workbench.training.trainer import TrainResult, segments_by_program, train

__all__ = [
    "TrainConfig",
    "CurriculumState", "curriculum_distribution", "curriculum_sample", "estimate_errors", "step_errors",
    "train_fixed_core",
    "LossTerms", "segment_loss", "step_loss",
    "TrainResult", "segments_by_program", "train",
]
