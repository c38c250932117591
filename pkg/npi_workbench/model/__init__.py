"""The programmer-interpreter network and its inference loop."""

from npi_workbench.model.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from npi_workbench.model.config import ModelConfig, toy_config
from npi_workbench.model.core import NpiModel, StepOutput
from npi_workbench.model.interpreter import ExecutionResult, HaltReason, run
from npi_workbench.model.memory import ProgramMemory, program_lookup

__all__ = [
    "Checkpoint", "load_checkpoint", "save_checkpoint",
    "ModelConfig", "toy_config",
    "NpiModel", "StepOutput",
    "ExecutionResult", "HaltReason", "run",
    "ProgramMemory", "program_lookup",
]
