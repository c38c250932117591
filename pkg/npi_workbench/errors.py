"""Exceptions raised across the workbench."""


class NpiError(Exception):
    """Base class for every error this package raises on purpose."""


class ConfigurationError(NpiError):
    """Dimensions, memory contents or config files do not fit together."""


class RegistrationError(NpiError):
    """A program with the same name already exists for that environment."""


class InputError(NpiError):
    """A task instance could not be parsed or is out of range."""


class ActionError(NpiError):
    """An environment rejected the arguments of an ACT call."""

    def __init__(self, env: str, args: tuple[int, int, int], reason: str):
        super().__init__(f"[{env}] illegal action {args}: {reason}")
        self.env = env
        self.args = args


class TraceFormatError(NpiError):
    """A trace file line could not be parsed. Carries the 1-based line number."""

    def __init__(self, line_number: int, reason: str):
        super().__init__(f"line {line_number}: {reason}")
        self.line_number = line_number


class TraceDataError(NpiError):
    """A trace does not nest, or refers to a program the model does not know."""


class CheckpointError(NpiError):
    """A checkpoint is corrupt, truncated or written by another format version."""


class TrainingError(NpiError):
    """Training produced non-finite values and was aborted."""


class GradientLeakError(AssertionError):
    """A parameter that was supposed to stay frozen changed."""


class UsageError(NpiError):
    """The command line was used incorrectly."""
