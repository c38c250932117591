from typing import Final

"""Default dimensions, budgets and schedules."""

# Core network
LSTM_LAYERS: Final[int] = 2
LSTM_SIZE: Final[int] = 256
PROGRAM_EMBEDDING_SIZE: Final[int] = 64
PROGRAM_KEY_SIZE: Final[int] = 8
STATE_ENCODING_SIZE: Final[int] = 128
MLP_HIDDEN_SIZE: Final[int] = 128
CORE_INPUT_SIZE: Final[int] = 128

# Arguments: values 0-9, one reserved selector value, DEFAULT
ARGUMENT_VOCAB: Final[int] = 12
ARGUMENT_SLOTS: Final[int] = 3
DEFAULT_ARG: Final[int] = ARGUMENT_VOCAB - 1

# Inference
END_THRESHOLD: Final[float] = 0.5
MAX_DEPTH: Final[int] = 16
MAX_STEPS: Final[int] = 20_000

# Initialization
FORGET_BIAS: Final[float] = 1.0

# Optimizer
LEARNING_RATE: Final[float] = 0.0001
LR_DECAY: Final[float] = 0.95
LR_DECAY_INTERVAL: Final[int] = 10_000
ADAM_BETA1: Final[float] = 0.9
ADAM_BETA2: Final[float] = 0.999
ADAM_EPSILON: Final[float] = 1e-8
CLIP_NORM: Final[float] = 10.0

# Training loop
BATCH_SIZE: Final[int] = 1
CURRICULUM_TEMPERATURE: Final[float] = 1.0
REESTIMATE_INTERVAL: Final[int] = 1000
HELDOUT_PER_PROGRAM: Final[int] = 8
# Sampling rounds per held-out trace wanted before giving up on a program.
HELDOUT_ATTEMPTS: Final[int] = 4
EARLY_STOP_ERROR: Final[float] = 0.01
MAX_TRAIN_STEPS: Final[int] = 200_000
REPLAY_RATIO: Final[float] = 0.5
LOG_INTERVAL: Final[int] = 100
CHECKPOINT_INTERVAL: Final[int] = 10_000

# Pose grid
POSE_GRID: Final[int] = 24
ELEVATION_MIN: Final[int] = 0
ELEVATION_MAX: Final[int] = 4
CANONICAL_AZIMUTH: Final[int] = 0
CANONICAL_ELEVATION: Final[int] = 1

# Result files
CSV_SCHEMA_VERSION: Final[int] = 1
CHECKPOINT_VERSION: Final[int] = 1
TRACE_FORMAT_VERSION: Final[int] = 1

# Experiments
EVAL_INSTANCES: Final[int] = 100
EVAL_SEED: Final[int] = 1_000_003
