from dataclasses import dataclass

from npi_workbench import constants
from npi_workbench.config import JsonConfig


@dataclass(frozen=True)
class ModelConfig(JsonConfig):
    """Network dimensions. M = lstm_size, P = program_embedding_size, K = program_key_size,
    D = state_encoding_size, A = argument_vocab."""
    lstm_layers: int = constants.LSTM_LAYERS
    lstm_size: int = constants.LSTM_SIZE
    program_embedding_size: int = constants.PROGRAM_EMBEDDING_SIZE
    program_key_size: int = constants.PROGRAM_KEY_SIZE
    state_encoding_size: int = constants.STATE_ENCODING_SIZE
    mlp_hidden_size: int = constants.MLP_HIDDEN_SIZE
    core_input_size: int = constants.CORE_INPUT_SIZE
    argument_vocab: int = constants.ARGUMENT_VOCAB
    forget_bias: float = constants.FORGET_BIAS
    seed: int = 0


def toy_config(size: int = 8, key_size: int = 4, seed: int = 0) -> ModelConfig:
    """Small dimensions for fast experiments and tests."""
    return ModelConfig(lstm_size=size, program_embedding_size=size, program_key_size=key_size,
                       state_encoding_size=size, mlp_hidden_size=size, core_input_size=size, seed=seed)
