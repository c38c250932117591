from __future__ import annotations

from dataclasses import dataclass
import logging
from typing import Iterable
import numpy as np

from npi_workbench import constants
from npi_workbench.environments import ENVIRONMENTS, environment_class
from npi_workbench.errors import ConfigurationError
from npi_workbench.model.config import ModelConfig
from npi_workbench.model.memory import EMBEDDINGS, KEYS, ProgramMemory
from npi_workbench.nn.layers import (Mlp2Cache, affine_backward, affine_forward, init_affine, init_mlp2,
                                     mlp2_backward, mlp2_forward)
from npi_workbench.nn.losses import sigmoid
from npi_workbench.nn.lstm import LstmState, LstmStepCache, init_lstm_stack, lstm_stack_backward, lstm_stack_forward
from npi_workbench.nn.params import ParamStore, check_width
from npi_workbench.programs import CORE_PROGRAMS, ProgramSpec

"""The shared core: state encoders, input fusion, stacked LSTM and output heads.

Parameter blocks:
    mem.key, mem.prog           program memory rows
    enc.<env>.l1/l2             per-environment state encoder
    fuse.l1/l2                  MLP over [state encoding; program embedding]
    lstm.<layer>                LSTM stack
    head.end, head.key, head.arg0..2
"""

logger = logging.getLogger(__name__)

LSTM = "lstm"
FUSE = "fuse"
END_HEAD = "head.end"
KEY_HEAD = "head.key"
ARG_HEADS = tuple(f"head.arg{slot}" for slot in range(constants.ARGUMENT_SLOTS))


def encoder_prefix(env: str) -> str:
    return f"enc.{env}"


@dataclass(frozen=True)
class StepOutput:
    end_logit: float
    key: np.ndarray
    arg_logits: tuple[np.ndarray, ...]

    @property
    def r(self) -> float:
        """End probability."""
        return float(sigmoid(np.float64(self.end_logit)))

    def args(self) -> tuple[int, int, int]:
        a, b, c = (int(np.argmax(logits)) for logits in self.arg_logits)
        return (a, b, c)


@dataclass
class StepCache:
    env: str
    program_row: int
    encoder: Mlp2Cache
    fuse: Mlp2Cache
    lstm: LstmStepCache
    h_top: np.ndarray
    output: StepOutput


class NpiModel:
    """Parameters plus program memory. All programs run through the same weights."""

    def __init__(self, config: ModelConfig, params: ParamStore, registry: Iterable[ProgramSpec]):
        self.config = config
        self.params = params
        self.memory = ProgramMemory(params, registry)

    @staticmethod
    def create(config: ModelConfig | None = None, programs: Iterable[ProgramSpec] = CORE_PROGRAMS,
               envs: Iterable[str] | None = None) -> NpiModel:
        config = config or ModelConfig()
        rng = np.random.default_rng(config.seed)
        params = ParamStore()
        programs = list(programs)
        ProgramMemory.create(params, programs, config.program_key_size, config.program_embedding_size, rng)
        for tag in envs if envs is not None else sorted(ENVIRONMENTS):
            init_mlp2(params, encoder_prefix(tag), environment_class(tag).feature_width,
                      config.mlp_hidden_size, config.state_encoding_size, rng)
        init_mlp2(params, FUSE, config.state_encoding_size + config.program_embedding_size,
                  config.mlp_hidden_size, config.core_input_size, rng)
        init_lstm_stack(params, LSTM, config.core_input_size, config.lstm_size, config.lstm_layers, rng,
                        config.forget_bias)
        init_affine(params, END_HEAD, config.lstm_size, 1, rng)
        init_affine(params, KEY_HEAD, config.lstm_size, config.program_key_size, rng)
        for head in ARG_HEADS:
            init_affine(params, head, config.lstm_size, config.argument_vocab, rng)
        logger.info("Created model with %d programs and %d parameters", len(programs), params.parameter_count())
        return NpiModel(config, params, programs)

    def zero_state(self) -> LstmState:
        return LstmState.zeros(self.config.lstm_layers, self.config.lstm_size)

    def encode(self, env: str, features: np.ndarray) -> tuple[np.ndarray, Mlp2Cache]:
        """State encoding s = f_enc(e, a) for one environment family."""
        prefix = encoder_prefix(env)
        if f"{prefix}.l1.w" not in self.params:
            raise ConfigurationError(f"model has no encoder for environment {env!r}")
        return mlp2_forward(features, self.params, prefix)

    def fuse_inputs(self, s: np.ndarray, p: np.ndarray) -> tuple[np.ndarray, Mlp2Cache]:
        check_width("state encoding", self.config.state_encoding_size, s.shape[0])
        check_width("program embedding", self.config.program_embedding_size, p.shape[0])
        return mlp2_forward(np.concatenate([s, p]), self.params, FUSE)

    def core_step(self, s: np.ndarray, p: np.ndarray,
                  state: LstmState) -> tuple[StepOutput, LstmState, Mlp2Cache, LstmStepCache, np.ndarray]:
        x, fuse_cache = self.fuse_inputs(s, p)
        h_top, state, lstm_cache = lstm_stack_forward(x, state, self.params, LSTM)
        output = StepOutput(
            end_logit=float(affine_forward(h_top, self.params, END_HEAD)[0]),
            key=affine_forward(h_top, self.params, KEY_HEAD),
            arg_logits=tuple(affine_forward(h_top, self.params, head) for head in ARG_HEADS),
        )
        return output, state, fuse_cache, lstm_cache, h_top

    def step(self, env: str, features: np.ndarray, program_row: int,
             state: LstmState) -> tuple[StepOutput, LstmState, StepCache]:
        """Encode, fuse and advance the core by one time step."""
        s, encoder_cache = self.encode(env, features)
        output, state, fuse_cache, lstm_cache, h_top = self.core_step(s, self.memory.embedding(program_row), state)
        return output, state, StepCache(env, program_row, encoder_cache, fuse_cache, lstm_cache, h_top, output)

    def program_scores(self, key: np.ndarray) -> np.ndarray:
        return self.memory.keys @ key

    def backward_step(self, cache: StepCache, d_end: float, d_scores: np.ndarray | None,
                      d_arg_logits: list[np.ndarray], dh_next: list[np.ndarray], dc_next: list[np.ndarray],
                      grads: ParamStore) -> tuple[list[np.ndarray], list[np.ndarray]]:
        """Backpropagate one step's head gradients into `grads`.

        Args:
          d_scores: gradient of the program-score vector, or None on steps where
            the program head is not supervised.
          dh_next, dc_next: state gradients arriving from the following step.

        Return:
          State gradients for the previous step of the same invocation.
        """
        h = cache.h_top
        dh = affine_backward(np.array([d_end]), h, self.params, grads, END_HEAD)
        if d_scores is not None:
            key = cache.output.key
            grads[KEYS] += np.outer(d_scores, key)
            dh = dh + affine_backward(self.memory.keys.T @ d_scores, h, self.params, grads, KEY_HEAD)
        for head, d_logits in zip(ARG_HEADS, d_arg_logits):
            dh = dh + affine_backward(d_logits, h, self.params, grads, head)

        dx, dh_prev, dc_prev = lstm_stack_backward(dh, dh_next, dc_next, cache.lstm, self.params, grads, LSTM)
        dsp = mlp2_backward(dx, cache.fuse, self.params, grads, FUSE)
        d_state = dsp[:self.config.state_encoding_size]
        grads[EMBEDDINGS][cache.program_row] += dsp[self.config.state_encoding_size:]
        mlp2_backward(d_state, cache.encoder, self.params, grads, encoder_prefix(cache.env))
        return dh_prev, dc_prev
