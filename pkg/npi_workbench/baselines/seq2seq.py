from __future__ import annotations

from contextlib import ExitStack
from dataclasses import dataclass
import logging
from pathlib import Path
from typing import Sequence
import numpy as np
from tqdm import tqdm

from npi_workbench import constants
from npi_workbench.baselines.formats import END, GO, VOCAB_SIZE, SeqPair
from npi_workbench.config import JsonConfig
from npi_workbench.csvlog import CsvLog
from npi_workbench.errors import CheckpointError, ConfigurationError, TrainingError
from npi_workbench.model.checkpoint import container_bytes, decode_container, read_file, write_atomically
from npi_workbench.nn.adam import AdamState, adam_step, clip_global_norm
from npi_workbench.nn.layers import affine_backward, affine_forward, init_affine
from npi_workbench.nn.losses import softmax_xent
from npi_workbench.nn.lstm import (LstmState, LstmStepCache, init_lstm_stack, lstm_stack_backward,
                                   lstm_stack_forward, zero_state_grads)
from npi_workbench.nn.params import ParamStore
from npi_workbench.training.config import TrainConfig

"""Flat LSTM baselines on the shared kernel.

Encoder-decoder models read the whole input, then decode greedily from the
encoder's final state, starting from GO and feeding back their own output.
Aligned models (stacked and easy addition) emit one token per input position
from the encoder alone.
"""

logger = logging.getLogger(__name__)

SEQ2SEQ_KIND = "seq2seq"
ENCODER = "enc"
DECODER = "dec"
PROJECTION = "proj"
INPUT_EMBEDDING = "emb.in"
OUTPUT_EMBEDDING = "emb.out"


@dataclass(frozen=True)
class Seq2SeqConfig(JsonConfig):
    layers: int = constants.LSTM_LAYERS
    size: int = constants.LSTM_SIZE
    embedding_size: int = 32
    channels: int = 1
    aligned: bool = False
    seed: int = 0


@dataclass
class _EncoderStep:
    tokens: tuple[int, ...]
    lstm: LstmStepCache
    h: np.ndarray


@dataclass
class _DecoderStep:
    previous: int
    lstm: LstmStepCache
    h: np.ndarray


class Seq2SeqModel:
    def __init__(self, config: Seq2SeqConfig, params: ParamStore):
        self.config = config
        self.params = params

    @staticmethod
    def create(config: Seq2SeqConfig = Seq2SeqConfig()) -> Seq2SeqModel:
        rng = np.random.default_rng(config.seed)
        params = ParamStore()
        params.init_uniform(INPUT_EMBEDDING, (VOCAB_SIZE, config.embedding_size), rng)
        init_lstm_stack(params, ENCODER, config.channels * config.embedding_size, config.size, config.layers, rng,
                        constants.FORGET_BIAS)
        if not config.aligned:
            params.init_uniform(OUTPUT_EMBEDDING, (VOCAB_SIZE, config.embedding_size), rng)
            init_lstm_stack(params, DECODER, config.embedding_size, config.size, config.layers, rng,
                            constants.FORGET_BIAS)
        init_affine(params, PROJECTION, config.size, VOCAB_SIZE, rng)
        return Seq2SeqModel(config, params)

    def _zero_state(self) -> LstmState:
        return LstmState.zeros(self.config.layers, self.config.size)

    def _embed(self, tokens: tuple[int, ...]) -> np.ndarray:
        if len(tokens) != self.config.channels:
            raise ConfigurationError(f"model reads {self.config.channels} channel(s), got {len(tokens)}")
        return np.concatenate([self.params[INPUT_EMBEDDING][token] for token in tokens])

    def _encode(self, source: Sequence[tuple[int, ...]]) -> tuple[list[_EncoderStep], LstmState]:
        state = self._zero_state()
        steps = []
        for tokens in source:
            h, state, cache = lstm_stack_forward(self._embed(tokens), state, self.params, ENCODER)
            steps.append(_EncoderStep(tokens, cache, h))
        return steps, state

    def _decode_step(self, previous: int, state: LstmState) -> tuple[np.ndarray, LstmState, _DecoderStep]:
        h, state, cache = lstm_stack_forward(self.params[OUTPUT_EMBEDDING][previous], state, self.params, DECODER)
        return affine_forward(h, self.params, PROJECTION), state, _DecoderStep(previous, cache, h)

    def loss(self, pair: SeqPair, grads: ParamStore | None = None) -> float:
        """Teacher-forced cross-entropy summed over output tokens; accumulates gradients when given."""
        encoded, state = self._encode(pair.source)
        total = 0.0
        if self.config.aligned:
            d_logits = []
            for step, target in zip(encoded, pair.target):
                loss, d = softmax_xent(affine_forward(step.h, self.params, PROJECTION), target)
                total += loss
                d_logits.append(d)
            if grads is not None:
                self._backward_encoder(encoded, d_logits, None, None, grads)
            return total

        decoded: list[_DecoderStep] = []
        d_logits = []
        previous = GO
        for target in pair.target:
            logits, state, step = self._decode_step(previous, state)
            loss, d = softmax_xent(logits, target)
            total += loss
            decoded.append(step)
            d_logits.append(d)
            previous = target
        if grads is not None:
            dh_next, dc_next = zero_state_grads(state)
            for step, d in zip(reversed(decoded), reversed(d_logits)):
                dh = affine_backward(d, step.h, self.params, grads, PROJECTION)
                dy, dh_next, dc_next = lstm_stack_backward(dh, dh_next, dc_next, step.lstm, self.params, grads,
                                                           DECODER)
                grads[OUTPUT_EMBEDDING][step.previous] += dy
            self._backward_encoder(encoded, None, dh_next, dc_next, grads)
        return total

    def _backward_encoder(self, encoded: list[_EncoderStep], d_logits: list[np.ndarray] | None,
                          dh_next: list[np.ndarray] | None, dc_next: list[np.ndarray] | None,
                          grads: ParamStore) -> None:
        if dh_next is None or dc_next is None:
            dh_next, dc_next = zero_state_grads(self._zero_state())
        width = self.config.embedding_size
        for index in reversed(range(len(encoded))):
            step = encoded[index]
            if d_logits is not None and index < len(d_logits):
                dh = affine_backward(d_logits[index], step.h, self.params, grads, PROJECTION)
            else:
                dh = np.zeros(self.config.size)
            dx, dh_next, dc_next = lstm_stack_backward(dh, dh_next, dc_next, step.lstm, self.params, grads, ENCODER)
            for channel, token in enumerate(step.tokens):
                grads[INPUT_EMBEDDING][token] += dx[channel * width:(channel + 1) * width]

    def predict(self, source: Sequence[tuple[int, ...]], max_length: int | None = None) -> tuple[int, ...]:
        """Greedy output. Encoder-decoder output stops after END or `max_length` tokens."""
        encoded, state = self._encode(source)
        if self.config.aligned:
            return tuple(int(np.argmax(affine_forward(step.h, self.params, PROJECTION))) for step in encoded)
        limit = max_length if max_length is not None else 2 * len(source) + 2
        output: list[int] = []
        previous = GO
        while len(output) < limit:
            logits, state, _ = self._decode_step(previous, state)
            previous = int(np.argmax(logits))
            output.append(previous)
            if previous == END:
                break
        return tuple(output)


def s2s_loss_and_grads(model: Seq2SeqModel, pairs: Sequence[SeqPair]) -> tuple[float, ParamStore]:
    grads = model.params.zeros_like()
    total = sum(model.loss(pair, grads) for pair in pairs)
    return total, grads


@dataclass
class Seq2SeqTrainResult:
    model: Seq2SeqModel
    optimizer: AdamState
    steps: int
    last_loss: float


def s2s_train(model: Seq2SeqModel, pairs: Sequence[SeqPair], config: TrainConfig = TrainConfig(),
              out_dir: str | Path | None = None, show_progress: bool = True) -> Seq2SeqTrainResult:
    """Teacher-forced training with the same optimizer settings as the interpreter."""
    if not pairs:
        raise ConfigurationError("no sequence examples to train on")
    rng = np.random.default_rng(config.seed)
    optimizer = AdamState.create(model.params, config.learning_rate, config.lr_decay, config.lr_decay_interval)
    window = 0.0
    window_steps = 0
    loss = 0.0
    step = 0
    with ExitStack() as stack:
        metrics = None
        if out_dir is not None:
            metrics = stack.enter_context(CsvLog(Path(out_dir) / "metrics.csv", ["schema_version", "step", "lr", "loss"]))
        for step in tqdm(range(1, config.max_steps + 1), desc="seq2seq", disable=not show_progress):
            lr = optimizer.effective_learning_rate()
            batch = [pairs[int(i)] for i in rng.integers(len(pairs), size=config.batch_size)]
            loss, grads = s2s_loss_and_grads(model, batch)
            if not np.isfinite(loss):
                logger.error("Non-finite seq2seq loss at step %d", step)
                raise TrainingError(f"non-finite loss at step {step}")
            if config.batch_size > 1:
                grads.scale(1.0 / config.batch_size)
            clip_global_norm(grads, config.clip_norm)
            adam_step(model.params, grads, optimizer)
            window += loss / config.batch_size
            window_steps += 1
            if metrics is not None and step % config.log_interval == 0:
                metrics.write({"schema_version": constants.CSV_SCHEMA_VERSION, "step": step, "lr": lr,
                               "loss": window / window_steps})
                window, window_steps = 0.0, 0
    if out_dir is not None:
        save_seq2seq(model, Path(out_dir) / "model.ckpt", optimizer)
    return Seq2SeqTrainResult(model, optimizer, step, loss)


def sequence_correct(model: Seq2SeqModel, pair: SeqPair) -> bool:
    return model.predict(pair.source, max_length=len(pair.target)) == pair.target


def s2s_eval(model: Seq2SeqModel, pairs: Sequence[SeqPair]) -> float:
    """Per-sequence accuracy: a sequence counts only if every emitted token matches."""
    if not pairs:
        return 0.0
    return sum(sequence_correct(model, pair) for pair in pairs) / len(pairs)


def save_seq2seq(model: Seq2SeqModel, path: str | Path, optimizer: AdamState | None = None) -> None:
    write_atomically(path, container_bytes({"kind": SEQ2SEQ_KIND, "config": model.config.to_dict()},
                                           model.params, optimizer))


def load_seq2seq(path: str | Path) -> Seq2SeqModel:
    container = decode_container(read_file(path), SEQ2SEQ_KIND, str(path))
    try:
        config = Seq2SeqConfig.from_dict(container.header["config"])
    except (KeyError, ConfigurationError) as e:
        raise CheckpointError(f"{path}: inconsistent checkpoint: {e}") from None
    return Seq2SeqModel(config, container.params)
