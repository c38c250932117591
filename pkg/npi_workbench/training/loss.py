from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence
import numpy as np

from npi_workbench.environments import environment_class
from npi_workbench.model.core import NpiModel, StepCache
from npi_workbench.nn.losses import sigmoid_bce, softmax_xent
from npi_workbench.nn.lstm import zero_state_grads
from npi_workbench.nn.params import ParamStore
from npi_workbench.oracles.trace import Segment, Trace, TraceStep

"""Teacher-forced negative log-likelihood of execution traces."""

Weights = tuple[float, float, float]
UNWEIGHTED: Weights = (1.0, 1.0, 1.0)


@dataclass
class LossTerms:
    """Summed per-head losses. The program head only counts call steps."""
    program: float = 0.0
    args: float = 0.0
    end: float = 0.0
    steps: int = 0
    call_steps: int = 0

    def total(self, weights: Weights = UNWEIGHTED) -> float:
        return weights[0] * self.program + weights[1] * self.args + weights[2] * self.end

    def add(self, other: LossTerms) -> None:
        self.program += other.program
        self.args += other.args
        self.end += other.end
        self.steps += other.steps
        self.call_steps += other.call_steps


def segment_loss(model: NpiModel, env: str, steps: Sequence[TraceStep], grads: ParamStore | None = None,
                 weights: Weights = UNWEIGHTED) -> LossTerms:
    """Loss of one invocation's steps, starting from zero LSTM state.

    With `grads`, weighted analytic gradients are accumulated into it by
    backpropagation through the invocation's steps.
    """
    memory = model.memory
    features_of = environment_class(env).features
    state = model.zero_state()
    terms = LossTerms()
    caches: list[StepCache] = []
    head_grads: list[tuple[float, np.ndarray | None, list[np.ndarray]]] = []

    for step in steps:
        row = memory.index(env, step.program)
        output, state, cache = model.step(env, features_of(step.observation, step.args), row, state)
        caches.append(cache)
        terms.steps += 1

        end_loss, d_end = sigmoid_bce(output.end_logit, step.ret)
        terms.end += end_loss

        d_scores = None
        if step.next_program is not None:
            target = memory.index(env, step.next_program)
            program_loss, d_scores = softmax_xent(model.program_scores(output.key), target)
            terms.program += program_loss
            terms.call_steps += 1
            d_scores = d_scores * weights[0]

        d_args = []
        for logits, target in zip(output.arg_logits, step.next_args):
            arg_loss, d_logits = softmax_xent(logits, target)
            terms.args += arg_loss
            d_args.append(d_logits * weights[1])
        head_grads.append((d_end * weights[2], d_scores, d_args))

    if grads is not None:
        dh_next, dc_next = zero_state_grads(model.zero_state())
        for cache, (d_end, d_scores, d_args) in zip(reversed(caches), reversed(head_grads)):
            dh_next, dc_next = model.backward_step(cache, d_end, d_scores, d_args, dh_next, dc_next, grads)
    return terms


def segments_loss(model: NpiModel, segments: Sequence[Segment], grads: ParamStore | None = None,
                  weights: Weights = UNWEIGHTED) -> LossTerms:
    terms = LossTerms()
    for segment in segments:
        terms.add(segment_loss(model, segment.env, segment.steps, grads, weights))
    return terms


def step_loss(model: NpiModel, trace: Trace,
              weights: Weights = UNWEIGHTED) -> tuple[float, LossTerms, ParamStore]:
    """Loss and gradients of a whole trace.

    Every invocation restarts from zero state and a caller's state is not
    disturbed by its callees, so the trace loss is the sum of its invocation
    segments' losses.
    """
    grads = model.params.zeros_like()
    terms = segments_loss(model, trace.segments(), grads, weights)
    return terms.total(weights), terms, grads
