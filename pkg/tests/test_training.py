from dataclasses import replace

import numpy as np
import pytest

from npi_workbench import constants
from npi_workbench.csvlog import CsvLog, read_rows
from npi_workbench.errors import ConfigurationError, GradientLeakError, TraceDataError, TrainingError
from npi_workbench.model import NpiModel, load_checkpoint, toy_config
from npi_workbench.model.checkpoint import checkpoint_bytes
from npi_workbench.model.memory import EMBEDDINGS, KEYS
from npi_workbench.oracles import oracle_add, oracle_bubblesort, oracle_goto, oracle_max
from npi_workbench.programs import MAX_PROGRAMS
from npi_workbench.training import (CurriculumState, TrainConfig, curriculum_distribution, curriculum_sample,
                                    estimate_errors, segment_loss, segments_by_program, step_errors, step_loss,
                                    train, train_fixed_core)
from npi_workbench.training.fixed_core import frozen_checksums, verify_frozen
from npi_workbench.training.loss import segments_loss
from npi_workbench.training.trainer import BASE_METRICS, heldout_segments, metrics_fields

QUICK = TrainConfig(learning_rate=0.01, max_steps=20, reestimate_interval=10, log_interval=5,
                    checkpoint_interval=10, heldout_per_program=2)


def test_trace_loss_is_the_sum_of_segment_losses(toy_model):
    trace = oracle_add(58, 67)
    total, terms, _ = step_loss(toy_model, trace)
    by_segment = sum(segment_loss(toy_model, s.env, s.steps).total() for s in trace.segments())
    assert total == pytest.approx(by_segment)
    assert terms.steps == len(trace.steps)
    assert terms.call_steps == sum(step.next_program is not None for step in trace.steps)


def test_loss_weights_scale_heads(toy_model):
    trace = oracle_bubblesort([2, 1])
    _, terms, _ = step_loss(toy_model, trace)
    weighted, _, _ = step_loss(toy_model, trace, (2.0, 0.0, 1.0))
    assert weighted == pytest.approx(2.0 * terms.program + terms.end)


def test_zero_model_predicts_uniformly(toy_model):
    for name in toy_model.params:
        toy_model.params[name][...] = 0.0
    _, terms, _ = step_loss(toy_model, oracle_add(58, 67))
    assert terms.program == pytest.approx(terms.call_steps * np.log(len(toy_model.memory)))
    assert terms.args == pytest.approx(terms.steps * constants.ARGUMENT_SLOTS * np.log(constants.ARGUMENT_VOCAB))
    assert terms.end == pytest.approx(terms.steps * np.log(2.0))


def test_curriculum_distribution():
    assert np.allclose(curriculum_distribution(np.ones(4), 1.0), 0.25)
    sharp = curriculum_distribution(np.array([0.1, 0.5, 0.5]), 0.0)
    assert np.allclose(sharp, [0.0, 0.5, 0.5])
    cold = curriculum_distribution(np.array([0.0, 1.0]), 0.1)
    assert cold[1] > 0.99


def test_curriculum_favours_high_error_programs(rng):
    state = CurriculumState(["add/ADD", "add/CARRY"], temperature=0.2)
    state.update({"add/CARRY": 1.0, "add/ADD": 0.0})
    draws = [curriculum_sample(state, rng) for _ in range(200)]
    assert draws.count("add/CARRY") > 150
    assert state.error_of("add/ADD") == 0.0


def test_error_estimates_are_fractions(toy_model):
    pool = segments_by_program([oracle_add(5, 7), oracle_add(19, 3)])
    errors = estimate_errors(toy_model, pool)
    assert set(errors) == set(pool)
    assert all(0.0 <= value <= 1.0 for value in errors.values())
    segment = pool["add/CARRY"][0]
    assert len(step_errors(toy_model, segment)) == len(segment.steps)


def test_heldout_segments_come_from_fresh_traces():
    traces = [oracle_add(5, 7), oracle_add(38, 4), oracle_add(19, 3)]
    pool = segments_by_program(traces)
    config = TrainConfig()
    heldout = heldout_segments(pool, traces, None, config)
    assert set(heldout) == set(pool)
    training = {id(segment) for segments in pool.values() for segment in segments}
    training_steps = {segment.steps for segments in pool.values() for segment in segments if segment.program == "ADD"}
    for key, segments in heldout.items():
        assert len(segments) == config.heldout_per_program, key
        assert not any(id(segment) in training for segment in segments)
    assert not any(segment.steps in training_steps for segment in heldout["add/ADD"])
    again = heldout_segments(pool, traces, None, config)
    assert [s.steps for s in again["add/ADD"]] == [s.steps for s in heldout["add/ADD"]]


def test_heldout_falls_back_to_training_segments_without_a_sampler():
    traces = [replace(oracle_add(5, 7), task="scratch")]
    pool = segments_by_program(traces)
    heldout = heldout_segments(pool, traces, None, QUICK)
    assert set(heldout) == set(pool)
    training = {id(segment) for segments in pool.values() for segment in segments}
    assert all(id(segment) in training for segments in heldout.values() for segment in segments)


def test_training_reduces_loss_on_its_data():
    model = NpiModel.create(toy_config(seed=1))
    traces = [oracle_add(5, 7), oracle_add(38, 4)]
    segments = [s for trace in traces for s in trace.segments()]
    before = segments_loss(model, segments).total()
    train(model, traces, QUICK.updated(max_steps=150), show_progress=False)
    assert segments_loss(model, segments).total() < before


def test_train_writes_metrics_and_checkpoint(tmp_path):
    model = NpiModel.create(toy_config(seed=2))
    result = train(model, [oracle_add(5, 7), oracle_goto((2, 1), (0, 1))], QUICK, out_dir=tmp_path,
                   show_progress=False)
    assert result.steps == 20 and not result.stopped_early
    rows = read_rows(tmp_path / "metrics.csv")
    assert list(rows[0]) == metrics_fields(model)
    assert list(rows[0])[:len(BASE_METRICS)] == BASE_METRICS
    assert [row["step"] for row in rows] == ["5", "10", "15", "20"]
    assert rows[1]["err:add/ADD"] != "" and rows[0]["err:add/ADD"] == ""
    assert rows[0]["err:sort/BUBBLESORT"] == ""
    loaded = load_checkpoint(tmp_path / "model.ckpt")
    assert loaded.optimizer.step == 20
    assert checkpoint_bytes(loaded.model) == checkpoint_bytes(model)


def test_resumed_training_continues_the_metrics_log(tmp_path):
    traces = [oracle_add(5, 7), oracle_add(38, 4)]
    model = NpiModel.create(toy_config(seed=2))
    train(model, traces, QUICK.updated(max_steps=10), out_dir=tmp_path, show_progress=False)
    # A row logged after the last checkpoint, as left by a run that died at step 15.
    with CsvLog(tmp_path / "metrics.csv", metrics_fields(model), append=True) as log:
        log.write({"schema_version": constants.CSV_SCHEMA_VERSION, "step": 15})

    checkpoint = load_checkpoint(tmp_path / "model.ckpt")
    assert checkpoint.optimizer.step == 10
    result = train(checkpoint.model, traces, QUICK.updated(max_steps=10), checkpoint.optimizer, out_dir=tmp_path,
                   show_progress=False)
    assert result.steps == 10
    assert load_checkpoint(tmp_path / "model.ckpt").optimizer.step == 20
    rows = read_rows(tmp_path / "metrics.csv")
    assert [row["step"] for row in rows] == ["5", "10", "15", "20"]
    assert rows[2]["loss_total"] != ""
    assert rows[2]["err:add/ADD"] != ""


def test_training_is_deterministic(tmp_path):
    traces = [oracle_bubblesort([3, 1, 2])]
    blobs, logs = [], []
    for run in ("a", "b"):
        model = NpiModel.create(toy_config(seed=4))
        result = train(model, traces, QUICK, out_dir=tmp_path / run, show_progress=False)
        blobs.append(checkpoint_bytes(model, result.optimizer))
        logs.append((tmp_path / run / "metrics.csv").read_bytes())
    assert blobs[0] == blobs[1]
    assert logs[0] == logs[1]
    assert len(read_rows(tmp_path / "a" / "metrics.csv")) == 4


def test_train_rejects_unregistered_programs(toy_model):
    with pytest.raises(TraceDataError):
        train(toy_model, [oracle_max([2, 1])], QUICK, show_progress=False)
    with pytest.raises(ConfigurationError):
        train(toy_model, [], QUICK, show_progress=False)


def test_non_finite_loss_aborts(toy_model):
    toy_model.params["head.end.b"][:] = np.nan
    with pytest.raises(TrainingError):
        train(toy_model, [oracle_add(1, 2)], QUICK, show_progress=False)


def test_train_config_validation(tmp_path):
    with pytest.raises(ConfigurationError):
        TrainConfig(batch_size=0)
    with pytest.raises(ConfigurationError):
        TrainConfig(replay_ratio=1.0)
    with pytest.raises(ConfigurationError):
        TrainConfig.from_dict({"learning_rate": 0.1, "momentum": 0.9})
    path = tmp_path / "train.json"
    QUICK.save(path)
    assert TrainConfig.load(path) == QUICK
    assert QUICK.updated(seed=None, max_steps=3) == TrainConfig.from_dict({**QUICK.to_dict(), "max_steps": 3})


def _with_max_programs(seed: int) -> NpiModel:
    model = NpiModel.create(toy_config(seed=seed))
    rng = np.random.default_rng(seed)
    for spec in MAX_PROGRAMS:
        model.memory.add_program(spec.name, spec.env, rng)
    return model


def test_fixed_core_training_touches_only_new_memory_rows(tmp_path):
    model = _with_max_programs(5)
    before = model.params.copy()
    replay = [oracle_add(5, 7), oracle_bubblesort([2, 1])]
    result = train_fixed_core(model, MAX_PROGRAMS, [oracle_max([3, 1, 2]), oracle_max([1, 2])], replay, QUICK,
                              out_dir=tmp_path, show_progress=False)
    assert result is not None and result.steps > 0
    for name in model.params:
        if name in (KEYS, EMBEDDINGS):
            assert np.array_equal(model.params[name][:21], before[name][:21])
            assert not np.array_equal(model.params[name][21:], before[name][21:])
        else:
            assert np.array_equal(model.params[name], before[name]), name


def test_fixed_core_requires_registered_trailing_rows():
    model = NpiModel.create(toy_config())
    with pytest.raises(ConfigurationError):
        train_fixed_core(model, MAX_PROGRAMS, [oracle_max([2, 1])], config=QUICK, show_progress=False)
    model = _with_max_programs(0)
    before = model.params.copy()
    assert train_fixed_core(model, MAX_PROGRAMS, [oracle_add(1, 1)], config=QUICK, show_progress=False) is None
    assert train_fixed_core(model, MAX_PROGRAMS, [], config=QUICK, show_progress=False) is None
    for name, value in before.items():
        assert np.array_equal(model.params[name], value), name


def test_frozen_checksums_detect_leaks():
    model = _with_max_programs(0)
    before = frozen_checksums(model.params, 21)
    model.params[KEYS][22] += 1.0
    verify_frozen(model.params, 21, before)
    model.params[KEYS][3] += 1.0
    with pytest.raises(GradientLeakError):
        verify_frozen(model.params, 21, before)
