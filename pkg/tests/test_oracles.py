from collections import Counter, deque
from dataclasses import replace
from itertools import permutations

import numpy as np
import pytest

from npi_workbench.environments.actions import DEFAULT_ARGS
from npi_workbench.environments.pose import GRID
from npi_workbench.environments.sorting import SWAP_LEFT
from npi_workbench.errors import ConfigurationError, TraceDataError, TraceFormatError
from npi_workbench.oracles import (get_task, oracle_add, oracle_bubblesort, oracle_goto, oracle_max, read_trace_file,
                                   read_traces, segment_steps, subtrace, validate_trace, write_traces)
from npi_workbench.oracles.tasks import CANONICAL_TARGET, START_AZIMUTHS, START_ELEVATIONS, pose_starts
from npi_workbench.oracles.traceio import SeqExample
from npi_workbench.programs import ACT


def _final_env(trace):
    env = get_task(trace.task).make_env(trace.instance)
    for step in trace.steps:
        if step.calls_act:
            env = env.step(step.next_args)
    return env


def test_add_matches_integer_addition(rng):
    pairs = [(a, b) for a in range(0, 40) for b in range(0, 40, 3)]
    pairs += [tuple(int(v) for v in rng.integers(0, 10 ** 6, size=2)) for _ in range(100)]
    for a, b in pairs:
        trace = oracle_add(a, b)
        assert _final_env(trace).output() == str(a + b)


@pytest.mark.slow
def test_add_exhaustive_below_ten_thousand():
    for a in range(0, 10 ** 4, 37):
        for b in range(10 ** 4):
            assert _final_env(oracle_add(a, b)).output() == str(a + b)


def test_add_trace_shape_for_two_digit_example():
    trace = oracle_add(96, 125)
    assert trace.program_sequence()[:12] == [
        "ADD", "ADD1", ACT, "CARRY", ACT, ACT, ACT, "LSHIFT", ACT, ACT, ACT, ACT,
    ]
    assert trace.steps[0].args == DEFAULT_ARGS
    assert trace.steps[-1].ret == 1 and trace.steps[-1].depth == 0


def _check_sort(array):
    trace = oracle_bubblesort(array)
    env = _final_env(trace)
    assert list(env.values) == sorted(array)
    assert Counter(env.values) == Counter(array)
    assert sum(step.next_program == "BUBBLE" for step in trace.steps) == len(array)
    return trace


def test_bubblesort_permutations_of_five_digits():
    for array in permutations([3, 7, 0, 9, 4]):
        _check_sort(list(array))


def test_bubblesort_random_multisets(rng):
    for _ in range(200):
        length = int(rng.integers(1, 21))
        _check_sort([int(v) for v in rng.integers(0, 10, size=length)])


def _bfs_distance(start, target):
    seen = {start: 0}
    queue = deque([start])
    while queue:
        az, el = queue.popleft()
        if (az, el) == target:
            return seen[(az, el)]
        for nxt in (((az - 1) % GRID, el), ((az + 1) % GRID, el), (az, min(el + 1, 4)), (az, max(el - 1, 0))):
            if nxt not in seen:
                seen[nxt] = seen[(az, el)] + 1
                queue.append(nxt)
    raise AssertionError("target unreachable")


def test_goto_takes_shortest_paths_from_every_pose():
    for azimuth in range(GRID):
        for elevation in range(5):
            trace = oracle_goto((azimuth, elevation), CANONICAL_TARGET)
            moves = sum(step.calls_act for step in trace.steps)
            assert moves == _bfs_distance((azimuth, elevation), CANONICAL_TARGET)
            assert _final_env(trace).is_solved()


def test_goto_already_at_target():
    trace = oracle_goto(CANONICAL_TARGET, CANONICAL_TARGET)
    assert trace.program_sequence() == ["GOTO", "HGOTO", "VGOTO"]


def test_max_leaves_pointer_on_maximum():
    trace = oracle_max([4, 9, 1, 7])
    env = _final_env(trace)
    assert trace.task == "max" and trace.env == "sort"
    assert env.at_end(SWAP_LEFT) and env.value_at(SWAP_LEFT) == 9
    assert get_task("max").solved(env)


@pytest.mark.parametrize("trace", [
    oracle_add(96, 125), oracle_add(0, 0), oracle_bubblesort([9, 2, 5]), oracle_bubblesort([1]),
    oracle_goto((21, 4), CANONICAL_TARGET), oracle_max([3, 1, 2]),
])
def test_generated_traces_validate(trace):
    assert validate_trace(trace).ok


def test_corrupted_observation_is_flagged_at_its_step():
    trace = oracle_bubblesort([9, 2, 5])
    bad = 7
    step = trace.steps[bad]
    trace.steps[bad] = replace(step, observation=((step.observation[0] + 1) % 10,) + step.observation[1:])
    result = validate_trace(trace)
    assert not result.ok
    assert result.divergence.step == bad


def test_corrupted_input_args_are_flagged():
    trace = oracle_add(5, 7)
    trace.steps[2] = replace(trace.steps[2], args=(1, 1, 1))
    assert validate_trace(trace).divergence.step == 2


def test_unknown_program_is_flagged():
    trace = oracle_add(5, 7)
    trace.steps[1] = replace(trace.steps[1], next_program="SUBTRACT")
    assert validate_trace(trace).divergence.step == 1


def test_bad_nesting_raises():
    trace = oracle_add(5, 7)
    trace.steps[3] = replace(trace.steps[3], depth=5)
    with pytest.raises(TraceDataError):
        segment_steps(trace)
    assert not validate_trace(trace)


def test_segments_cover_every_step_once():
    trace = oracle_bubblesort([3, 1, 2])
    segments = segment_steps(trace)
    covered = sorted(i for segment in segments for i in segment.indices)
    assert covered == list(range(len(trace.steps)))
    assert segments[0].program == "BUBBLESORT" and segments[0].depth == 0
    assert all(segment.steps[-1].ret == 1 for segment in segments)


def test_subtraces_validate_on_their_own():
    trace = oracle_add(58, 67)
    for segment in segment_steps(trace):
        sub = subtrace(trace, segment)
        assert sub.steps[0].depth == 0
        assert validate_trace(sub).ok


def test_trace_file_round_trip(tmp_path):
    traces = [oracle_add(96, 125), oracle_bubblesort([3, 1, 2]), oracle_goto((2, 3), CANONICAL_TARGET)]
    sequences = [SeqExample("add-easy", "69|521", "122")]
    path = tmp_path / "traces.txt"
    assert write_traces(traces, path, sequences) == 3
    loaded = read_trace_file(path)
    assert loaded.traces == traces
    assert loaded.sequences == sequences


def test_empty_trace_file(tmp_path):
    path = tmp_path / "empty.txt"
    assert write_traces([], path) == 0
    assert read_traces(path) == []


@pytest.mark.parametrize("lines,line_number", [
    (["format\tversion=1", "step\tdepth=0\tprog=ADD\targs=-,-,-\tret=1\tobs=1\tnext=-\tnext_args=-,-,-"], 2),
    (["format\tversion=1", "trace\ttask=add\tenv=add\tinstance=1+1", "bogus\tx=1"], 3),
    (["format\tversion=9"], 1),
    (["format\tversion=1", "trace\ttask=add\tenv=add\tinstance=1+1",
      "step\tdepth=0\tprog=ADD\targs=-,-,-\tret=2\tobs=1\tnext=-\tnext_args=-,-,-"], 3),
    (["format\tversion=1", "trace\ttask=add\tenv=add\tinstance=1+1", "trace\ttask=add\tenv=add\tinstance=2+2"], 2),
    (["format\tversion=1", "trace\ttask=add\tenv=add"], 2),
])
def test_malformed_trace_files_report_line_numbers(tmp_path, lines, line_number):
    path = tmp_path / "bad.txt"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    with pytest.raises(TraceFormatError) as excinfo:
        read_traces(path)
    assert excinfo.value.line_number == line_number


def test_task_samplers(rng):
    assert len(get_task("add").sample(5, rng).split("+")[0]) == 5
    assert len(get_task("sort").sample(7, rng).split(",")) == 7
    for distance in range(0, 4):
        state = get_task("pose").make_env(get_task("pose").sample(distance, rng))
        assert state.distance() == distance
    assert len(pose_starts()) == len(START_AZIMUTHS) * len(START_ELEVATIONS)
    with pytest.raises(ConfigurationError):
        get_task("juggle")


def test_sampled_instances_are_reproducible():
    task = get_task("sort")
    first = task.sample_instances(6, 4, np.random.default_rng(11))
    assert first == task.sample_instances(6, 4, np.random.default_rng(11))
