import pytest

from npi_workbench.csvlog import read_rows
from npi_workbench.errors import ConfigurationError
from npi_workbench.experiments import (EVAL_FIELDS, RECIPES, CellResult, ExperimentSpec, eval_instances,
                                       evaluate_grid, evaluate_npi, recipe, render_run, render_trace,
                                       run_experiment, summarize, write_results)
from npi_workbench.experiments.recipes import (CHECKPOINTS, DONE_FILE, RESULTS_FILE, SPEC_FILE, SUMMARY_FILE,
                                               training_instances, unregistered_programs)
from npi_workbench.model import run
from npi_workbench.oracles import oracle_add, oracle_goto, oracle_max
from npi_workbench.oracles.tasks import get_task
from npi_workbench.programs import ProgramSpec

TINY = ExperimentSpec(name="tiny", train_grid=(("add", 1), ("sort", 2)), examples=(1,),
                      eval_grid=(("add", 1), ("sort", 2), ("pose", 0), ("max", 2)), baselines=("add-easy",),
                      continual_grid=(("max", 2),), eval_instances=2, eval_max_steps=40, train_steps=4,
                      baseline_steps=2, model_size=6)


def test_spec_json_round_trip(tmp_path):
    TINY.save(tmp_path / "spec.json")
    assert ExperimentSpec.load(tmp_path / "spec.json") == TINY
    raw = TINY.to_dict()
    assert raw["train_grid"] == [["add", 1], ["sort", 2]]
    assert ExperimentSpec.from_dict(raw).train_grid == (("add", 1), ("sort", 2))


@pytest.mark.parametrize("overrides", [
    {"train_grid": (("juggle", 3),)},
    {"train_grid": (("sort",),)},
    {"examples": (0,)},
    {"examples": ()},
    {"seeds": ()},
    {"baselines": ("add-fancy",)},
    {"eval_instances": 0},
])
def test_invalid_specs(overrides):
    with pytest.raises(ConfigurationError):
        ExperimentSpec.from_dict({**TINY.to_dict(), **overrides})


def test_recipes():
    assert list(RECIPES) == ["sample-complexity", "sort-generalization", "add-generalization", "multitask",
                             "fixed-core-max"]
    for name in RECIPES:
        assert recipe(name).name == name
    assert recipe("sample-complexity").examples == (2, 8, 32, 128, 256)
    assert recipe("sort-generalization").eval_grid[-1] == ("sort", 60)
    assert recipe("multitask").single_task_models
    assert recipe("fixed-core-max").continual_grid[0] == ("max", 2)
    with pytest.raises(ConfigurationError):
        recipe("juggling")


def test_model_sizes():
    assert TINY.model_config(4).lstm_size == 6
    assert TINY.model_config(4).seed == 4
    assert recipe("multitask").model_config(0).lstm_size == 256
    assert TINY.train_config(1, 9).max_steps == 9
    assert TINY.train_config(1).max_steps == 4


def test_instances_are_reproducible():
    task = get_task("sort")
    assert eval_instances(task, 5, 10, 3) == eval_instances(task, 5, 10, 3)
    assert eval_instances(task, 5, 10, 3) != eval_instances(task, 5, 10, 4)
    assert all(len(instance.split(",")) == 5 for instance in eval_instances(task, 5, 10))
    assert training_instances((("add", 2), ("pose", 1)), 3, 0) == training_instances((("add", 2), ("pose", 1)), 3, 0)
    pairs = training_instances((("add", 2), ("pose", 1)), 3, 0)
    assert [task for task, _ in pairs] == ["add"] * 3 + ["pose"] * 3
    assert all(get_task("pose").trace(instance).steps for _, instance in pairs[3:])


def test_render_addition_trace():
    lines = render_trace(oracle_add(96, 125))
    assert lines[:8] == [
        "ADD",
        "  ADD1",
        "    WRITE OUT 1",
        "    CARRY",
        "      PTR CARRY LEFT",
        "      WRITE CARRY 1",
        "      PTR CARRY RIGHT",
        "  LSHIFT",
    ]
    assert render_trace(oracle_goto((0, 1), (0, 1))) == ["GOTO", "  HGOTO", "  VGOTO"]
    assert render_trace(oracle_goto((22, 1), (0, 1)))[:4] == ["GOTO", "  HGOTO", "    RGOTO", "      MOVE RIGHT"]


def test_render_run(toy_model):
    text = render_run(run(toy_model, "ADD", get_task("add").make_env("12+34"), max_steps=3))
    lines = text.splitlines()
    assert lines[0] == "add: 12+34"
    assert lines[1] == "ADD"
    assert lines[-1].startswith(("returned after", "halted ("))


def test_evaluate_npi_bounds(toy_model):
    task = get_task("sort")
    result = evaluate_npi(toy_model, task, 3, eval_instances(task, 3, 4), max_steps=30)
    assert 0.0 <= result.accuracy <= 1.0
    assert 0.0 <= result.trace_exact_match <= 1.0
    assert 1 <= result.mean_steps <= 30


def test_evaluate_grid_skips_unknown_programs_and_keeps_order(toy_model):
    cells = [("max", 3), ("pose", 1), ("sort", 2), ("pose", 0)]
    serial = evaluate_grid(toy_model, cells, instances=3, max_steps=20)
    threaded = evaluate_grid(toy_model, cells, instances=3, max_steps=20, workers=3)
    assert [(r.task, r.size) for r in serial] == [("pose", 1), ("sort", 2), ("pose", 0)]
    assert serial == threaded


def test_results_csv_appends(tmp_path):
    path = tmp_path / "eval.csv"
    row = CellResult("sort", 4, 0.5, 0.25, 12.0).row("manual", "npi", 0, 8)
    assert write_results(path, [row]) == 1
    assert write_results(path, [row, row], append=True) == 2
    rows = read_rows(path)
    assert len(rows) == 3
    assert list(rows[0]) == EVAL_FIELDS
    assert rows[0]["accuracy"] == "0.5" and rows[0]["schema_version"] == "1"
    assert CellResult("add", 3, 1.0).row("e", "seq2seq:add-easy", 0)["trace_exact_match"] is None


def test_unregistered_programs(toy_model):
    assert unregistered_programs(toy_model, [oracle_max([3, 1, 2])]) == [ProgramSpec("sort", "MAX"),
                                                                         ProgramSpec("sort", "RJMP")]
    assert unregistered_programs(toy_model, [oracle_add(1, 2)]) == []


def test_summary_reports_continual_check():
    def row(model, task, accuracy, seed="0"):
        return {"model": model, "examples": "8", "seed": seed, "task": task, "size": "3", "accuracy": accuracy}

    text = summarize([row("npi", "sort", "0.5"), row("npi", "sort", "0.75", seed="1"),
                      row("npi+max", "sort", "0.5"), row("npi+max", "max", "0.25")])
    assert "unchanged" in text
    header, *body = text.splitlines()
    assert header.split() == ["model", "examples", "task", "size", "best", "accuracy", "seeds"]
    assert body[0].split() == ["npi", "8", "sort", "3", "75.0", "2"]
    changed = summarize([row("npi", "sort", "0.5"), row("npi+max", "sort", "0.25")])
    assert "sort size 3 (seed 0)" in changed
    assert "fixed-core" not in summarize([row("npi", "sort", "0.5")])


def test_tiny_experiment_end_to_end(tmp_path):
    root = run_experiment(TINY, tmp_path / "a", show_progress=False)
    assert root == tmp_path / "a" / "tiny"
    assert ExperimentSpec.load(root / SPEC_FILE) == TINY
    rows = read_rows(root / RESULTS_FILE)
    assert [(r["model"], r["task"]) for r in rows] == [
        ("npi", "add"), ("npi", "sort"), ("npi", "pose"),
        ("seq2seq:add-easy", "add"),
        ("npi+max", "add"), ("npi+max", "sort"), ("npi+max", "pose"), ("npi+max", "max"),
    ]
    assert all(r["examples"] == "1" and r["seed"] == "0" for r in rows)
    assert rows[3]["trace_exact_match"] == ""
    assert "fixed-core training" in (root / SUMMARY_FILE).read_text()
    checkpoints = root / CHECKPOINTS
    assert (checkpoints / "npi-n1-s0" / DONE_FILE).exists()
    assert (checkpoints / "npi+max-n1-s0" / "model.ckpt").exists()
    assert (checkpoints / "seq2seq-add-easy-n1-s0" / "model.ckpt").exists()

    first = (root / RESULTS_FILE).read_bytes()
    run_experiment(TINY, tmp_path / "a", show_progress=False)
    assert (root / RESULTS_FILE).read_bytes() == first

    (checkpoints / "npi-n1-s0" / DONE_FILE).unlink()
    run_experiment(TINY, tmp_path / "a", show_progress=False)
    assert (root / RESULTS_FILE).read_bytes() == first

    other = run_experiment(TINY.updated(workers=2), tmp_path / "b", show_progress=False)
    assert (other / RESULTS_FILE).read_bytes() == first
