"""Evaluation grids, trace rendering and named experiment recipes."""

from npi_workbench.experiments.evaluate import (EVAL_FIELDS, CellResult, eval_instances, evaluate_grid,
                                                evaluate_npi, evaluate_seq2seq, write_results)
from npi_workbench.experiments.recipes import RECIPES, recipe, run_experiment, summarize
from npi_workbench.experiments.render import render_run, render_trace
from npi_workbench.experiments.spec import ExperimentSpec

__all__ = [
    "EVAL_FIELDS", "CellResult", "eval_instances", "evaluate_grid", "evaluate_npi", "evaluate_seq2seq",
    "write_results",
    "RECIPES", "recipe", "run_experiment", "summarize",
    "render_run", "render_trace",
    "ExperimentSpec",
]
