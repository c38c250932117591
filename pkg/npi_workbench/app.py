from __future__ import annotations

import argparse
import logging
from pathlib import Path
import sys
from typing import Sequence
import numpy as np

from npi_workbench import constants
from npi_workbench.baselines.formats import ALIGNED_TASKS, SEQ_TASKS, seq_example, to_pair
from npi_workbench.baselines.seq2seq import Seq2SeqConfig, Seq2SeqModel, load_seq2seq, s2s_train
from npi_workbench.errors import InputError, NpiError, UsageError
from npi_workbench.experiments.evaluate import (eval_instances, evaluate_grid, evaluate_seq2seq,
                                                write_results)
from npi_workbench.experiments.recipes import RECIPES, recipe, run_experiment, unregistered_programs
from npi_workbench.experiments.render import render_run
from npi_workbench.experiments.spec import ExperimentSpec
from npi_workbench.model.checkpoint import load_checkpoint, save_checkpoint
from npi_workbench.model.config import ModelConfig, toy_config
from npi_workbench.model.core import NpiModel
from npi_workbench.model.interpreter import run as run_program
from npi_workbench.oracles.tasks import TASKS, get_task
from npi_workbench.oracles.trace import Trace
from npi_workbench.oracles.traceio import SeqExample, read_trace_file, write_traces
from npi_workbench.programs import ProgramSpec
from npi_workbench.training.config import TrainConfig
from npi_workbench.training.fixed_core import train_fixed_core
from npi_workbench.training.trainer import CHECKPOINT_FILE, METRICS_FILE, train

"""Command-line entry point: npi-workbench <command> [options]."""

logger = logging.getLogger(__name__)

# add-program writes fixed-core metrics and interim checkpoints to <out stem>.fixed-core/
FIXED_CORE_SUFFIX = ".fixed-core"


def parse_sizes(text: str) -> list[int]:
    """'2-20', '5' or a comma list of either, e.g. '1-20,30,40'."""
    sizes: list[int] = []
    try:
        for part in text.split(","):
            low, sep, high = part.strip().partition("-")
            if sep:
                if int(high) < int(low):
                    raise UsageError(f"empty size range {part!r}")
                sizes.extend(range(int(low), int(high) + 1))
            else:
                sizes.append(int(low))
    except ValueError:
        raise UsageError(f"bad size list {text!r}; expected e.g. 2-20 or 1,5,10") from None
    return sizes


def _load_traces(paths: Sequence[str]) -> tuple[list[Trace], list[SeqExample]]:
    traces: list[Trace] = []
    sequences: list[SeqExample] = []
    for path in paths:
        if not Path(path).exists():
            raise UsageError(f"trace file {path} does not exist")
        loaded = read_trace_file(path)
        traces += loaded.traces
        sequences += loaded.sequences
    return traces, sequences


def gen_traces(args: argparse.Namespace) -> None:
    task = get_task(args.task)
    sizes = parse_sizes(args.sizes)
    if args.count < 0:
        raise UsageError("--count must be >= 0")
    mismatched = [seq_task for seq_task in args.seq if seq_task.partition("-")[0] != task.name]
    if mismatched:
        raise UsageError(f"--seq {mismatched[0]} does not apply to {task.name} instances")
    rng = np.random.default_rng(args.seed)
    try:
        instances = [instance for size in sizes for instance in task.sample_instances(size, args.count, rng)]
    except InputError as e:
        raise UsageError(f"bad --sizes for {task.name}: {e}") from None
    traces = [task.trace(instance) for instance in instances]
    sequences = [seq_example(seq_task, instance) for seq_task in args.seq for instance in instances]
    count = write_traces(traces, args.out, sequences)
    logger.info("Wrote %d %s traces for sizes %s to %s", count, task.name, args.sizes, args.out)


def _train_config(args: argparse.Namespace) -> TrainConfig:
    config = TrainConfig.load(args.config) if args.config else TrainConfig()
    return config.updated(seed=args.seed, max_steps=args.steps, learning_rate=args.lr)


def train_command(args: argparse.Namespace) -> None:
    config = _train_config(args)
    traces, sequences = _load_traces(args.traces)
    if args.baseline:
        pairs = [to_pair(example) for example in sequences if example.task == args.baseline]
        if not pairs:
            raise UsageError(f"no {args.baseline} seq records in {', '.join(args.traces)}")
        baseline_config = Seq2SeqConfig(channels=pairs[0].channels, aligned=args.baseline in ALIGNED_TASKS,
                                        seed=config.seed)
        if args.size:
            baseline_config = baseline_config.updated(size=args.size, embedding_size=min(args.size, 32))
        s2s_train(Seq2SeqModel.create(baseline_config), pairs, config, args.out, not args.no_progress)
        return

    heldout = _load_traces(args.heldout)[0] if args.heldout else None
    optimizer = None
    if args.resume:
        checkpoint = load_checkpoint(args.resume)
        model, optimizer = checkpoint.model, checkpoint.optimizer
    else:
        if args.model_config:
            model_config = ModelConfig.load(args.model_config).updated(seed=args.seed)
        elif args.size:
            model_config = toy_config(args.size, seed=config.seed)
        else:
            model_config = ModelConfig(seed=config.seed)
        model = NpiModel.create(model_config)
    Path(args.out).mkdir(parents=True, exist_ok=True)
    config.save(Path(args.out) / "train_config.json")
    model.config.save(Path(args.out) / "model_config.json")
    result = train(model, traces, config, optimizer, heldout, args.out, not args.no_progress)
    logger.info("Trained %d steps; checkpoint in %s", result.steps, Path(args.out) / CHECKPOINT_FILE)


def eval_command(args: argparse.Namespace) -> None:
    task = get_task(args.task)
    cells = [(task.name, size) for size in parse_sizes(args.sizes)]
    if args.baseline:
        baseline = load_seq2seq(args.checkpoint)
        results = [evaluate_seq2seq(baseline, args.baseline, task, size,
                                    eval_instances(task, size, args.instances, args.eval_seed))
                   for _, size in cells]
        label = args.model or f"seq2seq:{args.baseline}"
    else:
        model = load_checkpoint(args.checkpoint).model
        results = evaluate_grid(model, cells, args.instances, args.eval_seed, args.workers, not args.no_progress,
                                args.max_steps)
        label = args.model or "npi"
    count = write_results(args.out, (r.row(args.experiment, label, args.seed) for r in results), append=True)
    for result in results:
        print(f"{result.task}\t{result.size}\t{result.accuracy:.3f}")
    logger.info("Appended %d rows to %s", count, args.out)


def run_command(args: argparse.Namespace) -> None:
    task = get_task(args.task)
    model = load_checkpoint(args.checkpoint).model
    result = run_program(model, task.program, task.make_env(args.instance), max_steps=args.max_steps,
                         task=task.name)
    print(render_run(result))
    if result.completed and not task.solved(result.env):
        print("result: wrong")
    elif result.completed:
        print("result: solved")


def add_program_command(args: argparse.Namespace) -> None:
    checkpoint = load_checkpoint(args.checkpoint)
    model = checkpoint.model
    rng = np.random.default_rng([args.seed or 0, len(model.memory)])
    new_traces, _ = _load_traces(args.train) if args.train else ([], [])
    names = args.program or [spec.name for spec in unregistered_programs(model, new_traces)] or ["MAX", "RJMP"]
    programs = [ProgramSpec(args.env, name) for name in names]
    for spec in programs:
        model.memory.add_program(spec.name, spec.env, rng)
    out = Path(args.out or args.checkpoint)
    if new_traces:
        replay, _ = _load_traces(args.replay) if args.replay else ([], [])
        run_dir = out.with_suffix(FIXED_CORE_SUFFIX)
        train_fixed_core(model, programs, new_traces, replay, _train_config(args), run_dir, not args.no_progress)
        logger.info("Fixed-core metrics in %s", run_dir / METRICS_FILE)
    save_checkpoint(model, out)
    logger.info("Registered %s; saved %s", ", ".join(spec.key for spec in programs), out)


def experiment_command(args: argparse.Namespace) -> None:
    spec = ExperimentSpec.load(args.spec) if args.spec else recipe(args.name)
    if args.seeds:
        spec = spec.updated(seeds=tuple(parse_sizes(args.seeds)))
    spec = spec.updated(train_steps=args.steps, baseline_steps=args.baseline_steps or args.steps,
                        model_size=args.size, eval_instances=args.instances, workers=args.workers)
    root = run_experiment(spec, args.out, not args.no_progress)
    print((root / "summary.txt").read_text(encoding="utf-8"), end="")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="npi-workbench",
        description="Train and evaluate neural programmer-interpreters on addition, sorting and pose tasks.",
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Log debug messages.")
    parser.add_argument("--no-progress", action="store_true", help="Hide progress bars.")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen-traces", help="Write oracle execution traces.")
    gen.add_argument("--task", required=True, choices=sorted(TASKS))
    gen.add_argument("--sizes", required=True, help="Problem sizes, e.g. 2-20.")
    gen.add_argument("--count", type=int, default=64, help="Traces per size.")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--seq", action="append", default=[], choices=SEQ_TASKS,
                     help="Also write flat sequence examples in this encoding.")
    gen.add_argument("--out", required=True)
    gen.set_defaults(handler=gen_traces)

    tr = commands.add_parser("train", help="Train an interpreter (or a baseline) on trace files.")
    tr.add_argument("traces", nargs="+")
    tr.add_argument("--out", required=True, help="Directory for model.ckpt and metrics.csv.")
    tr.add_argument("--config", help="TrainConfig JSON file.")
    tr.add_argument("--model-config", help="ModelConfig JSON file.")
    tr.add_argument("--size", type=int, help="Use a scaled-down model of this width.")
    tr.add_argument("--resume", help="Continue from this checkpoint.")
    tr.add_argument("--heldout", nargs="*", help="Trace files for error estimation.")
    tr.add_argument("--baseline", choices=SEQ_TASKS, help="Train a sequence baseline on seq records instead.")
    _train_flags(tr)
    tr.set_defaults(handler=train_command)

    ev = commands.add_parser("eval", help="Append evaluation rows to a CSV.")
    ev.add_argument("checkpoint")
    ev.add_argument("--task", required=True, choices=sorted(TASKS))
    ev.add_argument("--sizes", required=True)
    ev.add_argument("--instances", type=int, default=constants.EVAL_INSTANCES)
    ev.add_argument("--eval-seed", type=int, default=constants.EVAL_SEED)
    ev.add_argument("--baseline", choices=SEQ_TASKS, help="The checkpoint is a sequence baseline.")
    ev.add_argument("--experiment", default="eval", help="Label for the experiment column.")
    ev.add_argument("--model", help="Label for the model column.")
    ev.add_argument("--seed", type=int, default=0, help="Label for the seed column.")
    ev.add_argument("--workers", type=int, default=1)
    ev.add_argument("--max-steps", type=int, help="Step budget per instance; default scales with the oracle trace.")
    ev.add_argument("--out", default="eval.csv")
    ev.set_defaults(handler=eval_command)

    rn = commands.add_parser("run", help="Run a trained interpreter on one instance and print its trace.")
    rn.add_argument("checkpoint")
    rn.add_argument("--task", required=True, choices=sorted(TASKS))
    rn.add_argument("instance", help="e.g. 96+125, 9,2,5 or 3,2>0,1")
    rn.add_argument("--max-steps", type=int, default=constants.MAX_STEPS)
    rn.set_defaults(handler=run_command)

    ap = commands.add_parser("add-program", help="Register new programs and optionally learn them on a frozen core.")
    ap.add_argument("checkpoint")
    ap.add_argument("--env", default="sort")
    ap.add_argument("--program", action="append", help="Program name; repeatable. Default MAX and RJMP.")
    ap.add_argument("--train", nargs="*", help="Trace files of the new programs.")
    ap.add_argument("--replay", nargs="*", help="Trace files of already learned programs to replay.")
    ap.add_argument("--out", help="Output checkpoint; defaults to overwriting the input. "
                    "Training metrics go to a .fixed-core directory beside it.")
    ap.add_argument("--config", help="TrainConfig JSON file.")
    _train_flags(ap)
    ap.set_defaults(handler=add_program_command)

    ex = commands.add_parser("experiment", help="Run a named experiment recipe.")
    ex.add_argument("name", choices=sorted(RECIPES))
    ex.add_argument("--spec", help="ExperimentSpec JSON file overriding the recipe.")
    ex.add_argument("--out", help="Parent directory of the run directory.")
    ex.add_argument("--seeds", help="Seeds, e.g. 0-2.")
    ex.add_argument("--steps", type=int, help="Interpreter training steps.")
    ex.add_argument("--baseline-steps", type=int, help="Baseline training steps.")
    ex.add_argument("--size", type=int, help="Scaled-down model width.")
    ex.add_argument("--instances", type=int, help="Evaluation instances per cell.")
    ex.add_argument("--workers", type=int, help="Parallel evaluation threads.")
    ex.set_defaults(handler=experiment_command)
    return parser


def _train_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, help="Overrides the config seed.")
    parser.add_argument("--steps", type=int, help="Overrides max_steps.")
    parser.add_argument("--lr", type=float, help="Overrides learning_rate.")


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        args.handler(args)
    except UsageError as e:
        print(f"npi-workbench: {e}", file=sys.stderr)
        return 2
    except NpiError as e:
        print(f"npi-workbench: {e}", file=sys.stderr)
        return 1
    except Exception as e:
        logger.exception(e)
        return 1
    return 0


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
