"""Command-line entry point: gen-data, train, eval, and inspect."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import experiment
from .classifier import render_rule
from .data import load_dataset_csv, save_dataset_csv
from .experiment import ConfigError, ExperimentConfig
from .problems import AmGaussProblem, FrogProblem, am_gauss_generate, save_instance


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    for f in dataclasses.fields(ExperimentConfig):
        flag = "--" + f.name.replace("_", "-")
        parser.add_argument(flag, dest=f.name, default=None, metavar="V",
                            help=f"override config key {f.name}")


def _collect_config(args) -> ExperimentConfig:
    mapping = {}
    if args.config:
        mapping.update(experiment.parse_config_file(args.config))
    for f in dataclasses.fields(ExperimentConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            mapping[f.name] = value
    return experiment.config_from_mapping(mapping)


def cmd_gen_data(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.problem == "frog":
        problem = FrogProblem()
    else:
        instance = am_gauss_generate(args.problem_seed)
        problem = AmGaussProblem(instance)
        save_instance(instance, out / "instance.txt")
    train = problem.dataset(args.n, experiment.derive_rng(args.seed, 1, 0))
    holdout = problem.dataset(args.holdout, experiment.derive_rng(args.seed, 0))
    save_dataset_csv(train, out / "train.csv")
    save_dataset_csv(holdout, out / "holdout.csv")
    print(f"wrote {out / 'train.csv'} ({args.n} examples) and "
          f"{out / 'holdout.csv'} ({args.holdout} examples)")
    return 0


def cmd_train(args) -> int:
    config = _collect_config(args)
    result = experiment.run_experiment(config, log=print)
    out = Path(config.output_dir)
    print(f"wrote {out / 'metrics.csv'} and {len(result.repetitions)} model file(s)")
    return 0


def _problem_for_model(metadata: dict, instance_path: str | None):
    problem_name = metadata.get("problem")
    if problem_name == "frog":
        return FrogProblem()
    if instance_path:
        from .problems import load_instance

        return AmGaussProblem(load_instance(instance_path))
    return AmGaussProblem.from_seed(metadata.get("problem_seed", 0))


def cmd_eval(args) -> int:
    individual, metadata = experiment.load_model(args.model)
    holdout = load_dataset_csv(args.holdout)
    problem = _problem_for_model(metadata, args.instance)
    if holdout.dx != problem.dx or holdout.da != problem.da:
        raise ValueError(
            f"holdout dimensions ({holdout.dx}, {holdout.da}) do not match "
            f"the problem ({problem.dx}, {problem.da})"
        )
    report = experiment.evaluate_model(individual, holdout, problem)
    for key, value in report.items():
        print(f"{key} = {value}")
    out = args.out or str(Path(args.model).with_name("eval_report.json"))
    Path(out).write_text(json.dumps(report, indent=2) + "\n")
    print(f"wrote {out}")
    return 0


def cmd_inspect(args) -> int:
    individual, _ = experiment.load_model(args.model)
    ordered = sorted(individual.classifiers, key=lambda c: c.train_error)
    for classifier in ordered:
        print(render_rule(classifier))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evorules",
        description="Evolve interval-rule models of a quality function and "
                    "predict optimal parametrizations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="sample benchmark datasets to CSV")
    p.add_argument("--problem", choices=["frog", "am-gauss"], required=True)
    p.add_argument("--n", type=int, required=True, help="training pool size")
    p.add_argument("--holdout", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--problem-seed", type=int, default=0)
    p.add_argument("--out", default=".")
    p.set_defaults(handler=cmd_gen_data)

    p = sub.add_parser("train", help="run a training experiment")
    p.add_argument("--config", help="flat key = value configuration file")
    _add_config_flags(p)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("eval", help="evaluate a model file on a holdout CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--holdout", required=True)
    p.add_argument("--instance", help="landscape instance file, if any")
    p.add_argument("--out", help="report path (default: eval_report.json)")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("inspect", help="print a model's rules")
    p.add_argument("--model", required=True)
    p.set_defaults(handler=cmd_inspect)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ConfigError, ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
