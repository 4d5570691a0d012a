"""Command-line entry point.

    tableanswer <command> --corpus DIR [--config FILE] [--model FILE]
                [--out DIR] [--query ID]

Commands: extract, features, train, evaluate, answer, inspect.  Success
prints a summary JSON to stdout; validation failures print a JSON error
record to stderr and exit nonzero.
"""

import argparse
import json
import sys

from . import pipeline

COMMANDS = ("extract", "features", "train", "evaluate", "answer", "inspect")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="tableanswer",
        description="Select and preview web tables that answer search queries.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} stage")
        p.add_argument("--corpus", required=True, metavar="DIR",
                       help="corpus directory (queries.jsonl, docs/, labels.jsonl)")
        p.add_argument("--config", metavar="FILE", help="run configuration JSON")
        p.add_argument("--model", metavar="FILE",
                       help="model bundle path (output of train, input elsewhere)")
        p.add_argument("--out", metavar="DIR", help="output directory")
        if name == "answer":
            p.add_argument("--query", metavar="ID", help="answer only this query id")
    return parser


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise pipeline.PipelineError(
                f"command {args.command!r} requires --{name}", kind="usage")


def run(args) -> dict:
    config = pipeline.load_config(args.config)
    if args.command == "extract":
        _require(args, "out")
        return pipeline.cmd_extract(args.corpus, args.out)
    if args.command == "features":
        _require(args, "out", "model")
        return pipeline.cmd_features(args.corpus, args.out, args.model)
    if args.command == "train":
        _require(args, "out")
        return pipeline.cmd_train(args.corpus, args.out, config=config,
                                  model_path=args.model)
    if args.command == "evaluate":
        _require(args, "out", "model")
        return pipeline.cmd_evaluate(args.corpus, args.out, args.model)
    if args.command == "answer":
        _require(args, "out", "model")
        return pipeline.cmd_answer(args.corpus, args.out, args.model,
                                   config=config, query_id=args.query)
    if args.command == "inspect":
        return pipeline.cmd_inspect(args.corpus, out_dir=args.out,
                                    model_path=args.model)
    raise pipeline.PipelineError(f"unknown command {args.command!r}", kind="usage")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        summary = run(args)
    except pipeline.PipelineError as e:
        json.dump(e.to_record(), sys.stderr)
        sys.stderr.write("\n")
        return 2
    json.dump(summary, sys.stdout, sort_keys=True)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
