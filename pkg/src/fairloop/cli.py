"""Command-line entry points: simulate, serve, bootstrap."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .config import load_config
from .scheduler import UpdatePolicy, decisions_to_csv, load_policy
from .simulator import load_behavior, load_spec, run_scenario


def _add_simulate(subparsers) -> None:
    p = subparsers.add_parser("simulate", help="run a feedback-loop scenario")
    p.add_argument("--spec", required=True, help="population spec JSON file")
    p.add_argument("--behavior", required=True, help="feedback behavior JSON file")
    p.add_argument("--policy", help="update policy key=value file")
    p.add_argument("--epochs", type=int, default=1)
    p.add_argument("--seed", type=int, help="override the spec seed")
    p.add_argument("--t1", type=float, default=5.0, help="feedback window seconds")
    p.add_argument("--out", required=True, help="output directory")


def _add_serve(subparsers) -> None:
    p = subparsers.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--port", type=int, help="override the configured port")


def _add_bootstrap(subparsers) -> None:
    p = subparsers.add_parser(
        "bootstrap", help="train the reference model into a service data dir"
    )
    p.add_argument("--data-dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=16)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="fairloop")
    subparsers = parser.add_subparsers(dest="command", required=True)
    _add_simulate(subparsers)
    _add_serve(subparsers)
    _add_bootstrap(subparsers)
    args = parser.parse_args(argv)

    if args.command == "simulate":
        return _simulate(args)
    if args.command == "serve":
        return _serve(args)
    if args.command == "bootstrap":
        return _bootstrap(args)
    return 2


def _simulate(args) -> int:
    spec = load_spec(args.spec)
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    behavior = load_behavior(args.behavior)
    policy = load_policy(args.policy) if args.policy else UpdatePolicy()
    report = run_scenario(spec, behavior, policy, epochs=args.epochs, t1=args.t1)
    out = Path(args.out)
    report.write_outputs(out)
    decisions_to_csv([e.decision for e in report.epochs], out / "decisions.csv")
    summary = {
        "epochs": args.epochs,
        "final_model_version": report.final_model_version,
        "session_accuracy": report.session_accuracies(),
        "classifier_accuracy": [e.classifier_accuracy for e in report.epochs],
        "updates_applied": sum(e.decision.applied for e in report.epochs),
    }
    print(json.dumps(summary, indent=2))
    return 0


def _serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = load_config(args.config)
    if args.port is not None:
        config = dataclasses.replace(config, port=args.port)
    uvicorn.run(create_app(config), host="0.0.0.0", port=config.port)
    return 0


def _bootstrap(args) -> int:
    from .classifier import save_model
    from .labels import LabelRegistry
    from .service import LABELS_FILE, MODEL_FILE
    from .simulator import make_reference_model

    data_dir = Path(args.data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    registry = LabelRegistry(data_dir / LABELS_FILE)
    model, _ = make_reference_model(registry.current, dim=args.dim, seed=args.seed)
    save_model(model, data_dir / MODEL_FILE)
    print(f"model v{model.model_version} (d={args.dim}) written to {data_dir / MODEL_FILE}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
