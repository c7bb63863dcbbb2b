#!/usr/bin/env python3
"""Track non-binary coverage through feedback-driven controlled updates.

Runs a scenario where a separable non-binary population corrects every
misgendered prediction and always consents, then prints per-epoch gate
decisions and holdout TPRs. With enough consented points the accuracy
gate opens and the class flips from unreachable to covered.

Usage:
    python scripts/run_update_transition.py --epochs 4 --participation 1.0 \
        --consent 1.0 --theta 0.8 [--out DIR]
"""

import argparse
from pathlib import Path

from fairloop import GenderLabel, UpdatePolicy
from fairloop.scheduler import decisions_to_csv
from fairloop.simulator import FeedbackBehavior, GroupSpec, PopulationSpec, run_scenario

NON_BINARY = GenderLabel("non-binary")


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--epochs", type=int, default=4)
    parser.add_argument("--participation", type=float, default=1.0)
    parser.add_argument("--consent", type=float, default=1.0)
    parser.add_argument("--theta", type=float, default=0.8)
    parser.add_argument("--interval", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=9)
    parser.add_argument("--out", type=Path)
    args = parser.parse_args()

    spec = PopulationSpec(
        groups=(
            GroupSpec("man", 0.4, GenderLabel("man"), base_rate=0.976),
            GroupSpec("woman", 0.4, GenderLabel("woman"), base_rate=0.983),
            GroupSpec("nonbinary", 0.2, NON_BINARY, center=tuple([0.0, 6.0] + [0.0] * 14)),
        ),
        seed=args.seed,
    )
    behavior = FeedbackBehavior(participation=args.participation, consent_rate=args.consent)
    policy = UpdatePolicy(evaluation_interval=args.interval, per_class_threshold=args.theta)
    report = run_scenario(spec, behavior, policy, epochs=args.epochs)

    print(f"{'epoch':<7}{'applied':<9}{'model':<7}{'TPR(nb)':<9}{'session acc':<12}reason")
    for e in report.epochs:
        tpr_nb = e.holdout_report.tpr_by_label().get(NON_BINARY, 0.0)
        print(
            f"{e.epoch:<7}{str(e.decision.applied):<9}"
            f"v{e.decision.candidate_model_version if e.decision.applied else '-':<6}"
            f"{tpr_nb:<9.3f}{e.session_accuracy:<12.4f}{e.decision.reason}"
        )
    print(f"\nfinal model version: {report.final_model_version}")

    if args.out:
        report.write_outputs(args.out)
        decisions_to_csv([e.decision for e in report.epochs], args.out / "decisions.csv")
        print(f"wrote outputs to {args.out}")


if __name__ == "__main__":
    main()
