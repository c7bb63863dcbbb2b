#!/usr/bin/env python3
"""Utility trajectories as vocabulary incompleteness grows vs stays covered.

Two views. First, a fully covered population: incompleteness sits at the
floor and utility tracks accuracy upward across epochs. Second, a sweep
over the population share whose intended label the system does not know:
accuracy barely moves, incompleteness climbs with the share, and utility
collapses -- accuracy gains cannot outrun vocabulary drift.

Usage:
    python scripts/run_utility_dynamics.py --epochs 4 [--out DIR]
"""

import argparse
from pathlib import Path

from fairloop import GenderLabel, UpdatePolicy
from fairloop.simulator import FeedbackBehavior, GroupSpec, PopulationSpec, run_scenario
from fairloop.utility import write_series


def covered_spec(seed: int) -> PopulationSpec:
    return PopulationSpec(
        groups=(
            GroupSpec("man", 0.5, GenderLabel("man"), base_rate=0.95),
            GroupSpec("woman", 0.3, GenderLabel("woman"), base_rate=0.97),
            GroupSpec("nonbinary", 0.2, GenderLabel("non-binary"),
                      center=tuple([0.0, 6.0] + [0.0] * 14)),
        ),
        seed=seed,
    )


def drifting_spec(seed: int, oov_share: float) -> PopulationSpec:
    rest = 1.0 - oov_share
    groups = [
        GroupSpec("man", rest * 0.6, GenderLabel("man"), base_rate=0.95),
        GroupSpec("woman", rest * 0.4, GenderLabel("woman"), base_rate=0.97),
    ]
    if oov_share > 0:
        groups.append(
            GroupSpec("fluid", oov_share, GenderLabel("genderfluid"),
                      center=tuple([0.0, -6.0] + [0.0] * 14))
        )
    return PopulationSpec(groups=tuple(groups), seed=seed)


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--epochs", type=int, default=4)
    parser.add_argument("--seed", type=int, default=9)
    parser.add_argument("--out", type=Path)
    args = parser.parse_args()

    behavior = FeedbackBehavior(participation=1.0, consent_rate=1.0)
    policy = UpdatePolicy(evaluation_interval=500)

    print("covered vocabulary, consented updates enabled:")
    print(f"{'epoch':<7}{'A(t)':<8}{'L(t)':<8}U(t)")
    covered = run_scenario(covered_spec(args.seed), behavior, policy, epochs=args.epochs)
    for e in covered.epochs:
        s = e.snapshot
        print(f"{e.epoch:<7}{s.accuracy:<8.4f}{s.incompleteness:<8.4f}{s.utility:.2f}")
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        write_series([e.snapshot for e in covered.epochs], args.out / "utility_covered.csv")

    print("\ngrowing out-of-vocabulary share (one run per share):")
    print(f"{'share':<8}{'A(t)':<8}{'L(t)':<8}U(t)")
    sweep = []
    for share in (0.0, 0.1, 0.2, 0.3, 0.4, 0.5):
        report = run_scenario(drifting_spec(args.seed, share), behavior, policy, epochs=1)
        s = report.epochs[0].snapshot
        sweep.append(s)
        print(f"{share:<8.2f}{s.accuracy:<8.4f}{s.incompleteness:<8.4f}{s.utility:.2f}")
    if args.out:
        write_series(sweep, args.out / "utility_oov_sweep.csv")
        print(f"\nwrote series to {args.out}")


if __name__ == "__main__":
    main()
