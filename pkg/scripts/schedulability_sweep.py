#!/usr/bin/env python3
"""Sweep utilization levels and compare policy schedulability rates.

Generates seeded random instances per utilization step, analyzes each under
every policy, and prints the fraction found schedulable. Desk-scale
companion to the bench subcommand: the point is the qualitative ordering of
the policies, not absolute rates.

Usage: python scripts/schedulability_sweep.py [--instances 25] [--tasks 4]
"""

from __future__ import annotations

import argparse
import sys

from schedgraph import ME, GenSpec, PolicyKind, generate, generate_instance


def sweep(n_instances: int, n_tasks: int, jitter: float, variation: float) -> None:
    utils = [u / 10 for u in range(1, 10)]
    policies = list(PolicyKind)
    header = "util " + " ".join(f"{kind.value:>9}" for kind in policies)
    print(header)
    for util in utils:
        rates = []
        for kind in policies:
            ok = 0
            for seed in range(n_instances):
                spec = GenSpec(n_tasks, util, jitter, variation, seed=seed)
                instance = generate_instance(spec)
                _, result = generate(instance, kind, ME)
                ok += result.schedulable
            rates.append(ok / n_instances)
        print(f"{util:4.1f} " + " ".join(f"{rate:9.2f}" for rate in rates))


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--instances", type=int, default=25,
                        help="instances per utilization step (default 25)")
    parser.add_argument("--tasks", type=int, default=4)
    parser.add_argument("--rj", type=float, default=0.3)
    parser.add_argument("--rc", type=float, default=0.3)
    args = parser.parse_args(argv)
    sweep(args.instances, args.tasks, args.rj, args.rc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
