#!/usr/bin/env python3
"""Compare fixed trade-off weight settings against the adaptive rule.

Runs every fixed (a_re, a_pre) in {(0.1, 0.9) .. (0.9, 0.1)} plus the
adaptive scheme on one stream and prints a ranked table. This is a report,
not a test: adaptive is expected to sit at or near the top, but streams are
noisy and no ordering is asserted.

    python scripts/tradeoff_comparison.py [--variant odlae2] [--n 5000]
"""

import argparse

from odlae.experiment import RunConfig, run_experiment


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--variant", default="odlae1", choices=["odlae1", "odlae2"])
    parser.add_argument("--n", type=int, default=5000)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    base = dict(
        variant=args.variant,
        dataset="synth",
        classes=3,
        dim=8,
        sigma=0.12,
        n_examples=args.n,
        hidden_units=32,
        layers=3,
        window=max(100, args.n // 10),
        seed=args.seed,
    )

    results = []
    for tenth in range(1, 10):
        a_re = tenth / 10.0
        cfg = RunConfig(**base, a_re=a_re, fixed_tradeoff=True)
        acc = run_experiment(cfg)["metrics"]["accuracy"]
        results.append((f"fixed ({a_re:.1f}, {1 - a_re:.1f})", acc))
    adaptive = run_experiment(RunConfig(**base))["metrics"]["accuracy"]
    results.append(("adaptive", adaptive))

    results.sort(key=lambda r: -r[1])
    width = max(len(name) for name, _ in results)
    print(f"{'setting'.ljust(width)}  accuracy")
    for name, acc in results:
        marker = "  <- adaptive" if name == "adaptive" else ""
        print(f"{name.ljust(width)}  {acc:.4f}{marker}")


if __name__ == "__main__":
    main()
