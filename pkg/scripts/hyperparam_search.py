#!/usr/bin/env python3
"""Two-phase hyperparameter search over depth and width.

Phase 1 fixes hidden_units=32 and sweeps the layer count 2..5; phase 2
fixes the winning layer count and sweeps hidden_units over 32..256. Writes
one CSV per phase and prints the winning (layers, hidden_units) pair.

    python scripts/hyperparam_search.py --dataset data/mnist_784.csv --classes 10 --steps 5000
"""

import argparse
import dataclasses

from odlae.experiment import RunConfig, run_sweep


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--variant", default="odlae1")
    parser.add_argument("--dataset", default="synth")
    parser.add_argument("--classes", type=int, default=3)
    parser.add_argument("--dim", type=int, default=8)
    parser.add_argument("--n-examples", type=int, default=4000)
    parser.add_argument("--steps", type=int, default=None)
    parser.add_argument("--seed", type=int, default=5)
    parser.add_argument("--out-prefix", default="sweep")
    args = parser.parse_args()

    cfg = RunConfig(
        variant=args.variant,
        dataset=args.dataset,
        classes=args.classes,
        dim=args.dim,
        n_examples=args.n_examples,
        steps=args.steps,
        seed=args.seed,
        window=1000,
    )

    phase1 = run_sweep(cfg, layer_grid=[2, 3, 4, 5], hidden_grid=[32], out_csv=f"{args.out_prefix}_phase1.csv")
    best_layers = phase1["best"]["layers"]
    print(f"phase 1 best layer count: {best_layers} (accuracy {phase1['best']['accuracy']:.4f})")

    phase2 = run_sweep(
        dataclasses.replace(cfg, layers=best_layers),
        layer_grid=[best_layers],
        hidden_grid=[32, 64, 128, 256],
        out_csv=f"{args.out_prefix}_phase2.csv",
    )
    best = phase2["best"]
    print(f"best combination: layers={best['layers']} hidden_units={best['hidden_units']} "
          f"accuracy={best['accuracy']:.4f}")


if __name__ == "__main__":
    main()
