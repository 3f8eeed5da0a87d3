"""Command-line experiment runner.

    odlae run   --variant odlae1 --dataset synth --seed 7 --out summary.json
    odlae run   --variant odlae1 --dataset mnist.csv --label-col 0 --classes 10
    odlae sweep --grid-layers 2,3,4,5 --grid-hidden 32 --out grid.csv

Exit codes: 0 success, 2 configuration/usage error, 3 data error.
A key=value config file (--config) supplies defaults; explicit flags win.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .errors import CheckpointError, ConfigError, DataError, InvalidInputError, ShapeError
from .experiment import VARIANTS, RunConfig, run_experiment, run_sweep, summary_json

_BOOL_FIELDS = {"has_header", "fixed_tradeoff"}
_INT_FIELDS = {"layers", "hidden_units", "attention_dim", "classes", "dim", "n_examples",
               "drift_at", "seed", "window", "steps", "offset"}
_FLOAT_FIELDS = {"lr", "theta0", "eps_beta", "beta_re", "beta_pre", "a_re", "sigma"}


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    d = RunConfig()
    p.add_argument("--config", help="key=value file of defaults; flags take precedence")
    p.add_argument("--variant", choices=VARIANTS, default=d.variant)
    p.add_argument("--layers", type=int, default=d.layers, help="number of hidden layers")
    p.add_argument("--hidden-units", type=int, default=d.hidden_units)
    p.add_argument("--attention-dim", type=int, default=d.attention_dim)
    p.add_argument("--optimizer", choices=("adam", "sgd"), default=d.optimizer)
    p.add_argument("--lr", type=float, default=d.lr)
    p.add_argument("--theta0", type=float, default=d.theta0, help="hedge discount factor")
    p.add_argument("--eps-beta", type=float, default=d.eps_beta, help="hedge weight floor mass (0 disables)")
    p.add_argument("--beta-re", type=float, default=d.beta_re)
    p.add_argument("--beta-pre", type=float, default=d.beta_pre)
    p.add_argument("--a-re", type=float, default=d.a_re, help="initial reconstruction trade-off weight")
    p.add_argument("--fixed-tradeoff", action="store_true", help="freeze the trade-off weights")
    p.add_argument("--out-activation", choices=("sigmoid", "identity", "relu"), default=d.out_activation)
    p.add_argument("--corruption", default=d.corruption, help="denoising-variant input corruption")
    p.add_argument("--dataset", default=d.dataset, help='"synth" or a CSV path')
    p.add_argument("--label-col", default=d.label_col, help="CSV label column, by index or header name")
    p.add_argument("--has-header", action="store_true")
    p.add_argument("--delimiter", default=d.delimiter)
    p.add_argument("--scaling", choices=("minmax", "none", "minmax_prescan"), default=d.scaling)
    p.add_argument("--classes", type=int, default=d.classes)
    p.add_argument("--dim", type=int, default=d.dim, help="synthetic feature dimension")
    p.add_argument("--sigma", type=float, default=d.sigma, help="synthetic class spread")
    p.add_argument("--n-examples", type=int, default=d.n_examples, help="synthetic stream length")
    p.add_argument("--drift", choices=("none", "permute", "rotate", "label-swap"), default=d.drift)
    p.add_argument("--drift-at", type=int, default=d.drift_at)
    p.add_argument("--drift-perm", default=d.drift_perm, help="label permutation for label-swap drift")
    p.add_argument("--noise", default=d.noise, help="evaluation-stream corruption (none|masking:P|gaussian:S)")
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--window", type=int, default=d.window)
    p.add_argument("--steps", type=int, default=None, help="stop after this many examples")
    p.add_argument("--offset", type=int, default=d.offset, help="skip this many stream examples first")
    p.add_argument("--out", default=None, help="summary JSON path")
    p.add_argument("--trace-csv", default=None, help="per-step diagnostic CSV path")
    p.add_argument("--window-csv", default=None, help="per-window accuracy CSV path")
    p.add_argument("--checkpoint-in", default=None)
    p.add_argument("--checkpoint-out", default=None)


def _read_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for line_no, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{line_no}: expected key=value")
                key, _, value = line.partition("=")
                values[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    return values


def _coerce(key: str, value: str):
    if key in _BOOL_FIELDS:
        return value.lower() in ("1", "true", "yes", "on")
    if key in _INT_FIELDS:
        return int(value)
    if key in _FLOAT_FIELDS:
        return float(value)
    return value


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    fields = {f.name for f in dataclasses.fields(RunConfig)}
    values = {k: v for k, v in vars(args).items() if k in fields}
    if args.config:
        file_values = _read_config_file(args.config)
        unknown = set(file_values) - fields
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        explicit = {a.replace("-", "_").lstrip("_") for a in _explicit_flags(args._cli_argv)}
        for key, raw in file_values.items():
            if key not in explicit:
                try:
                    values[key] = _coerce(key, raw)
                except ValueError:
                    raise ConfigError(f"bad value for config key {key}: {raw!r}") from None
    return RunConfig(**values)


def _explicit_flags(argv: list) -> set:
    flags = set()
    for token in argv:
        if token.startswith("--"):
            flags.add(token[2:].split("=", 1)[0])
    return flags


def _parse_grid(text: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad grid {text!r}; expected comma-separated integers") from None


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = argparse.ArgumentParser(prog="odlae", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one prequential experiment")
    _add_run_flags(run_p)

    sweep_p = sub.add_parser("sweep", help="grid-search layers and hidden units")
    _add_run_flags(sweep_p)
    sweep_p.add_argument("--grid-layers", default="2,3,4,5")
    sweep_p.add_argument("--grid-hidden", default="32,64,128,256")

    args = parser.parse_args(argv)
    args._cli_argv = argv
    try:
        cfg = _config_from_args(args)
        if args.command == "run":
            summary = run_experiment(cfg)
            sys.stdout.write(summary_json(summary))
        else:
            out_csv = cfg.out
            cfg = dataclasses.replace(cfg, out=None)
            result = run_sweep(cfg, _parse_grid(args.grid_layers), _parse_grid(args.grid_hidden), out_csv)
            sys.stdout.write(summary_json({"best": result["best"], "cells": len(result["cells"])}))
        return 0
    except (ConfigError, InvalidInputError, ShapeError, CheckpointError) as exc:
        print(f"odlae: configuration error: {exc}", file=sys.stderr)
        return 2
    except (DataError, OSError) as exc:
        print(f"odlae: data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
