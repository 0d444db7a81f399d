# Copyright 2026 irand development team.

# Permission is hereby granted, free of charge, to any person obtaining a copy of
# this software and associated documentation files (the "Software"), to deal in
# the Software without restriction, including without limitation the rights to use,
# copy, modify, merge, publish, distribute, sublicense, and/or sell copies of the
# Software, and to permit persons to whom the Software is furnished to do so,
# subject to the following conditions:

# The above copyright notice and this permission notice shall be included in all copies
# or substantial portions of the Software.

# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR IMPLIED,
# INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR
# PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE AUTHORS OR COPYRIGHT HOLDERS BE LIABLE
# FOR ANY CLAIM, DAMAGES OR OTHER LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR
# OTHERWISE, ARISING FROM, OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER
# DEALINGS IN THE SOFTWARE.

import json
import math
from argparse import Namespace
from pathlib import Path
from typing import Any, Dict, Iterable

from irand.experiments import EXPERIMENTS
from irand.utils.misc import ConfigError

__all__ = ["ConfigError", "additional_setup_accept", "additional_setup_experiment", "load_config"]


def load_config(path: str, known: Iterable[str]) -> Dict[str, Any]:
    """Reads a JSON config file holding a flat object of argument values.

    Args:
        path (str): file to read.
        known (Iterable[str]): argument names the parser accepts.

    Returns:
        Dict[str, Any]: the values, to be installed as parser defaults.
    """

    try:
        with open(path, encoding="utf-8") as f:
            cfg = json.load(f)
    except OSError as e:
        raise ConfigError(f"config: cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config: {path} is not valid JSON: {e}") from e
    if not isinstance(cfg, dict):
        raise ConfigError(f"config: {path} must hold a JSON object")
    cfg.pop("experiment", None)
    unknown = sorted(set(cfg) - set(known))
    if unknown:
        raise ConfigError(f"config: unknown keys {unknown}")
    return cfg


def _parse_override(item: str) -> tuple:
    key, sep, raw = item.partition("=")
    if not sep or not key:
        raise ConfigError(f"set: expected KEY=VALUE, got {item!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def _require_number(args: Namespace, key: str):
    value = getattr(args, key)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{key}: expected a finite number, got {value!r}")


def _require_int(args: Namespace, key: str, minimum: int):
    value = getattr(args, key)
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{key}: expected an integer >= {minimum}, got {value!r}")


def _runner_setup(args: Namespace):
    _require_int(args, "seed", 0)
    _require_int(args, "workers", 0)
    _require_int(args, "chunk_size", 1)
    args.out = Path(args.out)


def additional_setup_experiment(args: Namespace, known: Iterable[str]):
    """Provides final setup for an experiment run by changing args.

    Applies the ``--set`` overrides, fills the output name, normalizes types and validates
    the configuration, first generically and then through the experiment's own checks.

    Args:
        args (Namespace): object that needs to contain, at least:
        - experiment: experiment name.
        - alpha, beta, p1: model parameters.
        - n_grid, replicas, seed, workers, chunk_size: sampling settings.
        - overrides: list of KEY=VALUE strings.
        - tolerances: optional dict of verdict tolerance overrides.
        known (Iterable[str]): argument names the parser accepts.
    """

    known = set(known)
    for item in args.overrides:
        key, value = _parse_override(item)
        if key not in known or key in ("experiment", "overrides", "config"):
            raise ConfigError(f"set: unknown key {key!r}")
        setattr(args, key, value)

    for key in ("alpha", "beta", "p1"):
        _require_number(args, key)
    if not 0 < args.alpha < args.beta:
        raise ConfigError(f"alpha, beta: need 0 < alpha < beta, got alpha={args.alpha}, beta={args.beta}")
    if not 0 < args.p1 < 1:
        raise ConfigError(f"p1: need 0 < p1 < 1, got {args.p1}")

    if isinstance(args.n_grid, int):
        args.n_grid = [args.n_grid]
    if not isinstance(args.n_grid, list) or not args.n_grid:
        raise ConfigError(f"n_grid: expected a nonempty list of integers, got {args.n_grid!r}")
    if any(isinstance(n, bool) or not isinstance(n, int) or n < 1 for n in args.n_grid):
        raise ConfigError(f"n_grid: values must be positive integers, got {args.n_grid}")
    args.n_grid = sorted(set(args.n_grid))
    _require_int(args, "replicas", 2)
    _runner_setup(args)

    if args.tolerances is None:
        args.tolerances = {}
    if not isinstance(args.tolerances, dict):
        raise ConfigError(f"tolerances: expected a JSON object, got {args.tolerances!r}")
    for key, value in args.tolerances.items():
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value < 0:
            raise ConfigError(f"tolerances.{key}: expected a nonnegative number, got {value!r}")

    if args.name is None:
        args.name = args.experiment

    EXPERIMENTS[args.experiment].validate(args)


def additional_setup_accept(args: Namespace):
    """Provides final setup for the acceptance suite by changing args.

    Args:
        args (Namespace): object that needs to contain scale, seed, workers, chunk_size,
            out and name.
    """

    _runner_setup(args)
    if not args.scale > 0:
        raise ConfigError(f"scale: must be positive, got {args.scale}")
    if args.name is None:
        args.name = "accept_all"
