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
import os
from argparse import ArgumentParser

DEFAULT_SEED = 1


def model_args(parser: ArgumentParser):
    """Adds the random LSV system {T_alpha, T_beta; p1, 1 - p1} to a parser.

    Defaults are left to the experiment, so an experiment runs with its reference triple
    unless a config file or a flag says otherwise.

    Args:
        parser (ArgumentParser): parser to add model args to.
    """

    parser.add_argument("--alpha", type=float, default=None)
    parser.add_argument("--beta", type=float, default=None)
    parser.add_argument("--p1", type=float, default=None)


def sampling_args(parser: ArgumentParser):
    """Adds Monte Carlo arguments to a parser.

    Args:
        parser (ArgumentParser): parser to add sampling args to.
    """

    parser.add_argument("--n_grid", type=int, nargs="+", default=None)
    parser.add_argument("--replicas", type=int, default=None)
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)

    # replicas are simulated in chunks; workers only change the schedule, never the numbers
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 0)
    parser.add_argument("--chunk_size", type=int, default=1024)


def config_args(parser: ArgumentParser):
    """Adds the JSON config file, flat overrides and verdict tolerances to a parser.

    Args:
        parser (ArgumentParser): parser to add config args to.
    """

    parser.add_argument("--config", type=str, default=None)
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    parser.add_argument("--tolerances", type=json.loads, default=None)


def wandb_args(parser: ArgumentParser):
    """Adds optional wandb run logging to a parser.

    Args:
        parser (ArgumentParser): parser to add wandb args to.
    """

    parser.add_argument("--project", type=str, default="irand")
    parser.add_argument("--entity", type=str, default=None)
    parser.add_argument("--offline", action="store_true")


def acceptance_args(parser: ArgumentParser):
    """Adds acceptance-suite arguments to a parser.

    Args:
        parser (ArgumentParser): parser to add acceptance args to.
    """

    parser.add_argument("--criterion", action="append", default=None, metavar="NAME")

    # multiplies every replica count, for smoke runs
    parser.add_argument("--scale", type=float, default=1.0)
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--workers", type=int, default=os.cpu_count() or 0)
    parser.add_argument("--chunk_size", type=int, default=1024)
