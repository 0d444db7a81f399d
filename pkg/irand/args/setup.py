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

import argparse
from typing import List, Optional

from irand.args.experiment import acceptance_args, config_args, model_args, sampling_args, wandb_args
from irand.args.utils import additional_setup_accept, additional_setup_experiment, load_config
from irand.experiments import EXPERIMENTS
from irand.utils.writer import ResultWriter


def parse_args_experiment(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parses model, sampling, config, output, experiment specific and additional args.

    First adds shared args, then pulls the experiment name from the command and proceeds to
    add experiment specific args and defaults from the desired class. A ``--config`` file
    replaces those defaults, explicit flags override the file and ``--set KEY=VALUE``
    overrides everything. If wandb is enabled, it adds the wandb args. Finally, adds
    additional non-user given parameters and validates the result.

    Args:
        argv (Optional[List[str]], optional): arguments without the program name. Defaults
            to ``sys.argv[1:]``.

    Returns:
        argparse.Namespace: a namespace containing all args needed for the experiment.
    """

    parser = argparse.ArgumentParser(prog="irand")
    parser.add_argument("experiment", choices=sorted(EXPERIMENTS))

    # add shared arguments
    model_args(parser)
    sampling_args(parser)
    config_args(parser)
    parser = ResultWriter.add_writer_args(parser)
    parser.add_argument("--wandb", action="store_true")

    # THIS LINE IS KEY TO PULL THE EXPERIMENT NAME
    temp_args, _ = parser.parse_known_args(argv)

    # add experiment specific args and defaults
    experiment = EXPERIMENTS[temp_args.experiment]
    parser = experiment.add_experiment_specific_args(parser)
    parser.set_defaults(**experiment.defaults)

    if temp_args.wandb:
        wandb_args(parser)

    known = vars(parser.parse_known_args([temp_args.experiment])[0])
    if temp_args.config is not None:
        parser.set_defaults(**load_config(temp_args.config, known))

    # parse args
    args = parser.parse_args(argv)

    # prepare arguments with additional setup
    additional_setup_experiment(args, known)

    return args


def parse_args_accept(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parses the acceptance-suite args.

    Args:
        argv (Optional[List[str]], optional): arguments after ``accept-all``. Defaults to
            ``sys.argv[2:]``.

    Returns:
        argparse.Namespace: a namespace containing all args needed for the acceptance suite.
    """

    parser = argparse.ArgumentParser(prog="irand accept-all")
    acceptance_args(parser)
    parser = ResultWriter.add_writer_args(parser)
    parser.add_argument("--wandb", action="store_true")
    temp_args, _ = parser.parse_known_args(argv)
    if temp_args.wandb:
        wandb_args(parser)

    args = parser.parse_args(argv)
    additional_setup_accept(args)

    return args
