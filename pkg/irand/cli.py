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

import sys
from typing import List, Optional

from irand import __version__
from irand.args.setup import parse_args_accept, parse_args_experiment
from irand.experiments import EXPERIMENTS
from irand.experiments.acceptance import run_acceptance
from irand.experiments.base import execute
from irand.utils.misc import ConfigError, configure_runner
from irand.utils.writer import ResultWriter

EXIT_PASS = 0
EXIT_VERDICT_FAILED = 1
EXIT_CONFIG_ERROR = 2


def accept_all(argv: List[str]) -> int:
    args = parse_args_accept(argv)
    configure_runner(progress=not args.no_progress, chunk_size=args.chunk_size)
    writer = ResultWriter(args)
    writer.initial_setup()
    try:
        writer.save_manifest(__version__)
        summary = run_acceptance(args)
        writer.write_verdict(summary, name="accept_all")
    except BaseException:
        writer.abort()
        raise
    finally:
        writer.finish()

    for result in summary["criteria"]:
        print(f"{result['number']:>2} {result['experiment']:<22} {'PASS' if result['passed'] else 'FAIL'}")
    print(f"summary written to {writer.path / 'accept_all.json'}")
    return EXIT_PASS if summary["passed"] else EXIT_VERDICT_FAILED


def run(argv: List[str]) -> int:
    args = parse_args_experiment(argv)
    verdict = execute(EXPERIMENTS[args.experiment], args)
    print(verdict.format_table())
    return EXIT_PASS if verdict.passed else EXIT_VERDICT_FAILED


def main(argv: Optional[List[str]] = None) -> int:
    """``irand <experiment> [options]`` or ``irand accept-all [options]``.

    Returns 0 when every verdict passes, 1 when a verdict fails and 2 for configuration
    errors.
    """

    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if argv and argv[0] == "accept-all":
            return accept_all(argv[1:])
        return run(argv)
    except ConfigError as e:
        print(f"irand: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except SystemExit as e:
        # argparse reports usage errors with status 2
        return e.code if isinstance(e.code, int) else EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
