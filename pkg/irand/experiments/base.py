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
from argparse import ArgumentParser, Namespace
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Type

from irand import __version__
from irand.dynamics.driver import ModelParams
from irand.utils.misc import ConfigError, configure_runner
from irand.utils.writer import ResultWriter


@dataclass
class Check:
    name: str
    value: Any
    threshold: Any
    passed: bool

    def as_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "value": self.value, "threshold": self.threshold, "passed": bool(self.passed)}


@dataclass
class Verdict:
    experiment: str
    checks: List[Check] = field(default_factory=list)
    metrics: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, value: Any, threshold: Any, passed: bool) -> bool:
        self.checks.append(Check(name, value, threshold, bool(passed)))
        return bool(passed)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "experiment": self.experiment,
            "passed": self.passed,
            "checks": [c.as_dict() for c in self.checks],
            "metrics": self.metrics,
        }

    def format_table(self) -> str:
        lines = [f"{self.experiment}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            value = f"{c.value:.6g}" if isinstance(c.value, float) else str(c.value)
            lines.append(f"  {'ok  ' if c.passed else 'FAIL'} {c.name:<28} {value:<14} (threshold {c.threshold})")
        return "\n".join(lines)


class BaseExperiment:
    """Shared plumbing of all experiments: model parameters, tolerance overrides and the
    replica settings every experiment reads.

    Subclasses declare their parameter defaults in ``defaults``, their verdict tolerances
    in ``tolerances`` and implement :meth:`run`.
    """

    name = "base"
    defaults: Dict[str, Any] = {"alpha": 0.5, "beta": 0.75, "p1": 0.5, "n_grid": [100, 1000], "replicas": 200}
    tolerances: Dict[str, float] = {}

    def __init__(self, args: Namespace):
        self.args = args
        self.mp = ModelParams(args.alpha, args.beta, args.p1)
        self.tol = dict(self.tolerances)
        self.tol.update(args.tolerances or {})
        self.seed = args.seed
        self.workers = args.workers

    @staticmethod
    def add_experiment_specific_args(parent_parser: ArgumentParser) -> ArgumentParser:
        """Adds experiment-specific arguments to a parser. The base experiment adds none."""

        return parent_parser

    @classmethod
    def validate(cls, args: Namespace):
        """Raises :class:`ConfigError` for settings this experiment cannot run with."""

        unknown = sorted(set(args.tolerances or {}) - set(cls.tolerances))
        if unknown:
            raise ConfigError(
                f"tolerances: unknown keys {unknown} for {cls.name}, expected a subset of {sorted(cls.tolerances)}"
            )

    def tolerance(self, key: str) -> float:
        return self.tol[key]

    def new_verdict(self) -> Verdict:
        verdict = Verdict(self.name)
        verdict.metrics["tolerances"] = json.loads(json.dumps(self.tol))
        return verdict

    def run(self, writer: ResultWriter) -> Optional[Verdict]:
        raise NotImplementedError


def execute(experiment: Type[BaseExperiment], args: Namespace) -> Verdict:
    """Runs one experiment into ``args.out / args.name``: manifest first, then the tables,
    then the verdict. The output directory is removed again if the run fails and this run
    created it."""

    configure_runner(progress=not args.no_progress, chunk_size=args.chunk_size)
    writer = ResultWriter(args)
    writer.initial_setup()
    try:
        writer.save_manifest(__version__)
        verdict = experiment(args).run(writer)
        writer.write_verdict(verdict.as_dict())
    except BaseException:
        writer.abort()
        raise
    finally:
        writer.finish()
    return verdict
