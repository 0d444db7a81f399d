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
from typing import Any, Dict

from irand.dynamics.lsv import quenched_limit
from irand.dynamics.quenched import MAX_EXACT_N, expected_xn_exact
from irand.dynamics.returns import dual_return_check, partition_completeness, passage_check, tail_estimate
from irand.experiments.base import BaseExperiment, Verdict
from irand.utils.misc import ConfigError
from irand.utils.writer import ResultWriter


class ReturnTail(BaseExperiment):
    """Return times to Delta_0: the tail P(R > n) for uniform starts by simulation and by
    the conditional identity, its exact values for small n, and the structural checks of the
    return partition."""

    name = "tail"
    defaults: Dict[str, Any] = {
        "alpha": 0.5,
        "beta": 0.75,
        "p1": 0.5,
        "n_grid": [1, 2, 4, 8, 16, 100, 1000],
        "replicas": 100000,
    }
    tolerances = {"identity_sigmas": 3.0, "tail_constant": 0.15, "partition": 1e-10}

    @staticmethod
    def add_experiment_specific_args(parent_parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
        parser = parent_parser.add_argument_group("tail")

        parser.add_argument("--conditional_replicas", type=int, default=10000)
        parser.add_argument("--dual_samples", type=int, default=10000)
        parser.add_argument("--passage_samples", type=int, default=1000)
        parser.add_argument("--passage_max_R", type=int, default=10)
        parser.add_argument("--partition_n", type=int, default=12)
        return parent_parser

    @classmethod
    def validate(cls, args: argparse.Namespace):
        super().validate(args)
        if not 1 <= args.partition_n <= 12:
            raise ConfigError(f"partition_n: must lie in [1, 12], got {args.partition_n}")

    def run(self, writer: ResultWriter) -> Verdict:
        args, mp = self.args, self.mp
        verdict = self.new_verdict()
        limit = quenched_limit(mp.alpha, mp.p1)
        verdict.metrics["limit_value"] = limit

        iterate = tail_estimate(mp, args.n_grid, args.replicas, self.seed, "iterate", self.workers)
        worst = 0.0
        for row in iterate.rows:
            row["scaled_tail"] = row["n"] ** (1.0 / mp.alpha) * row["empirical_tail"]
            if row["n"] <= MAX_EXACT_N:
                exact = expected_xn_exact(mp, row["n"])
                row["exact"] = exact
                if row["stderr"] > 0:
                    worst = max(worst, abs(row["empirical_tail"] - exact) / row["stderr"])
                elif row["empirical_tail"] != exact:
                    worst = float("inf")
            else:
                row["exact"] = float("nan")
        writer.write_table("tail_iterate", iterate.rows)
        limit_sigmas = self.tolerance("identity_sigmas")
        verdict.add("identity_max_sigmas", worst, limit_sigmas, worst <= limit_sigmas)

        if args.conditional_replicas >= 2:
            conditional = tail_estimate(
                mp, args.n_grid, args.conditional_replicas, self.seed, "conditional", self.workers
            )
            for row in conditional.rows:
                row["scaled_tail"] = row["n"] ** (1.0 / mp.alpha) * row["empirical_tail"]
            writer.write_table("tail_conditional", conditional.rows)
            writer.write_plot(
                "tail", "tail_conditional", "n", ["empirical_tail", "predicted_tail"], title="P(R > n)"
            )
            last = conditional.rows[-1]
            rel = abs(last["scaled_tail"] - limit) / limit
            tol = self.tolerance("tail_constant")
            verdict.add("tail_constant_rel_error", rel, tol, rel <= tol)

        if args.dual_samples > 0:
            dual = dual_return_check(mp, args.dual_samples, self.seed)
            verdict.metrics["dual"] = dual
            verdict.add("dual_mismatches", dual["mismatches"], 0, dual["mismatches"] == 0)
        if args.passage_samples > 0:
            passage = passage_check(mp, args.passage_samples, self.seed, args.passage_max_R)
            verdict.metrics["passage"] = passage
            verdict.add("passage_violations", passage["violations"], 0, passage["violations"] == 0)

        partition = partition_completeness(mp, args.partition_n)
        verdict.metrics["partition"] = partition
        tol = self.tolerance("partition")
        verdict.add("partition_residual", partition["residual"], tol, partition["residual"] <= tol)
        return verdict
