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
from irand.dynamics.quenched import (
    MAX_EXACT_N,
    an_samples,
    borel_cantelli_series,
    expectation_upper_bound,
    expected_xn_exact,
    expected_xn_mc,
    hoeffding_check,
    quenched_report,
    sandwich_violations,
)
from irand.experiments.base import BaseExperiment, Verdict
from irand.utils.metrics import mean_stderr
from irand.utils.misc import ConfigError
from irand.utils.writer import ResultWriter


class Asymptotics(BaseExperiment):
    """Quenched asymptotics of the backward orbit of 1/2: n^(1/alpha) x_n(omega) against
    c(alpha) p1^(-1/alpha), the A_n statistics, Hoeffding concentration, the sandwich and
    the exact cylinder oracle."""

    name = "asymptotics"
    defaults: Dict[str, Any] = {
        "alpha": 0.5,
        "beta": 0.75,
        "p1": 0.5,
        "n_grid": [100, 1000, 10000, 100000],
        "replicas": 200,
    }
    tolerances = {"median": 0.10, "an": 0.02, "oracle_sigmas": 3.0}

    @staticmethod
    def add_experiment_specific_args(parent_parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
        parser = parent_parser.add_argument_group("asymptotics")

        # A_n statistics
        parser.add_argument("--an_grid", type=int, nargs="+", default=[100, 1000, 10000])
        parser.add_argument("--an_replicas", type=int, default=100)

        # concentration
        parser.add_argument("--hoeffding_n", type=int, nargs="+", default=[100, 1000])
        parser.add_argument("--t_grid", type=float, nargs="+", default=[0.05, 0.1, 0.2])
        parser.add_argument("--hoeffding_replicas", type=int, default=10000)
        parser.add_argument("--bc_terms", type=int, default=10000)

        # sandwich and exact oracle; 0 replicas skips the part
        parser.add_argument("--sandwich_n", type=int, default=10000)
        parser.add_argument("--sandwich_replicas", type=int, default=1000)
        parser.add_argument("--exact_max", type=int, default=16)
        parser.add_argument("--oracle_replicas", type=int, default=10000)

        # one-sided expectation bound, p0 = p0_fraction * p1
        parser.add_argument("--p0_fraction", type=float, default=0.9)
        return parent_parser

    @classmethod
    def validate(cls, args: argparse.Namespace):
        super().validate(args)
        if len(args.n_grid) < 2:
            raise ConfigError("n_grid: asymptotics needs at least two values of n")
        if not 1 <= args.exact_max <= MAX_EXACT_N:
            raise ConfigError(f"exact_max: must lie in [1, {MAX_EXACT_N}], got {args.exact_max}")
        if any(n < 2 for n in args.an_grid):
            raise ConfigError("an_grid: A_n needs n >= 2")
        if not 0 < args.p0_fraction < 1:
            raise ConfigError(f"p0_fraction: must lie in (0, 1), got {args.p0_fraction}")

    def run(self, writer: ResultWriter) -> Verdict:
        args, mp = self.args, self.mp
        verdict = self.new_verdict()
        limit = quenched_limit(mp.alpha, mp.p1)
        verdict.metrics["limit_value"] = limit

        report = quenched_report(mp, args.n_grid, args.replicas, self.seed, self.workers)
        rows = report.rows()
        p0 = args.p0_fraction * mp.p1
        for row in rows:
            row["upper_bound"] = expectation_upper_bound(mp, row["n"], p0)
        writer.write_table("cn", rows)
        writer.write_plot("cn", "cn", "n", ["mean_cn", "median_cn", "limit_value"], logy=False)
        writer.write_plot("l1_error", "cn", "n", ["l1_error"])

        first, last = rows[0], rows[-1]
        rel = abs(last["median_cn"] - limit) / limit
        verdict.add("median_rel_error", rel, self.tolerance("median"), rel <= self.tolerance("median"))
        verdict.add(
            "deviation_decreases",
            abs(last["median_cn"] - limit),
            abs(first["median_cn"] - limit),
            abs(last["median_cn"] - limit) < abs(first["median_cn"] - limit),
        )
        errors = report.l1_errors
        verdict.add("l1_monotone", errors, "strictly decreasing", all(b < a for a, b in zip(errors, errors[1:])))
        excess = last["mean_cn"] - last["upper_bound"] - 3 * last["stderr"]
        verdict.add("expectation_bound", excess, 0.0, excess <= 0)

        if args.an_replicas >= 2:
            an_rows = []
            for n in args.an_grid:
                for variant in ("A", "Aprime"):
                    stats = mean_stderr(an_samples(mp, n, args.an_replicas, self.seed, variant, self.workers))
                    an_rows.append({"n": n, "variant": variant, **stats, "p1": mp.p1})
            writer.write_table("an", an_rows)
            largest = [r for r in an_rows if r["n"] == max(args.an_grid) and r["variant"] == "A"][0]
            gap = abs(largest["mean"] - mp.p1)
            verdict.add("an_concentration", gap, self.tolerance("an"), gap <= self.tolerance("an"))

        if args.hoeffding_replicas >= 2:
            h_rows = []
            for n in args.hoeffding_n:
                h_rows.extend({"n": n, **row} for row in hoeffding_check(
                    mp, n, args.t_grid, args.hoeffding_replicas, self.seed, self.workers
                ).rows)
            writer.write_table("hoeffding", h_rows)
            violations = sum(int(r["violated"]) for r in h_rows)
            verdict.add("hoeffding_violations", violations, 0, violations == 0)
        if args.bc_terms > 0:
            sums = borel_cantelli_series(args.bc_terms)
            verdict.metrics["borel_cantelli_sum"] = sums[-1]

        if args.sandwich_replicas >= 1:
            counts = sandwich_violations(mp, args.sandwich_n, args.sandwich_replicas, self.seed, self.workers)
            verdict.metrics["sandwich"] = counts
            verdict.add("sandwich_violations", counts["violations"], 0, counts["violations"] == 0)

        if args.oracle_replicas >= 2:
            o_rows, worst = [], 0.0
            for n in range(1, args.exact_max + 1):
                exact = expected_xn_exact(mp, n)
                estimate, stderr = expected_xn_mc(mp, n, args.oracle_replicas, self.seed, self.workers)
                sigmas = abs(estimate - exact) / stderr if stderr > 0 else (0.0 if estimate == exact else float("inf"))
                worst = max(worst, sigmas)
                o_rows.append({"n": n, "exact": exact, "estimate": estimate, "stderr": stderr, "sigmas": sigmas})
            writer.write_table("oracle", o_rows)
            limit_sigmas = self.tolerance("oracle_sigmas")
            verdict.add("oracle_max_sigmas", worst, limit_sigmas, worst <= limit_sigmas)
        return verdict
