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

from irand.dynamics.correlation import (
    corr_constants,
    correlation_estimate,
    correlation_slope,
    mc_agreement,
    operator_correlation,
    stationary_tail,
)
from irand.dynamics.observables import bump_observable
from irand.dynamics.ulam import DEFAULT_CELLS, annealed_density
from irand.experiments.base import BaseExperiment, Verdict
from irand.utils.misc import ConfigError, log_grid
from irand.utils.writer import ResultWriter


class Correlation(BaseExperiment):
    """Decay of correlations for observables supported away from the neutral point.

    The slope is fitted on the deterministic operator correlations; Monte Carlo estimates on
    small n and the stationary return tail are written alongside as cross-checks.
    """

    name = "correlation"
    defaults: Dict[str, Any] = {
        "alpha": 0.5,
        "beta": 0.75,
        "p1": 0.5,
        "n_grid": log_grid(1, 10000, 8),
        "replicas": 100000,
    }
    tolerances = {"slope": 0.15, "mc_sigmas": 4.0}

    @staticmethod
    def add_experiment_specific_args(parent_parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
        parser = parent_parser.add_argument_group("correlation")

        parser.add_argument("--cells", type=int, default=DEFAULT_CELLS)
        parser.add_argument("--phi_support", type=float, nargs=2, default=[0.6, 0.9])
        parser.add_argument("--psi_support", type=float, nargs=2, default=[0.65, 0.85])
        parser.add_argument("--fit_range", type=float, nargs=2, default=[100, 10000])
        parser.add_argument("--mc_n_grid", type=int, nargs="+", default=[0, 1, 2, 4, 8, 16, 32])
        parser.add_argument("--tail_replicas", type=int, default=10000)
        return parent_parser

    @classmethod
    def validate(cls, args: argparse.Namespace):
        super().validate(args)
        if not args.alpha < args.beta < 1:
            raise ConfigError(f"beta: correlation decay needs alpha < beta < 1, got beta={args.beta}")
        for key in ("phi_support", "psi_support"):
            lo, hi = getattr(args, key)
            if not 0.5 <= lo < hi <= 1:
                raise ConfigError(f"{key}: need 1/2 <= lo < hi <= 1, got {lo}, {hi}")
        if args.fit_range[0] >= args.fit_range[1]:
            raise ConfigError(f"fit_range: need lo < hi, got {args.fit_range}")

    def run(self, writer: ResultWriter) -> Verdict:
        args, mp = self.args, self.mp
        verdict = self.new_verdict()

        d, matrix = annealed_density(mp, args.cells)
        A, sharp = corr_constants(mp, d)
        verdict.metrics.update({"A": A, "sharp": sharp, "residual": d.residual})
        phi = bump_observable(*args.phi_support)
        psi = bump_observable(*args.psi_support)

        rows = operator_correlation(phi, psi, args.n_grid, mp, d, matrix)
        writer.write_table("correlation", rows)
        writer.write_plot("correlation", "correlation", "n", ["corr", "predicted"], title="Cor(phi, psi)(n)")
        slope, r2 = correlation_slope(rows, *args.fit_range)
        target = 1.0 - 1.0 / mp.alpha
        verdict.metrics.update({"slope": slope, "slope_r2": r2, "slope_target": target})
        verdict.add("slope", slope, [target - self.tolerance("slope"), target + self.tolerance("slope")],
                    abs(slope - target) <= self.tolerance("slope"))
        last = rows[-1]
        verdict.metrics["ratio_to_sharp"] = last["corr"] / last["predicted"] if last["predicted"] else float("nan")

        if args.replicas >= 2:
            mc_rows = correlation_estimate(phi, psi, args.mc_n_grid, mp, d, args.replicas, self.seed, self.workers)
            operator_rows = operator_correlation(phi, psi, args.mc_n_grid, mp, d, matrix)
            exact = {r["n"]: r["corr"] for r in operator_rows}
            for row in mc_rows:
                row["operator"] = exact[row["n"]]
            writer.write_table("correlation_mc", mc_rows)
            worst = mc_agreement(mc_rows, operator_rows)
            verdict.add("mc_agreement_sigmas", worst, self.tolerance("mc_sigmas"), worst <= self.tolerance("mc_sigmas"))

        if args.tail_replicas >= 2:
            tail_grid = [n for n in args.n_grid if n >= 1]
            tail_rows = stationary_tail(mp, d, tail_grid, args.tail_replicas, self.seed, self.workers)
            writer.write_table("stationary_tail", tail_rows)
            writer.write_plot("stationary_tail", "stationary_tail", "n", ["tail", "predicted"])
        return verdict
