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

from irand.dynamics.linearized import burn_in_shift, infinite_correlations, truncated_return_growth
from irand.dynamics.observables import bump_observable
from irand.experiments.base import BaseExperiment, Verdict
from irand.utils.misc import ConfigError, log_grid
from irand.utils.writer import ResultWriter


class Infinite(BaseExperiment):
    """Infinite-measure regime (alpha >= 1) of the linearized model: growth of truncated
    return times, n^(1 - 1/alpha) scaling of correlations on Delta_0 and the factorized
    limit across observable pairs."""

    name = "infinite"
    defaults: Dict[str, Any] = {
        "alpha": 2.0,
        "beta": 3.0,
        "p1": 0.5,
        "n_grid": log_grid(100, 10000, 8),
        "replicas": 10000,
    }
    tolerances = {"growth_slope": 0.1, "log_r2": 0.99, "corr_slope": 0.1, "pair_ratio": 0.10, "burn_ks": 0.03}

    @staticmethod
    def add_experiment_specific_args(parent_parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
        parser = parent_parser.add_argument_group("infinite")

        parser.add_argument("--caps", type=int, nargs="+", default=[100, 1000, 10000, 100000, 1000000])
        parser.add_argument("--growth_replicas", type=int, default=10000)
        parser.add_argument("--f_support", type=float, nargs=2, default=[0.6, 0.9])
        parser.add_argument("--g_support", type=float, nargs=2, default=[0.6, 0.75])
        parser.add_argument("--burn", type=int, default=5)
        parser.add_argument("--burn_replicas", type=int, default=10000)
        parser.add_argument("--allow_finite_control", action="store_true")
        return parent_parser

    @classmethod
    def validate(cls, args: argparse.Namespace):
        super().validate(args)
        if args.alpha < 1 and not args.allow_finite_control:
            raise ConfigError(
                f"alpha: the infinite-measure experiment needs alpha >= 1, got {args.alpha}; "
                "pass --allow_finite_control to run the finite-measure control"
            )
        if len(args.caps) < 2 or min(args.caps) < 1:
            raise ConfigError(f"caps: need at least two positive caps, got {args.caps}")
        for key in ("f_support", "g_support"):
            lo, hi = getattr(args, key)
            if not 0.5 <= lo < hi <= 1:
                raise ConfigError(f"{key}: need 1/2 <= lo < hi <= 1, got {lo}, {hi}")

    def run(self, writer: ResultWriter) -> Verdict:
        args, mp = self.args, self.mp
        verdict = self.new_verdict()
        exponent = 1.0 - 1.0 / mp.alpha

        if args.growth_replicas >= 2:
            growth = truncated_return_growth(mp, args.caps, args.growth_replicas, self.seed, self.workers)
            writer.write_table("growth", growth.rows)
            writer.write_plot("growth", "growth", "cap", ["mean"], logy=mp.alpha != 1, title="E min(R, cap)")
            verdict.metrics["growth"] = {
                "regime": growth.regime,
                "slope": growth.slope,
                "r2": growth.r2,
                "relative_change": growth.relative_change,
            }
            if growth.regime == "power":
                tol = self.tolerance("growth_slope")
                band = [exponent - tol, exponent + tol]
                verdict.add("growth_slope", growth.slope, band, abs(growth.slope - exponent) <= tol)
            elif growth.regime == "logarithmic":
                r2_min = self.tolerance("log_r2")
                verdict.add("log_growth_r2", growth.r2, r2_min, growth.r2 > r2_min)

        f = bump_observable(*args.f_support)
        g = bump_observable(*args.g_support)
        expected_ratio = f.evaluator.integral() / g.evaluator.integral()
        results = infinite_correlations(
            [(f, f), (f, g)],
            mp,
            args.n_grid,
            args.replicas,
            self.seed,
            self.workers,
            fit_range=(args.n_grid[0], args.n_grid[-1]),
        )
        for label, result in zip(("ff", "fg"), results):
            writer.write_table(f"correlation_{label}", result.rows)
        writer.write_plot("correlation_ff", "correlation_ff", "n", ["estimate"], title="int f f o S^n")
        first = results[0]
        verdict.metrics["correlation"] = {"regime": first.regime, "slope": first.fitted_slope, "r2": first.r2}
        if first.regime == "power" and mp.alpha > 1:
            tol = self.tolerance("corr_slope")
            band = [exponent - tol, exponent + tol]
            verdict.add("corr_slope", first.fitted_slope, band, abs(first.fitted_slope - exponent) <= tol)

        lo, hi = args.n_grid[0], args.n_grid[-1]
        sums = [sum(r["estimate"] for r in res.rows if lo <= r["n"] <= hi) for res in results]
        ratio = sums[0] / sums[1] if sums[1] else float("nan")
        verdict.metrics["expected_pair_ratio"] = expected_ratio
        rel = abs(ratio / expected_ratio - 1.0)
        tol = self.tolerance("pair_ratio")
        verdict.add("pair_ratio", ratio, f"{expected_ratio:.6g} +/- {tol:.0%}", rel <= tol)

        if args.burn > 0 and args.burn_replicas >= 2:
            shift = burn_in_shift(mp, args.burn, args.burn_replicas, self.seed, workers=self.workers)
            verdict.metrics["burn_in"] = shift
            verdict.add("burn_in_ks", shift["ks"], self.tolerance("burn_ks"), shift["ks"] <= self.tolerance("burn_ks"))
        return verdict
