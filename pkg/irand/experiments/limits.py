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

import numpy as np

from irand.dynamics.correlation import corr_constants
from irand.dynamics.driver import ModelParams
from irand.dynamics.limits import LimitKind, empirical_cf, run_limit_case, select_case, stable_cf
from irand.dynamics.observables import (
    Observable,
    bump_observable,
    center_observable,
    symbol_weighted_observable,
    tent_observable,
    unit_c_observable,
)
from irand.dynamics.ulam import DEFAULT_CELLS, DensityEstimate, annealed_density
from irand.experiments.base import BaseExperiment, Verdict
from irand.utils.misc import ConfigError
from irand.utils.writer import ResultWriter

OBSERVABLES = ("bump", "tent", "symbol", "unit_c")
CHECK_METRICS = {
    "ks": "ks",
    "variance_flat": "variance_ratio",
    "beats_sqrt_n": "ks_sqrt_n",
    "cf": "cf_distance",
    "tail_slope": "tail_slope",
}
CHECK_THRESHOLDS = {"variance_flat": "flatness"}


def build_observable(kind: str, d: DensityEstimate, mp: ModelParams, width: float = 0.5) -> Observable:
    """Named observables of the limit-law experiment.

    ``bump`` and ``tent`` are centered under nu, ``symbol`` is the symbol-weighted tent with
    c = 0 and ``unit_c`` the centered tent rescaled to c = 1.
    """

    if kind == "bump":
        return center_observable(bump_observable(0.6, 0.9), d, mp)
    if kind == "tent":
        return center_observable(tent_observable(width), d, mp)
    if kind == "symbol":
        return symbol_weighted_observable(tent_observable(width), mp)
    if kind == "unit_c":
        return unit_c_observable(d, mp, width)
    raise ValueError(f"unknown observable {kind!r}, expected one of {OBSERVABLES}")


class Limits(BaseExperiment):
    """Distributional limits of Birkhoff sums: the regime is selected from (alpha, c), the
    sums are normalized accordingly and compared with the limit law."""

    name = "limits"
    defaults: Dict[str, Any] = {"alpha": 0.4, "beta": 0.75, "p1": 0.5, "n_grid": [10000], "replicas": 10000}
    tolerances = {"ks": 0.02, "ks_half": 0.05, "flatness": 0.10, "cf": 0.05, "tail_slope": 0.15}

    @staticmethod
    def add_experiment_specific_args(parent_parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
        parser = parent_parser.add_argument_group("limits")

        parser.add_argument("--observable", choices=OBSERVABLES, default="bump")
        parser.add_argument("--tent_width", type=float, default=0.5)
        parser.add_argument("--cells", type=int, default=DEFAULT_CELLS)
        parser.add_argument("--cf_points", type=int, default=41)
        parser.add_argument("--cf_range", type=float, default=5.0)
        return parent_parser

    @classmethod
    def validate(cls, args: argparse.Namespace):
        super().validate(args)
        if args.alpha >= 1:
            raise ConfigError(f"alpha: limit laws need alpha < 1, got {args.alpha}")
        if args.beta >= 1:
            raise ConfigError(f"beta: limit laws need a finite invariant measure, beta < 1, got {args.beta}")
        if any(n < 4 for n in args.n_grid):
            raise ConfigError("n_grid: Birkhoff sums need n >= 4")
        if not 0 < args.tent_width <= 1:
            raise ConfigError(f"tent_width: must lie in (0, 1], got {args.tent_width}")

    def run(self, writer: ResultWriter) -> Verdict:
        args, mp = self.args, self.mp
        verdict = self.new_verdict()

        d, _ = annealed_density(mp, args.cells)
        A, _ = corr_constants(mp, d)
        f = build_observable(args.observable, d, mp, args.tent_width)
        c = f.c_value(mp)
        case = select_case(mp.alpha, c, f.holder_exponent, mp.beta, A)
        verdict.metrics.update({"case": case.kind.value, "c": c, "A": A, "observable": f.name})
        t_grid = np.linspace(-args.cf_range, args.cf_range, args.cf_points)

        rows = []
        for n in sorted(args.n_grid):
            result = run_limit_case(
                mp, f, case, d, n, args.replicas, self.seed, self.workers, t_grid=t_grid, tolerances=self.tol
            )
            rows.append({"n": n, **result.metrics})
            for name, passed in result.checks.items():
                value = result.metrics[CHECK_METRICS[name]]
                threshold = result.thresholds.get(CHECK_THRESHOLDS.get(name, name), "ks < ks_sqrt_n")
                verdict.add(f"{name}@{n}", value, threshold, passed)

            quantiles = np.linspace(0.01, 0.99, 99)
            values = np.quantile(result.normalized.numpy(), quantiles)
            quantile_rows = [{"q": float(q), "value": float(v)} for q, v in zip(quantiles, values)]
            writer.write_table(f"quantiles_n{n}", quantile_rows)
            if case.kind == LimitKind.STABLE:
                empirical = empirical_cf(result.normalized, t_grid)
                target = stable_cf(t_grid, case.alpha, case.c, case.A)
                writer.write_table(
                    f"cf_n{n}",
                    [
                        {"t": float(t), "re": e.real, "im": e.imag, "target_re": g.real, "target_im": g.imag}
                        for t, e, g in zip(t_grid, empirical, target)
                    ],
                )
                writer.write_plot(
                    f"cf_n{n}", f"cf_n{n}", "t", ["re", "target_re", "im", "target_im"], logx=False, logy=False
                )
        writer.write_table("limits", rows)
        return verdict
