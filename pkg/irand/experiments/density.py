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

from irand.dynamics.correlation import corr_constants
from irand.dynamics.ulam import (
    DEFAULT_CELLS,
    annealed_density,
    cone_check,
    density_exponent,
    refinement_gap,
)
from irand.experiments.base import BaseExperiment, Verdict
from irand.utils.misc import ConfigError
from irand.utils.writer import ResultWriter


class Density(BaseExperiment):
    """Invariant density of the annealed transfer operator on a refined Ulam grid, its cone
    regularity, refinement convergence and power-law behaviour at the neutral point."""

    name = "density"
    defaults: Dict[str, Any] = {"alpha": 0.5, "beta": 0.75, "p1": 0.5, "n_grid": [1], "replicas": 2}
    tolerances = {"residual": 1e-8, "normalization": 1e-10}

    @staticmethod
    def add_experiment_specific_args(parent_parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
        parser = parent_parser.add_argument_group("density")

        parser.add_argument("--cells", type=int, default=DEFAULT_CELLS)
        parser.add_argument("--refinement_cells", type=int, nargs="+", default=[2 ** 12, 2 ** 13])
        parser.add_argument("--cone_a", type=float, default=None)
        parser.add_argument("--power_tol", type=float, default=1e-12)
        parser.add_argument("--max_iter", type=int, default=10000)
        return parent_parser

    @classmethod
    def validate(cls, args: argparse.Namespace):
        super().validate(args)
        if args.beta >= 1:
            raise ConfigError(
                f"beta: the invariant density is a probability density only for beta < 1, got {args.beta}"
            )
        if args.cells < 8 or any(k < 8 for k in args.refinement_cells):
            raise ConfigError(f"cells: Ulam grids need at least 8 cells, got {args.cells} and {args.refinement_cells}")

    def run(self, writer: ResultWriter) -> Verdict:
        args, mp = self.args, self.mp
        verdict = self.new_verdict()

        d, _ = annealed_density(mp, args.cells, tol=args.power_tol, max_iter=args.max_iter)
        grid = d.grid
        writer.write_table(
            "density",
            [
                {"left": float(l), "right": float(r), "value": float(v)}
                for l, r, v in zip(grid.left, grid.right, d.cell_values)
            ],
        )
        writer.write_plot("density", "density", "left", ["value"], title="invariant density")
        verdict.metrics.update({"iterations": d.iterations, "converged": d.converged})
        verdict.add("residual", d.residual, self.tolerance("residual"), d.residual < self.tolerance("residual"))
        mass_error = abs(d.total() - 1.0)
        tol = self.tolerance("normalization")
        verdict.add("normalization", mass_error, tol, mass_error <= tol)

        cone = cone_check(d, mp.beta, args.cone_a)
        verdict.metrics["cone"] = cone.as_dict()
        verdict.add("cone", cone.worst_integral_ratio, 1.0, cone.passed)

        gaps = refinement_gap(mp, args.refinement_cells, tol=args.power_tol)
        writer.write_table("refinement", gaps)
        if len(gaps) >= 2:
            values = [g["l1_gap"] for g in gaps]
            verdict.add("refinement_decreasing", values, "decreasing", values[-1] < values[0])

        gamma, r2 = density_exponent(d)
        A, sharp = corr_constants(mp, d)
        verdict.metrics.update(
            {"density_exponent": gamma, "density_exponent_r2": r2, "f_half": d.right_value(0.5), "A": A, "sharp": sharp}
        )
        return verdict
