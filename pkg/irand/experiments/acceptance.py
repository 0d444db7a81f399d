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

import filecmp
import tempfile
from argparse import Namespace
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from irand.dynamics.correlation import (
    corr_constants,
    correlation_estimate,
    correlation_slope,
    mc_agreement,
    operator_correlation,
)
from irand.dynamics.driver import ModelParams
from irand.dynamics.limits import LimitKind, run_limit_case, select_case
from irand.dynamics.linearized import infinite_correlations, truncated_return_growth
from irand.dynamics.lsv import quenched_limit
from irand.dynamics.observables import bump_observable, center_observable, unit_c_observable
from irand.dynamics.quenched import (
    QuenchedReport,
    expected_xn_exact,
    expected_xn_mc,
    hoeffding_check,
    quenched_report,
    sandwich_violations,
)
from irand.dynamics.returns import dual_return_check, tail_estimate
from irand.dynamics.ulam import annealed_density, cone_check, refinement_gap
from irand.experiments import EXPERIMENTS
from irand.experiments.base import Verdict, execute
from irand.experiments.limits import CHECK_METRICS, CHECK_THRESHOLDS
from irand.utils.misc import ConfigError, log_grid

DEFAULT = ModelParams(0.5, 0.75, 0.5)
MC_SIGMAS = 4.0


@dataclass
class AcceptanceContext:
    seed: int
    scale: float = 1.0
    workers: int = 0
    cache: Dict[Any, Any] = field(default_factory=dict)

    def replicas(self, M: int) -> int:
        return max(2, int(round(M * self.scale)))

    def density(self, mp: ModelParams) -> tuple:
        key = ("density", mp)
        if key not in self.cache:
            self.cache[key] = annealed_density(mp)
        return self.cache[key]

    def cn_report(self) -> QuenchedReport:
        if "cn" not in self.cache:
            self.cache["cn"] = quenched_report(
                DEFAULT, [100, 1000, 10000, 100000], self.replicas(200), self.seed, self.workers
            )
        return self.cache["cn"]


@dataclass(frozen=True)
class Criterion:
    number: int
    name: str
    run: Callable[[AcceptanceContext], Verdict]


def quenched_asymptotic(ctx: AcceptanceContext) -> Verdict:
    verdict = Verdict("quenched_asymptotic")
    limit = quenched_limit(DEFAULT.alpha, DEFAULT.p1)
    rows = {r["n"]: r for r in ctx.cn_report().rows()}
    rel = abs(rows[100000]["median_cn"] - limit) / limit
    verdict.add("median_rel_error@1e5", rel, 0.10, rel <= 0.10)
    early, late = abs(rows[1000]["median_cn"] - limit), abs(rows[100000]["median_cn"] - limit)
    verdict.add("deviation_1e5_below_1e3", late, early, late < early)
    return verdict


def l1_convergence(ctx: AcceptanceContext) -> Verdict:
    verdict = Verdict("l1_convergence")
    errors = ctx.cn_report().l1_errors
    verdict.add("l1_errors", errors, "strictly decreasing", all(b < a for a, b in zip(errors, errors[1:])))
    return verdict


def oracle_equivalence(ctx: AcceptanceContext) -> Verdict:
    verdict = Verdict("oracle_equivalence")
    for mp in (DEFAULT, ModelParams(0.3, 0.9, 0.7)):
        worst = 0.0
        for n in range(2, 17):
            estimate, stderr = expected_xn_mc(mp, n, ctx.replicas(100000), ctx.seed, ctx.workers)
            worst = max(worst, abs(estimate - expected_xn_exact(mp, n)) / stderr)
        verdict.add(f"max_sigmas({mp.alpha},{mp.beta},{mp.p1})", worst, 3.0, worst <= 3.0)
    return verdict


def return_tail(ctx: AcceptanceContext) -> Verdict:
    verdict = Verdict("return_tail")
    iterate = tail_estimate(DEFAULT, [1, 2, 4, 8, 16], ctx.replicas(100000), ctx.seed, "iterate", ctx.workers)
    worst = max(abs(r["empirical_tail"] - expected_xn_exact(DEFAULT, r["n"])) / r["stderr"] for r in iterate.rows)
    verdict.add("identity_max_sigmas", worst, 3.0, worst <= 3.0)
    conditional = tail_estimate(DEFAULT, [1000], ctx.replicas(10000), ctx.seed, "conditional", ctx.workers)
    scaled = 1000 ** 2 * conditional.rows[0]["empirical_tail"]
    limit = quenched_limit(DEFAULT.alpha, DEFAULT.p1)
    rel = abs(scaled - limit) / limit
    verdict.add("n2_tail_rel_error@1e3", rel, 0.15, rel <= 0.15)
    verdict.metrics["n2_tail"] = scaled
    return verdict


def sandwich(ctx: AcceptanceContext) -> Verdict:
    verdict = Verdict("sandwich")
    counts = sandwich_violations(DEFAULT, 10000, ctx.replicas(1000), ctx.seed, ctx.workers)
    verdict.metrics.update(counts)
    verdict.add("violations", counts["violations"], 0, counts["violations"] == 0)
    return verdict


def hoeffding(ctx: AcceptanceContext) -> Verdict:
    verdict = Verdict("hoeffding")
    for n in (100, 1000):
        report = hoeffding_check(DEFAULT, n, [0.05, 0.1, 0.2], ctx.replicas(10000), ctx.seed, ctx.workers)
        verdict.add(f"exceedances@{n}", report.violations, 0, report.passed)
    return verdict


def invariant_density(ctx: AcceptanceContext) -> Verdict:
    verdict = Verdict("invariant_density")
    d, _ = ctx.density(DEFAULT)
    verdict.add("residual", d.residual, 1e-8, d.residual < 1e-8)
    cone = cone_check(d, DEFAULT.beta, 4.0 / (1.0 - DEFAULT.beta))
    verdict.metrics["cone"] = cone.as_dict()
    verdict.add("cone", cone.worst_integral_ratio, 1.0, cone.passed)
    gaps = [g["l1_gap"] for g in refinement_gap(DEFAULT, [2 ** 12, 2 ** 13])]
    verdict.add("refinement_gap", gaps, "decreasing", gaps[1] < gaps[0])
    return verdict


def correlation_decay(ctx: AcceptanceContext) -> Verdict:
    verdict = Verdict("correlation_decay")
    d, matrix = ctx.density(DEFAULT)
    phi, psi = bump_observable(0.6, 0.9), bump_observable(0.65, 0.85)
    rows = operator_correlation(phi, psi, log_grid(100, 10000, 8), DEFAULT, d, matrix)
    slope, r2 = correlation_slope(rows, 100, 10000)
    target = 1.0 - 1.0 / DEFAULT.alpha
    verdict.add("slope", slope, [target - 0.15, target + 0.15], abs(slope - target) <= 0.15)
    verdict.metrics["r2"] = r2

    grid = [1, 2, 4, 8]
    exact = operator_correlation(phi, psi, grid, DEFAULT, d, matrix)
    estimated = correlation_estimate(phi, psi, grid, DEFAULT, d, ctx.replicas(100000), ctx.seed, ctx.workers)
    worst = mc_agreement(estimated, exact)
    verdict.add("mc_agreement_sigmas", worst, MC_SIGMAS, worst <= MC_SIGMAS)
    return verdict


def _limit_verdict(ctx: AcceptanceContext, name: str, mp: ModelParams, kind: LimitKind, build) -> Verdict:
    verdict = Verdict(name)
    d, _ = ctx.density(mp)
    A, _ = corr_constants(mp, d)
    f = build(d, mp)
    case = select_case(mp.alpha, f.c_value(mp), f.holder_exponent, mp.beta, A)
    verdict.add("case", case.kind.value, kind.value, case.kind == kind)
    result = run_limit_case(mp, f, case, d, 10000, ctx.replicas(10000), ctx.seed, ctx.workers)
    verdict.metrics.update(result.metrics)
    for check, passed in result.checks.items():
        threshold = result.thresholds.get(CHECK_THRESHOLDS.get(check, check), "ks < ks_sqrt_n")
        verdict.add(check, result.metrics[CHECK_METRICS[check]], threshold, passed)
    return verdict


def clt(ctx: AcceptanceContext) -> Verdict:
    return _limit_verdict(
        ctx,
        "clt",
        ModelParams(0.4, 0.75, 0.5),
        LimitKind.CLT,
        lambda d, mp: center_observable(bump_observable(0.6, 0.9), d, mp),
    )


def stable_law(ctx: AcceptanceContext) -> Verdict:
    return _limit_verdict(ctx, "stable_law", ModelParams(0.75, 0.9, 0.5), LimitKind.STABLE, unit_c_observable)


def half_case(ctx: AcceptanceContext) -> Verdict:
    return _limit_verdict(ctx, "half_case", DEFAULT, LimitKind.HALF, unit_c_observable)


def infinite_growth(ctx: AcceptanceContext) -> Verdict:
    verdict = Verdict("infinite_growth")
    caps = [100, 1000, 10000, 100000, 1000000]
    power = truncated_return_growth(ModelParams(2.0, 3.0, 0.5), caps, ctx.replicas(10000), ctx.seed, ctx.workers)
    verdict.add("slope(2,3)", power.slope, [0.4, 0.6], abs(power.slope - 0.5) <= 0.1)
    logarithmic = truncated_return_growth(ModelParams(1.0, 2.0, 0.5), caps, ctx.replicas(10000), ctx.seed, ctx.workers)
    verdict.add("log_r2(1,2)", logarithmic.r2, 0.99, logarithmic.r2 > 0.99)
    return verdict


def infinite_correlation(ctx: AcceptanceContext) -> Verdict:
    verdict = Verdict("infinite_correlation")
    mp = ModelParams(2.0, 3.0, 0.5)
    f, g = bump_observable(0.6, 0.9), bump_observable(0.6, 0.75)
    ff, fg = infinite_correlations(
        [(f, f), (f, g)], mp, log_grid(100, 10000, 8), ctx.replicas(10000), ctx.seed, ctx.workers, (100, 10000)
    )
    verdict.add("slope", ff.fitted_slope, [-0.6, -0.4], abs(ff.fitted_slope + 0.5) <= 0.1)
    ratio = sum(r["estimate"] for r in ff.rows) / sum(r["estimate"] for r in fg.rows)
    expected = f.evaluator.integral() / g.evaluator.integral()
    verdict.add("pair_ratio", ratio, f"{expected:.6g} +/- 10%", abs(ratio / expected - 1.0) <= 0.1)
    return verdict


def dual_return_times(ctx: AcceptanceContext) -> Verdict:
    verdict = Verdict("dual_return_times")
    dual = dual_return_check(DEFAULT, ctx.replicas(10000), ctx.seed, cap=10 ** 6)
    verdict.metrics.update(dual)
    verdict.add("mismatches", dual["mismatches"], 0, dual["mismatches"] == 0)
    return verdict


REDUCED_RUNS = {
    "asymptotics": [
        "--n_grid", "10", "100", "1000",
        "--replicas", "50",
        "--an_grid", "10", "100",
        "--an_replicas", "20",
        "--hoeffding_replicas", "200",
        "--sandwich_n", "100",
        "--sandwich_replicas", "20",
        "--exact_max", "8",
        "--oracle_replicas", "200",
        "--bc_terms", "100",
    ],
    "tail": [
        "--n_grid", "1", "2", "4", "8", "100",
        "--replicas", "2000",
        "--conditional_replicas", "200",
        "--dual_samples", "50",
        "--passage_samples", "50",
        "--partition_n", "6",
    ],
    "density": ["--cells", "1024", "--refinement_cells", "64", "128"],
    "correlation": [
        "--cells", "1024",
        "--n_grid", "1", "2", "4", "8", "16", "32",
        "--fit_range", "4", "32",
        "--mc_n_grid", "0", "1", "2",
        "--replicas", "500",
        "--tail_replicas", "200",
    ],
    "limits": ["--n_grid", "64", "--replicas", "200", "--cells", "1024", "--cf_points", "5"],
    "infinite": [
        "--caps", "10", "100",
        "--growth_replicas", "100",
        "--n_grid", "10", "20", "40",
        "--replicas", "200",
        "--burn", "2",
        "--burn_replicas", "100",
    ],
}


def _reduced_run(name: str, extra: List[str], out: Path, seed: int, workers: int):
    from irand.args.setup import parse_args_experiment

    args = parse_args_experiment(
        [name, *extra, "--out", str(out), "--name", name]
        + ["--seed", str(seed), "--workers", str(workers), "--no_progress"]
    )
    execute(EXPERIMENTS[name], args)


def determinism(ctx: AcceptanceContext) -> Verdict:
    verdict = Verdict("determinism")
    with tempfile.TemporaryDirectory() as tmp:
        first, second = Path(tmp) / "first", Path(tmp) / "second"
        for name, extra in REDUCED_RUNS.items():
            _reduced_run(name, extra, first, ctx.seed, 0)
            _reduced_run(name, extra, second, ctx.seed, ctx.workers)
            files = sorted(p.name for p in (first / name).iterdir() if p.suffix == ".csv" or p.name == "verdict.json")
            _, mismatch, errors = filecmp.cmpfiles(first / name, second / name, files, shallow=False)
            identical = len(files) - len(mismatch) - len(errors)
            verdict.add(f"{name}_identical_files", identical, len(files), not mismatch and not errors)
    return verdict


CRITERIA = [
    Criterion(1, "quenched_asymptotic", quenched_asymptotic),
    Criterion(2, "l1_convergence", l1_convergence),
    Criterion(3, "oracle_equivalence", oracle_equivalence),
    Criterion(4, "return_tail", return_tail),
    Criterion(5, "sandwich", sandwich),
    Criterion(6, "hoeffding", hoeffding),
    Criterion(7, "invariant_density", invariant_density),
    Criterion(8, "correlation_decay", correlation_decay),
    Criterion(9, "clt", clt),
    Criterion(10, "stable_law", stable_law),
    Criterion(11, "half_case", half_case),
    Criterion(12, "infinite_growth", infinite_growth),
    Criterion(13, "infinite_correlation", infinite_correlation),
    Criterion(14, "dual_return_times", dual_return_times),
    Criterion(15, "determinism", determinism),
]


def select_criteria(selection: Optional[List[str]]) -> List[Criterion]:
    """Criteria chosen by name or number; all of them when ``selection`` is empty."""

    if not selection:
        return list(CRITERIA)
    by_key = {c.name: c for c in CRITERIA}
    by_key.update({str(c.number): c for c in CRITERIA})
    unknown = [s for s in selection if s not in by_key]
    if unknown:
        names = [c.name for c in CRITERIA]
        raise ConfigError(f"criterion: unknown criteria {unknown}, expected names or numbers from {names}")
    return [by_key[s] for s in selection]


def run_acceptance(args: Namespace) -> Dict[str, Any]:
    """Runs the selected criteria and returns the machine-readable summary."""

    ctx = AcceptanceContext(seed=args.seed, scale=args.scale, workers=args.workers)
    results = []
    for criterion in select_criteria(args.criterion):
        verdict = criterion.run(ctx)
        results.append({"number": criterion.number, **verdict.as_dict()})
    return {
        "seed": args.seed,
        "scale": args.scale,
        "passed": all(r["passed"] for r in results),
        "criteria": results,
    }
