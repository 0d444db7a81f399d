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

import math
from typing import Dict, List, Sequence, Tuple

import torch
from scipy import sparse

from irand.dynamics.driver import ModelParams, draw_codes
from irand.dynamics.lsv import forward_tensor, limit_constant
from irand.dynamics.observables import Observable, cell_averages
from irand.dynamics.quenched import xn_batch
from irand.dynamics.ulam import DensityEstimate, sample_density
from irand.utils.metrics import mean_stderr
from irand.utils.misc import chunk_kernel, loglog_slope, run_replicas

# absolute allowance for the Ulam discretization of the operator correlations
MC_SLACK = 2e-4


def corr_constants(mp: ModelParams, d: DensityEstimate) -> Tuple[float, float]:
    """The tail constant A = c(alpha) p1^(-1/alpha) f*(1/2+) / 2 and the correlation
    prefactor A / (1/alpha - 1) = f*(1/2+) (alpha p1)^(-1/alpha) / (4 (1/alpha - 1)).

    f*(1/2) is read from the cell immediately right of 1/2.
    """

    if mp.p1 <= 0:
        raise ValueError("the tail constant needs p1 > 0")
    h = d.right_value(0.5)
    A = 0.5 * limit_constant(mp.alpha) * mp.p1 ** (-1.0 / mp.alpha) * h
    if mp.alpha >= 1:
        return A, float("inf")
    return A, A / (1.0 / mp.alpha - 1.0)


def predicted_correlation(mp: ModelParams, d: DensityEstimate, n: int, mean_phi: float, mean_psi: float) -> float:
    _, sharp = corr_constants(mp, d)
    return sharp * mean_phi * mean_psi * n ** (1.0 - 1.0 / mp.alpha)


def _orbit_kernel(
    size: int,
    generator: torch.Generator,
    mp: ModelParams,
    d: DensityEstimate,
    phi: Observable,
    psi: Observable,
    n_grid: Sequence[int],
) -> Dict[str, torch.Tensor]:
    horizon = max(phi.symbol_horizon, psi.symbol_horizon)
    x = sample_density(d, size, generator)
    codes = draw_codes(mp, size, max(n_grid) + horizon + 1, generator)
    psi0 = psi(x, codes)
    wanted = set(n_grid)
    columns = {}
    for k in range(max(n_grid) + 1):
        if k in wanted:
            columns[k] = phi(x, codes[:, k:])
        x = forward_tensor(mp.exponents(codes[:, k]), x)
    return {"psi": psi0, "phi": torch.stack([columns[n] for n in n_grid], dim=1)}


def correlation_estimate(
    phi: Observable,
    psi: Observable,
    n_grid: Sequence[int],
    mp: ModelParams,
    d: DensityEstimate,
    M: int,
    seed: int,
    workers: int = 0,
) -> List[Dict[str, float]]:
    """Monte Carlo Cor(phi, psi)(n) = int phi o S^n psi dnu - int phi dnu int psi dnu from
    stationary starts.

    Returns:
        List[Dict[str, float]]: rows (n, corr, stderr, predicted); ``predicted`` is the
            sharp asymptotic for the estimated means when alpha < 1, otherwise nan.
    """

    n_grid = sorted(int(n) for n in n_grid)
    if n_grid[0] < 0:
        raise ValueError("n must be nonnegative")
    out = run_replicas(
        chunk_kernel(_orbit_kernel, mp=mp, d=d, phi=phi, psi=psi, n_grid=n_grid),
        M,
        seed,
        tag=22,
        workers=workers,
        desc="correlations",
    )
    psi0 = out["psi"]
    psi_centered = psi0 - psi0.mean()
    rows = []
    for i, n in enumerate(n_grid):
        phi_n = out["phi"][:, i]
        stats = mean_stderr((phi_n - phi_n.mean()) * psi_centered)
        predicted = float("nan")
        if mp.alpha < 1 and n > 0 and mp.p1 > 0:
            predicted = predicted_correlation(mp, d, n, float(phi_n.mean()), float(psi0.mean()))
        rows.append({"n": n, "corr": stats["mean"], "stderr": stats["stderr"], "predicted": predicted})
    return rows


def operator_correlation(
    phi: Observable,
    psi: Observable,
    n_grid: Sequence[int],
    mp: ModelParams,
    d: DensityEstimate,
    matrix: sparse.csr_matrix,
) -> List[Dict[str, float]]:
    """Cor(phi, psi)(n) for observables of x alone, by pushing psi f* through the Ulam matrix.

    For such observables int phi o S^n psi dnu = int phi P^n(psi f*) dx with P the annealed
    operator, so the estimate is deterministic and reaches far into the tail.
    """

    if phi.symbol_horizon or psi.symbol_horizon:
        raise ValueError("operator correlations need observables of x alone")
    n_grid = sorted(int(n) for n in n_grid)
    masses = d.masses().numpy()
    phi_avg = cell_averages(phi, d, mp).numpy()
    weighted = cell_averages(psi, d, mp).numpy() * masses
    mean_phi = float((phi_avg * masses).sum())
    mean_psi = float(weighted.sum())
    transposed = matrix.T.tocsr()
    rows = []
    wanted = set(n_grid)
    for k in range(n_grid[-1] + 1):
        if k in wanted:
            corr = float((phi_avg * weighted).sum()) - mean_phi * mean_psi
            predicted = predicted_correlation(mp, d, k, mean_phi, mean_psi) if mp.alpha < 1 and k > 0 else float("nan")
            rows.append({"n": k, "corr": corr, "stderr": 0.0, "predicted": predicted})
        weighted = transposed @ weighted
    return rows


def correlation_slope(rows: List[Dict[str, float]], n_lo: float, n_hi: float) -> Tuple[float, float]:
    """Log-log slope of |corr| against n over [n_lo, n_hi] and its r^2."""

    picked = [r for r in rows if n_lo <= r["n"] <= n_hi]
    slope, _, r2 = loglog_slope([r["n"] for r in picked], [r["corr"] for r in picked])
    return slope, r2


def mc_agreement(
    mc_rows: List[Dict[str, float]], operator_rows: List[Dict[str, float]], slack: float = MC_SLACK
) -> float:
    """Worst distance, in standard errors, between Monte Carlo and operator correlations.

    ``slack`` is absorbed before dividing and stands for the Ulam discretization error of the
    operator rows. A lag missing from ``operator_rows`` raises KeyError.
    """

    exact = {r["n"]: r["corr"] for r in operator_rows}
    worst = 0.0
    for row in mc_rows:
        excess = max(abs(row["corr"] - exact[row["n"]]) - slack, 0.0)
        if excess == 0.0:
            continue
        worst = max(worst, excess / row["stderr"] if row["stderr"] > 0 else math.inf)
    return worst


def _stationary_tail_kernel(
    size: int, generator: torch.Generator, mp: ModelParams, d: DensityEstimate, n_grid: Sequence[int]
) -> torch.Tensor:
    codes = draw_codes(mp, size, max(n_grid) - 1, generator)
    base = d.cdf(0.5)
    columns = [d.cdf((xn_batch(codes, n, mp) + 1.0) / 2.0) - base for n in n_grid]
    return torch.stack(columns, dim=1)


def stationary_tail(
    mp: ModelParams,
    d: DensityEstimate,
    n_grid: Sequence[int],
    M: int,
    seed: int,
    workers: int = 0,
) -> List[Dict[str, float]]:
    """nu(R > n | Delta_0) under the invariant density, against A n^(-1/alpha) / nu(Delta_0).

    Uses nu({R > n} & Delta_0 | omega) = int_(1/2)^(x'_n(omega)) f*, averaged over omega.
    """

    n_grid = sorted(int(n) for n in n_grid)
    if n_grid[0] < 1:
        raise ValueError("stationary tails start at n = 1")
    A, _ = corr_constants(mp, d)
    delta0 = 1.0 - d.cdf(0.5)
    samples = run_replicas(
        chunk_kernel(_stationary_tail_kernel, mp=mp, d=d, n_grid=n_grid),
        M,
        seed,
        tag=21,
        workers=workers,
        desc="stationary tail",
    )
    rows = []
    for i, n in enumerate(n_grid):
        stats = mean_stderr(samples[:, i])
        rows.append(
            {
                "n": n,
                "tail": stats["mean"] / delta0,
                "stderr": stats["stderr"] / delta0,
                "predicted": A * n ** (-1.0 / mp.alpha) / delta0,
            }
        )
    return rows
