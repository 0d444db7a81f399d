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
import warnings
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import torch
from scipy import sparse
from scipy.sparse.linalg import spsolve

from irand.dynamics.driver import ModelParams, SkewState, SymbolStream
from irand.dynamics.lsv import left_inverse_tensor
from irand.utils.misc import loglog_slope, make_generator

DEFAULT_CELLS = 2 ** 14
GEOMETRIC_SPLIT = 0.1
SMALLEST_BREAKPOINT = 1e-12


@dataclass(frozen=True)
class UlamGrid:
    """Partition 0 = b_0 < b_1 < ... < b_K = 1 of the unit interval.

    Half of the cells are packed geometrically into [0, ``split``]; the rest are uniform
    on [split, 1/2] and [1/2, 1], so 1/2 is always a breakpoint.
    """

    breakpoints: torch.Tensor
    ratio: float
    split: float = GEOMETRIC_SPLIT

    def __post_init__(self):
        b = self.breakpoints
        if b.ndim != 1 or b.numel() < 2:
            raise ValueError("a grid needs at least two breakpoints")
        if float(b[0]) != 0.0 or float(b[-1]) != 1.0:
            raise ValueError("breakpoints must start at 0 and end at 1")
        if not bool((b[1:] > b[:-1]).all()):
            raise ValueError("breakpoints must be strictly increasing")

    @property
    def cells(self) -> int:
        return self.breakpoints.numel() - 1

    @property
    def lengths(self) -> torch.Tensor:
        return self.breakpoints[1:] - self.breakpoints[:-1]

    @property
    def left(self) -> torch.Tensor:
        return self.breakpoints[:-1]

    @property
    def right(self) -> torch.Tensor:
        return self.breakpoints[1:]

    @property
    def midpoints(self) -> torch.Tensor:
        return 0.5 * (self.left + self.right)

    def locate(self, x: torch.Tensor) -> torch.Tensor:
        """Index of the cell [b_i, b_(i+1)) containing each point; 1 falls in the last cell."""

        index = torch.searchsorted(self.breakpoints, x.to(torch.float64), right=True) - 1
        return index.clamp(0, self.cells - 1)


def make_grid(
    cells: int = DEFAULT_CELLS,
    ratio: Optional[float] = None,
    split: float = GEOMETRIC_SPLIT,
    smallest: float = SMALLEST_BREAKPOINT,
) -> UlamGrid:
    """Builds the refinement grid.

    Args:
        cells (int, optional): number of cells K. Defaults to 2^14.
        ratio (Optional[float], optional): ratio between consecutive geometric cells. When
            ``None`` it is chosen so that the first positive breakpoint is ``smallest``,
            which makes doubling K halve the relative cell size everywhere.
        split (float, optional): end of the geometric region. Defaults to 0.1.
        smallest (float, optional): first positive breakpoint when ``ratio`` is None.

    Returns:
        UlamGrid: the grid.
    """

    if cells < 8:
        raise ValueError(f"need at least 8 cells, got {cells}")
    if not 0 < split < 0.5:
        raise ValueError(f"split must lie in (0, 1/2), got {split}")
    geometric = cells // 2
    if ratio is None:
        if not 0 < smallest < split:
            raise ValueError(f"smallest breakpoint must lie in (0, split), got {smallest}")
        ratio = (split / smallest) ** (1.0 / (geometric - 1))
    elif ratio <= 1:
        raise ValueError(f"ratio must exceed 1, got {ratio}")
    powers = torch.arange(geometric - 1, -1, -1, dtype=torch.float64)
    near_zero = split * torch.tensor(ratio, dtype=torch.float64) ** (-powers)
    remaining = cells - geometric
    middle = max(1, round(remaining * (0.5 - split) / (1.0 - split)))
    upper = remaining - middle
    breakpoints = torch.cat(
        [
            torch.zeros(1, dtype=torch.float64),
            near_zero,
            torch.linspace(split, 0.5, middle + 1, dtype=torch.float64)[1:],
            torch.linspace(0.5, 1.0, upper + 1, dtype=torch.float64)[1:],
        ]
    )
    return UlamGrid(breakpoints=breakpoints, ratio=float(ratio), split=split)


def _branch_entries(
    b: np.ndarray, lengths: np.ndarray, exponent: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    # preimages of every breakpoint under both branches of T_exponent
    left = left_inverse_tensor(exponent, torch.from_numpy(b)).numpy()
    left[0], left[-1] = 0.0, 0.5
    right = (b + 1.0) / 2.0
    points = np.unique(np.concatenate([b, left, right]))
    lo, hi = points[:-1], points[1:]
    mid = 0.5 * (lo + hi)
    source = np.searchsorted(b, mid, side="right") - 1
    target = np.where(
        mid <= 0.5,
        np.searchsorted(left, mid, side="right") - 1,
        np.searchsorted(right, mid, side="right") - 1,
    )
    K = lengths.size
    source = np.clip(source, 0, K - 1)
    target = np.clip(target, 0, K - 1)
    return source, target, (hi - lo) / lengths[source]


def ulam_matrix(grid: UlamGrid, mp: ModelParams) -> sparse.csr_matrix:
    """Row-stochastic Ulam matrix of the annealed operator p1 P_alpha + p2 P_beta.

    Entry (i, j) is p1 m(cell_i & T_alpha^-1 cell_j) / m(cell_i) plus the same for
    T_beta. Preimages are exact: the left branch is inverted numerically and the right
    branch is affine, so every cell splits into segments with a single image cell.
    """

    b = grid.breakpoints.numpy()
    lengths = grid.lengths.numpy()
    K = grid.cells
    rows, cols, vals = [], [], []
    for exponent, weight in ((mp.alpha, mp.p1), (mp.beta, mp.p2)):
        if weight == 0:
            continue
        source, target, fraction = _branch_entries(b, lengths, exponent)
        rows.append(source)
        cols.append(target)
        vals.append(weight * fraction)
    matrix = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(K, K)
    ).tocsr()
    matrix.sum_duplicates()
    row_sums = np.asarray(matrix.sum(axis=1)).ravel()
    return sparse.diags(1.0 / row_sums) @ matrix


@dataclass
class DensityEstimate:
    """Piecewise-constant density on an Ulam grid."""

    cell_values: torch.Tensor
    grid: UlamGrid
    residual: float = 0.0
    iterations: int = 0
    converged: bool = True

    @classmethod
    def from_masses(cls, masses: torch.Tensor, grid: UlamGrid, **kwargs) -> "DensityEstimate":
        masses = masses.to(torch.float64).clamp(min=0.0)
        masses = masses / masses.sum()
        return cls(cell_values=masses / grid.lengths, grid=grid, **kwargs)

    @classmethod
    def uniform(cls, grid: UlamGrid) -> "DensityEstimate":
        return cls(cell_values=torch.ones(grid.cells, dtype=torch.float64), grid=grid)

    def masses(self) -> torch.Tensor:
        return self.cell_values * self.grid.lengths

    def total(self) -> float:
        return float(self.masses().sum())

    def cumulative(self) -> torch.Tensor:
        """CDF at the breakpoints, starting at 0."""

        return torch.cat([torch.zeros(1, dtype=torch.float64), self.masses().cumsum(0)])

    def cdf(self, x: Union[float, torch.Tensor]) -> Union[float, torch.Tensor]:
        scalar = not isinstance(x, torch.Tensor)
        x = torch.as_tensor(x, dtype=torch.float64).clamp(0.0, 1.0)
        index = self.grid.locate(x)
        out = self.cumulative()[index] + self.cell_values[index] * (x - self.grid.left[index])
        return float(out) if scalar else out

    def value_at(self, x: Union[float, torch.Tensor]) -> Union[float, torch.Tensor]:
        scalar = not isinstance(x, torch.Tensor)
        out = self.cell_values[self.grid.locate(torch.as_tensor(x, dtype=torch.float64))]
        return float(out) if scalar else out

    def right_value(self, x: float = 0.5) -> float:
        """Cell average immediately to the right of ``x``; the right-limit convention at 1/2."""

        return self.value_at(x)

    def mean(self, values_per_cell: torch.Tensor) -> float:
        return float((self.masses() * values_per_cell).sum())


def _power_iterate(
    matrix: sparse.csr_matrix, masses: np.ndarray, tol: float, max_iter: int
) -> Tuple[np.ndarray, float, int, bool]:
    transposed = matrix.T.tocsr()
    distance = math.inf
    for iteration in range(1, max_iter + 1):
        pushed = transposed @ masses
        pushed = np.clip(pushed, 0.0, None)
        pushed /= pushed.sum()
        distance = float(np.abs(pushed - masses).sum())
        masses = pushed
        if distance < tol:
            return masses, distance, iteration, True
    return masses, distance, max_iter, False


def invariant_density(
    matrix: sparse.csr_matrix,
    grid: UlamGrid,
    tol: float = 1e-12,
    max_iter: int = 10_000,
    warm_start: bool = True,
) -> DensityEstimate:
    """Fixed point of the Ulam matrix by power iteration.

    Args:
        matrix (sparse.csr_matrix): row-stochastic matrix from :func:`ulam_matrix`.
        grid (UlamGrid): the grid the matrix was built on.
        tol (float, optional): L1 distance between successive iterates that stops the
            iteration. Defaults to 1e-12.
        max_iter (int, optional): iteration cap. Defaults to 10000.
        warm_start (bool, optional): start from the sparse direct solution of
            (I - P^T) m = 0, sum(m) = 1 instead of the uniform density. Defaults to True.

    Returns:
        DensityEstimate: the density with its invariance residual ||P f - f||_1.
    """

    K = grid.cells
    if warm_start:
        system = (sparse.identity(K, format="csr") - matrix.T).tolil()
        system[0, :] = np.ones(K)
        rhs = np.zeros(K)
        rhs[0] = 1.0
        masses = np.clip(spsolve(system.tocsc(), rhs), 0.0, None)
        masses /= masses.sum()
    else:
        masses = grid.lengths.numpy().copy()
    masses, _, iterations, converged = _power_iterate(matrix, masses, tol, max_iter)
    residual = float(np.abs(matrix.T @ masses - masses).sum())
    if not converged:
        warnings.warn(
            f"power iteration stopped after {max_iter} steps with residual {residual:.3e}"
        )
    return DensityEstimate.from_masses(
        torch.from_numpy(masses),
        grid,
        residual=residual,
        iterations=iterations,
        converged=converged,
    )


def annealed_density(
    mp: ModelParams, cells: int = DEFAULT_CELLS, tol: float = 1e-12, max_iter: int = 10_000
) -> Tuple[DensityEstimate, sparse.csr_matrix]:
    grid = make_grid(cells)
    matrix = ulam_matrix(grid, mp)
    return invariant_density(matrix, grid, tol=tol, max_iter=max_iter), matrix


@dataclass
class ConeReport:
    nonnegative: bool
    monotone: bool
    integral_bound: bool
    a: float
    worst_monotone_ratio: float
    worst_integral_ratio: float

    @property
    def passed(self) -> bool:
        return self.nonnegative and self.monotone and self.integral_bound

    def as_dict(self) -> Dict[str, float]:
        return {
            "nonnegative": self.nonnegative,
            "monotone": self.monotone,
            "integral_bound": self.integral_bound,
            "a": self.a,
            "worst_monotone_ratio": self.worst_monotone_ratio,
            "worst_integral_ratio": self.worst_integral_ratio,
            "passed": self.passed,
        }


def cone_check(
    d: DensityEstimate, beta: float, a: Optional[float] = None, rtol: float = 1e-9
) -> ConeReport:
    """Checks the density against the cone of nonnegative decreasing functions with
    int_0^x f <= a x^(1 - beta) int_0^1 f, by default with a = 4 / (1 - beta).

    Decrease is checked with a tolerance of one cell: f on cell i + 2 may not exceed f
    on cell i. The integral bound is evaluated at every breakpoint.
    """

    if beta >= 1:
        raise ValueError(f"the cone is only defined for beta < 1, got {beta}")
    if a is None:
        a = 4.0 / (1.0 - beta)
    f = d.cell_values
    nonnegative = bool((f >= 0).all())
    ahead, behind = f[2:], f[:-2]
    ratio = torch.where(behind > 0, ahead / behind.clamp(min=1e-300), torch.zeros_like(ahead))
    worst_monotone = float(ratio.max()) if ratio.numel() else 0.0
    monotone = worst_monotone <= 1.0 + rtol
    x = d.grid.breakpoints[1:]
    bound = a * x ** (1.0 - beta) * d.total()
    worst_integral = float((d.cumulative()[1:] / bound).max())
    return ConeReport(
        nonnegative=nonnegative,
        monotone=monotone,
        integral_bound=worst_integral <= 1.0 + rtol,
        a=a,
        worst_monotone_ratio=worst_monotone,
        worst_integral_ratio=worst_integral,
    )


def sample_density(d: DensityEstimate, size: int, generator: torch.Generator) -> torch.Tensor:
    """Inverse-CDF samples from the piecewise-constant density."""

    cumulative = d.cumulative()
    u = torch.rand(size, generator=generator, dtype=torch.float64) * cumulative[-1]
    index = (torch.searchsorted(cumulative, u, right=True) - 1).clamp(0, d.grid.cells - 1)
    mass = d.masses()[index]
    offset = torch.where(mass > 0, (u - cumulative[index]) / mass.clamp(min=1e-300), torch.zeros_like(u))
    return d.grid.left[index] + offset.clamp(0.0, 1.0) * d.grid.lengths[index]


def nu_sample(d: DensityEstimate, mp: ModelParams, M: int, seed: int) -> List[SkewState]:
    """M independent draws of (x, omega) with x from the density and omega Bernoulli(p1).

    Replica ``i`` carries the seeded symbol stream of index ``i``.
    """

    if M < 1:
        raise ValueError(f"M must be positive, got {M}")
    x = sample_density(d, M, make_generator(seed, 20))
    return [SkewState(x=float(x[i]), stream=SymbolStream.seeded(mp.p1, seed, i)) for i in range(M)]


def density_l1_distance(d1: DensityEstimate, d2: DensityEstimate) -> float:
    """L1 distance between densities on possibly different grids."""

    points = torch.unique(torch.cat([d1.grid.breakpoints, d2.grid.breakpoints]))
    mid = 0.5 * (points[1:] + points[:-1])
    widths = points[1:] - points[:-1]
    return float(((d1.value_at(mid) - d2.value_at(mid)).abs() * widths).sum())


def refinement_gap(mp: ModelParams, cells: Sequence[int], tol: float = 1e-12) -> List[Dict[str, float]]:
    """||f*_K - f*_2K||_1 for each K in ``cells``."""

    densities = {}
    rows = []
    for K in sorted(int(k) for k in cells):
        for size in (K, 2 * K):
            if size not in densities:
                densities[size] = annealed_density(mp, size, tol=tol)[0]
        rows.append({"cells": K, "l1_gap": density_l1_distance(densities[K], densities[2 * K])})
    return rows


def density_exponent(d: DensityEstimate, x_lo: float = 1e-8, x_hi: float = 1e-3) -> Tuple[float, float]:
    """Power-law exponent gamma of f*(x) ~ x^(-gamma) fitted on cell midpoints in [x_lo, x_hi].

    Returns:
        Tuple[float, float]: gamma and the r^2 of the log-log fit.
    """

    mid = d.grid.midpoints
    keep = (mid >= x_lo) & (mid <= x_hi)
    slope, _, r2 = loglog_slope(mid[keep].tolist(), d.cell_values[keep].tolist())
    return -slope, r2
