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
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
import torch

from irand.dynamics.driver import ModelParams, Symbol, cylinder_table
from irand.dynamics.ulam import DensityEstimate

ZERO_C_TOL = 1e-12
QUADRATURE_ORDER = 8

Evaluator = Callable[[torch.Tensor, torch.Tensor], torch.Tensor]


@dataclass(frozen=True)
class Bump:
    """Smooth bump exp(1 - 1/(1 - u^2)) with height ``height`` supported in [lo, hi]."""

    lo: float
    hi: float
    height: float = 1.0

    def __call__(self, x: torch.Tensor, codes: torch.Tensor) -> torch.Tensor:
        u = (2 * x - self.lo - self.hi) / (self.hi - self.lo)
        inside = u.abs() < 1
        safe = torch.where(inside, u, torch.zeros_like(u))
        return torch.where(inside, self.height * torch.exp(1 - 1 / (1 - safe * safe)), torch.zeros_like(x))

    def integral(self) -> float:
        nodes, weights = np.polynomial.legendre.leggauss(64)
        u = torch.from_numpy(nodes)
        values = torch.exp(1 - 1 / (1 - u * u))
        return self.height * (self.hi - self.lo) / 2 * float((torch.from_numpy(weights) * values).sum())


@dataclass(frozen=True)
class Tent:
    """Lipschitz g(x) = max(0, 1 - x / width), equal to 1 at the neutral fixed point."""

    width: float = 0.5

    def __call__(self, x: torch.Tensor, codes: torch.Tensor) -> torch.Tensor:
        return (1 - x / self.width).clamp(min=0.0)


@dataclass(frozen=True)
class SymbolWeighted:
    """eps(omega_0) h(x) with eps(Fast) = 1 and eps(Slow) = -p1 / p2, so the symbol average
    of eps vanishes and c = E_omega f(0, omega) = 0 exactly."""

    base: Evaluator
    p1: float

    def __call__(self, x: torch.Tensor, codes: torch.Tensor) -> torch.Tensor:
        slow = -self.p1 / (1 - self.p1)
        eps = torch.where(codes[:, 0] == Symbol.FAST, torch.ones_like(x), torch.full_like(x, slow))
        return eps * self.base(x, codes)


@dataclass(frozen=True)
class Affine:
    """scale * f + shift."""

    base: Evaluator
    scale: float = 1.0
    shift: float = 0.0

    def __call__(self, x: torch.Tensor, codes: torch.Tensor) -> torch.Tensor:
        return self.scale * self.base(x, codes) + self.shift


@dataclass(frozen=True)
class Observable:
    """Bounded f(x, omega) reading x and the first ``symbol_horizon`` symbols of omega.

    Evaluators are called with a float64 tensor of points and a (len(x), horizon) code
    matrix, and must be picklable so replica chunks can run in worker processes.
    """

    evaluator: Evaluator
    holder_exponent: float = 1.0
    symbol_horizon: int = 0
    name: str = "f"

    def __post_init__(self):
        if not 0 < self.holder_exponent <= 1:
            raise ValueError(f"holder_exponent must lie in (0, 1], got {self.holder_exponent}")
        if self.symbol_horizon < 0:
            raise ValueError(f"symbol_horizon must be nonnegative, got {self.symbol_horizon}")

    def __call__(self, x: torch.Tensor, codes: Optional[torch.Tensor] = None) -> torch.Tensor:
        x = x.to(torch.float64)
        if codes is None:
            codes = torch.zeros(x.numel(), 0, dtype=torch.uint8)
        return self.evaluator(x, codes[:, : self.symbol_horizon])

    def symbol_average(self, x: torch.Tensor, mp: ModelParams) -> torch.Tensor:
        """E_omega f(x, omega) at each point, exact over the 2^horizon cylinders."""

        x = x.to(torch.float64)
        if self.symbol_horizon == 0:
            return self(x)
        codes, weights = cylinder_table(mp, self.symbol_horizon)
        total = torch.zeros_like(x)
        for row, w in zip(codes, weights):
            total += w * self(x, row.expand(x.numel(), -1))
        return total

    def c_value(self, mp: ModelParams) -> float:
        """c = E_omega f(0, omega)."""

        return float(self.symbol_average(torch.zeros(1, dtype=torch.float64), mp)[0])


def bump_observable(lo: float = 0.6, hi: float = 0.9, height: float = 1.0) -> Observable:
    return Observable(Bump(lo, hi, height), name=f"bump[{lo},{hi}]")


def tent_observable(width: float = 0.5) -> Observable:
    return Observable(Tent(width), name=f"tent({width})")


def symbol_weighted_observable(base: Observable, mp: ModelParams) -> Observable:
    if not 0 < mp.p1 < 1:
        raise ValueError("symbol weighting needs 0 < p1 < 1")
    return Observable(
        SymbolWeighted(base.evaluator, mp.p1),
        holder_exponent=base.holder_exponent,
        symbol_horizon=max(1, base.symbol_horizon),
        name=f"eps*{base.name}",
    )


def cell_quadrature(d: DensityEstimate, order: int = QUADRATURE_ORDER):
    """Gauss-Legendre nodes and weights on every cell, weights already multiplied by the
    density, so ``(weights * g(nodes)).sum()`` approximates int g f* dx."""

    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes = torch.from_numpy(nodes)
    weights = torch.from_numpy(weights)
    half = d.grid.lengths[:, None] / 2
    points = d.grid.midpoints[:, None] + half * nodes[None, :]
    return points, half * weights[None, :] * d.cell_values[:, None]


def nu_mean(f: Observable, d: DensityEstimate, mp: ModelParams, order: int = QUADRATURE_ORDER) -> float:
    """int f dnu with nu = f* dx x Bernoulli(p1)^N, by cell quadrature and exact symbol averaging."""

    points, weights = cell_quadrature(d, order)
    values = f.symbol_average(points.flatten(), mp).view_as(points)
    return float((weights * values).sum())


def cell_averages(f: Observable, d: DensityEstimate, mp: ModelParams, order: int = QUADRATURE_ORDER) -> torch.Tensor:
    """Lebesgue average of E_omega f over each cell."""

    nodes, weights = np.polynomial.legendre.leggauss(order)
    half = d.grid.lengths[:, None] / 2
    points = d.grid.midpoints[:, None] + half * torch.from_numpy(nodes)[None, :]
    values = f.symbol_average(points.flatten(), mp).view_as(points)
    return (values * torch.from_numpy(weights)[None, :]).sum(dim=1) / 2


def center_observable(f: Observable, d: DensityEstimate, mp: ModelParams) -> Observable:
    """f - int f dnu; the returned observable's c_value moves by the same constant."""

    mean = nu_mean(f, d, mp)
    return replace(f, evaluator=Affine(f.evaluator, 1.0, -mean), name=f"{f.name}-mean")


def scale_observable(f: Observable, factor: float) -> Observable:
    return replace(f, evaluator=Affine(f.evaluator, factor, 0.0), name=f"{factor:g}*{f.name}")


def unit_c_observable(d: DensityEstimate, mp: ModelParams, width: float = 0.5) -> Observable:
    """Centered Lipschitz observable with c = 1, built from a tent peaked at 0."""

    centered = center_observable(tent_observable(width), d, mp)
    c = centered.c_value(mp)
    if abs(c) <= ZERO_C_TOL:
        raise ValueError("centered tent has c = 0; choose another width")
    return scale_observable(centered, 1.0 / c)


def holder_constant(f: Observable, gamma: float, mp: ModelParams, points: int = 2048) -> float:
    """sup |f(x, omega) - f(0, omega)| / x^gamma over a log grid of x in (0, 1] and all
    cylinders of the observable's horizon."""

    x = torch.from_numpy(np.geomspace(1e-12, 1.0, points))
    if f.symbol_horizon == 0:
        rows = [torch.zeros(0, dtype=torch.uint8)]
    else:
        rows = list(cylinder_table(mp, f.symbol_horizon)[0])
    worst = 0.0
    for row in rows:
        codes = row.expand(x.numel(), -1)
        at_zero = f(torch.zeros_like(x), codes)
        ratio = (f(x, codes) - at_zero).abs() / x ** gamma
        worst = max(worst, float(ratio.max()))
    return worst


def is_zero_c(c: float) -> bool:
    return math.isclose(c, 0.0, abs_tol=ZERO_C_TOL)
